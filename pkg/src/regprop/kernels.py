"""Backend selection for the objective-table kernel.

The compiled extension ``regprop._kernels`` is used when it imports; the
NumPy module ``regprop._kernels_py`` is the fallback.  Set
``REGPROP_PURE_PYTHON=1`` to force the fallback.

``objective_table(P, group, n_groups, reg, lam)`` returns an ``(N, 2**m)``
array whose entry ``[n, k]`` is the regularized 0-1 objective of treatment
vector ``k`` (lexicographic, agent 0 most significant) at the binary
population ``P[n]``.  On binary treatments the squared loss coincides with
the 0-1 loss, so one table serves both.  EEO rows with ``sum(p) = 0`` get a
regularizer value of 0.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from .errors import ConfigurationError, UnsupportedGroupStructureError

REG_CODES = _kernels_py.REG_CODES
treatment_bits = _kernels_py.treatment_bits

_compiled = None
if not os.environ.get("REGPROP_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_IMPLS = {"python": _kernels_py.objective_table}
if _compiled is not None:
    _IMPLS["cython"] = _compiled.objective_table


def available_backends() -> tuple:
    return tuple(_IMPLS)


def objective_table(P, group, n_groups: int, reg: str, lam: float, backend: str | None = None) -> np.ndarray:
    if reg not in REG_CODES:
        raise ConfigurationError(f"kernel has no regularizer {reg!r}")
    if reg in ("dp", "fpr", "fnr", "eeo") and n_groups != 2:
        raise UnsupportedGroupStructureError(f"{reg} needs exactly two groups, got {n_groups}")
    P = np.ascontiguousarray(np.atleast_2d(P), dtype=np.float64)
    group = np.ascontiguousarray(group, dtype=np.int64)
    if P.shape[1] != group.size:
        raise ConfigurationError("population width does not match group vector")
    lam = 0.0 if reg == "none" else float(lam)
    impl = _IMPLS.get(backend or BACKEND)
    if impl is None:
        raise ConfigurationError(f"backend {backend!r} unavailable; have {available_backends()}")
    return np.asarray(impl(P, group, int(n_groups), REG_CODES[reg], lam))
