"""Fairness regularizers R(t; s; p) and their differentiable surrogates.

Hard regularizers act on a treatment vector and a population.  Soft
surrogates replace treatments by scores in [0, 1] and the outcome
probabilities by observed labels; those are what the trainer optimizes.

Conventions shared by both forms:

* a group with no positively treated member has FPR_g = EEO_g = 0;
* FNR divides by the group size n_g, not by the number of negatives;
* EEO is not normalized and may exceed 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Population,
    TreatmentVector,
    as_treatment,
    check_loss,
    check_regularizer,
    expected_loss,
)
from .errors import (
    ConfigurationError,
    DegeneratePopulationError,
    UnsupportedGroupStructureError,
)

DENOM_EPS = 1e-6
TWO_GROUP = ("dp", "fpr", "fnr", "eeo")


@dataclass(frozen=True)
class GroupAggregate:
    group: object
    count: int
    sum_treat: float
    sum_prob: float
    positives: int


def aggregates(t, pop: Population) -> list[GroupAggregate]:
    t = as_treatment(t)
    out = []
    for g in pop.groups:
        idx = [i for i, a in enumerate(pop.agents) if a.group == g]
        out.append(
            GroupAggregate(
                group=g,
                count=len(idx),
                sum_treat=float(sum(t[i] for i in idx)),
                sum_prob=math.fsum(pop.agents[i].dist.p1 for i in idx),
                positives=sum(1 for i in idx if t[i] == 1),
            )
        )
    return out


def _require_two_groups(name: str, n_groups: int) -> None:
    if n_groups != 2:
        raise UnsupportedGroupStructureError(
            f"{name} needs exactly two groups, population declares {n_groups}"
        )


def _group_index(groups) -> tuple[np.ndarray, int]:
    labels = list(dict.fromkeys(groups))
    pos = {g: i for i, g in enumerate(labels)}
    return np.array([pos[g] for g in groups], dtype=np.int64), len(labels)


def _value(reg: str, t: np.ndarray, p: np.ndarray, gidx: np.ndarray, n_groups: int,
           clamp: float | None, strict: bool = True) -> float:
    """Shared array formula.

    ``clamp=None`` gives the hard conventions (empty positive set -> 0);
    a positive ``clamp`` bounds every ratio denominator from below.
    """
    masks = [gidx == g for g in range(n_groups)]
    counts = [float(mk.sum()) for mk in masks]

    def ratio(num: float, den: float) -> float:
        if clamp is None:
            return num / den if den > 0.0 else 0.0
        return num / max(den, clamp)

    if reg == "dp":
        _require_two_groups(reg, n_groups)
        # cross-multiplied so integer treatments give exact values
        sums = [float(np.sum(t[mk])) for mk in masks]
        return abs(sums[0] * counts[1] - sums[1] * counts[0]) / (counts[0] * counts[1])
    if reg == "fpr":
        _require_two_groups(reg, n_groups)
        rates = [ratio(np.sum(t[mk] * (1.0 - p[mk])), np.sum(t[mk])) for mk in masks]
        return float(abs(rates[0] - rates[1]))
    if reg == "fnr":
        _require_two_groups(reg, n_groups)
        rates = [np.sum((1.0 - t[mk]) * p[mk]) / n for mk, n in zip(masks, counts)]
        return float(abs(rates[0] - rates[1]))
    if reg == "eeo":
        _require_two_groups(reg, n_groups)
        total_p = float(np.sum(p))
        if clamp is None and total_p <= 0.0:
            if strict:
                raise DegeneratePopulationError("EEO undefined: outcome probabilities sum to 0")
            warnings.warn("EEO undefined for sum(p) = 0; using 0", RuntimeWarning, stacklevel=3)
            return 0.0
        total_t = float(np.sum(t))
        rates = [
            ratio(np.sum(t[mk] * p[mk]), np.sum(t[mk])) * total_t / (
                total_p if clamp is None else max(total_p, clamp))
            for mk in masks
        ]
        return float(abs(rates[0] - rates[1]))
    if reg == "cal":
        return float(sum(np.sum(np.abs(t[mk] - p[mk])) / n for mk, n in zip(masks, counts)))
    raise ConfigurationError(f"no array formula for regularizer {reg!r}")


def _binary_arrays(t, pop: Population) -> tuple[np.ndarray, np.ndarray]:
    if not pop.is_binary:
        raise ConfigurationError("this regularizer is defined for binary outcomes only")
    t = as_treatment(t)
    if len(t) != pop.m:
        raise ConfigurationError(f"treatment vector has length {len(t)}, population has {pop.m}")
    return np.asarray(t.treatments, dtype=float), pop.p1


def dp(t, pop: Population) -> float:
    """Absolute gap between the groups' positive-treatment rates."""
    _require_two_groups("dp", len(pop.groups))
    tt = as_treatment(t, tuple(range(pop.n_outcomes)))
    tt = np.asarray(tt.treatments, dtype=float)
    return _value("dp", tt, np.zeros_like(tt), pop.group_index, 2, None)


def fpr(t, pop: Population) -> float:
    """|FPR_a - FPR_b| with FPR_g the mean of 1 - p over treated members of g."""
    tt, p = _binary_arrays(t, pop)
    return _value("fpr", tt, p, pop.group_index, len(pop.groups), None)


def fnr(t, pop: Population) -> float:
    tt, p = _binary_arrays(t, pop)
    return _value("fnr", tt, p, pop.group_index, len(pop.groups), None)


def eeo(t, pop: Population, *, strict: bool = True) -> float:
    """Expected equality of opportunity gap.

    ``strict=False`` maps the degenerate sum(p) = 0 case to 0 with a warning.
    """
    tt, p = _binary_arrays(t, pop)
    return _value("eeo", tt, p, pop.group_index, len(pop.groups), None, strict)


def cal(t, pop: Population) -> float:
    tt, p = _binary_arrays(t, pop)
    return _value("cal", tt, p, pop.group_index, len(pop.groups), None)


def bgl(t, pop: Population, loss_id: str = "zero-one") -> float:
    """Sum over groups of the group-mean expected loss."""
    check_loss(loss_id)
    t = as_treatment(t, tuple(range(pop.n_outcomes)))
    total = 0.0
    for g in pop.groups:
        losses = [expected_loss(loss_id, ti, a.dist) for ti, a in zip(t, pop.agents) if a.group == g]
        total += float(np.sum(np.array(losses))) / len(losses)
    return total


def evaluate(reg, t, pop: Population, loss_id: str = "zero-one", strict: bool = True) -> float:
    """Dispatch on a regularizer id, or call a custom ``R(t, pop)``."""
    check_regularizer(reg)
    if callable(reg):
        return float(reg(as_treatment(t, tuple(range(pop.n_outcomes))), pop))
    if reg == "none":
        return 0.0
    if reg == "bgl":
        return bgl(t, pop, loss_id)
    if reg == "eeo":
        return eeo(t, pop, strict=strict)
    return {"dp": dp, "fpr": fpr, "fnr": fnr, "cal": cal}[reg](t, pop)


# -- soft surrogates ---------------------------------------------------------


def _soft_inputs(scores, labels, groups):
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float) if labels is not None else np.zeros_like(s)
    if s.shape != y.shape or s.ndim != 1 or len(groups) != s.size:
        raise ConfigurationError("scores, labels and groups must be 1-d and equally long")
    gidx, n_groups = _group_index(list(groups))
    return s, y, gidx, n_groups


def _soft_bgl_terms(s, y, loss_id):
    if loss_id == "zero-one":
        return s * (1.0 - y) + (1.0 - s) * y, 1.0 - 2.0 * y
    return y * (1.0 - s) ** 2 + (1.0 - y) * s ** 2, -2.0 * y * (1.0 - s) + 2.0 * (1.0 - y) * s


def soft_surrogate(reg: str, scores, labels, groups, loss_id: str = "zero-one") -> float:
    """Relaxed regularizer: scores in the treatment slots, labels in the p slots."""
    check_regularizer(reg)
    if callable(reg):
        raise ConfigurationError("soft surrogates exist only for built-in regularizers")
    if reg == "none":
        return 0.0
    s, y, gidx, n_groups = _soft_inputs(scores, labels, groups)
    return soft_value_indexed(reg, s, y, gidx, n_groups, loss_id)


def soft_surrogate_grad(reg: str, scores, labels, groups, loss_id: str = "zero-one") -> np.ndarray:
    """Gradient of :func:`soft_surrogate` with respect to the scores.

    Absolute values use the sign subgradient (0 at 0); clamped denominators
    are treated as constants.
    """
    check_regularizer(reg)
    if callable(reg):
        raise ConfigurationError("soft surrogates exist only for built-in regularizers")
    s, y, gidx, n_groups = _soft_inputs(scores, labels, groups)
    return soft_grad_indexed(reg, s, y, gidx, n_groups, loss_id)


# The *_indexed variants take integer group codes 0..n_groups-1 and skip
# validation; the trainer calls them once per step.


def soft_value_indexed(reg, s, y, gidx, n_groups, loss_id="zero-one") -> float:
    if reg == "none":
        return 0.0
    if reg == "bgl":
        check_loss(loss_id)
        terms, _ = _soft_bgl_terms(s, y, loss_id)
        counts = np.bincount(gidx, minlength=n_groups)
        return float(np.sum(np.bincount(gidx, weights=terms, minlength=n_groups) / counts))
    return _value(reg, s, y, gidx, n_groups, DENOM_EPS)


def soft_grad_indexed(reg, s, y, gidx, n_groups, loss_id="zero-one") -> np.ndarray:
    if reg == "none":
        return np.zeros_like(s)
    counts = np.bincount(gidx, minlength=n_groups).astype(float)
    if reg in ("cal", "bgl"):
        if reg == "cal":
            per = np.sign(s - y)
        else:
            check_loss(loss_id)
            _, per = _soft_bgl_terms(s, y, loss_id)
        return per / counts[gidx]

    _require_two_groups(reg, n_groups)
    side = np.where(gidx == 0, 1.0, -1.0)  # d(rate_a - rate_b) picks +own for a, -own for b
    if reg == "dp":
        rates = np.bincount(gidx, weights=s, minlength=2) / counts
        own = 1.0 / counts[gidx]
        return np.sign(rates[0] - rates[1]) * side * own
    if reg == "fnr":
        rates = np.bincount(gidx, weights=(1.0 - s) * y, minlength=2) / counts
        own = -y / counts[gidx]
        return np.sign(rates[0] - rates[1]) * side * own

    raw = np.bincount(gidx, weights=s, minlength=2)
    den = np.maximum(raw, DENOM_EPS)
    live = (raw > DENOM_EPS).astype(float)
    if reg == "fpr":
        num = np.bincount(gidx, weights=s * (1.0 - y), minlength=2)
        rates = num / den
        own = (1.0 - y) / den[gidx] - live[gidx] * num[gidx] / den[gidx] ** 2
        return np.sign(rates[0] - rates[1]) * side * own
    if reg == "eeo":
        total_s = float(np.sum(s))
        total_y = max(float(np.sum(y)), DENOM_EPS)
        num = np.bincount(gidx, weights=s * y, minlength=2)
        ratio = num / den
        rates = ratio * total_s / total_y
        own = (y / den[gidx] - live[gidx] * num[gidx] / den[gidx] ** 2) * total_s / total_y
        shared = (ratio[0] - ratio[1]) / total_y
        return np.sign(rates[0] - rates[1]) * (side * own + shared)
    raise ConfigurationError(f"no soft surrogate for {reg!r}")


def soft_from_hard_population(reg: str, t: Sequence[int], pop: Population) -> float:
    """Soft surrogate fed with a hard treatment vector and the population's p1."""
    return soft_surrogate(reg, np.asarray(t, dtype=float), pop.p1, pop.group_labels)
