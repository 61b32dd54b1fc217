"""Exact properties, regularized properties and the checks built on them.

Everything here is brute force: the regularized property at ``p`` is the set
of treatment vectors whose objective lies within ``TIE_TOL`` of the minimum
over all of ``T^m``.  Binary populations with built-in regularizers go
through the vectorized kernel; anything else (custom regularizers, more than
two outcomes) is enumerated in pure Python.

Samplers are plain ``(N, m)`` arrays of ``Pr[Y=1]`` values, one row per
population; :func:`grid`, :func:`uniform` and :func:`default_sampler` build
the usual ones.  A passing sampled check is evidence at the sampled
resolution, not a proof.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import (
    TIE_TOL,
    Population,
    RegularizedObjective,
    TreatmentVector,
    check_loss,
    check_regularizer,
    expected_loss,
    objective_value,
)
from .errors import ConfigurationError, EnumerationLimitError

DEFAULT_CAP = 1 << 20


@dataclass(frozen=True)
class PropertyValue:
    minimizers: frozenset
    min_value: float
    tie_tolerance: float = TIE_TOL

    @property
    def canonical(self) -> TreatmentVector:
        """Lexicographically smallest minimizer."""
        return min(self.minimizers)

    def __contains__(self, t) -> bool:
        return TreatmentVector(tuple(t)) in self.minimizers


@dataclass(frozen=True)
class Counterexample:
    p: tuple
    gamma: frozenset
    theta: frozenset

    def to_text(self) -> str:
        return f"p={_fmt_point(self.p)} gamma={_fmt_set(self.gamma)} theta={_fmt_set(self.theta)}"


@dataclass
class EquivalenceReport:
    equivalent: bool
    counterexamples: list = field(default_factory=list)
    samples_checked: int = 0

    def to_text(self) -> str:
        lines = [
            f"equivalent: {str(self.equivalent).lower()}",
            f"samples_checked: {self.samples_checked}",
            f"counterexamples: {len(self.counterexamples)}",
        ]
        lines += [c.to_text() for c in self.counterexamples]
        return "\n".join(lines)


@dataclass
class ContainmentReport:
    holds: bool
    violations: list = field(default_factory=list)
    samples_checked: int = 0
    premise_hits: int = 0

    def __bool__(self) -> bool:
        return self.holds


def _fmt_point(p) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in p) + ")"


def _fmt_set(ts) -> str:
    return "{" + ",".join(repr(t) for t in sorted(ts)) + "}"


# -- samplers -----------------------------------------------------------------


def grid(m: int, step: float) -> np.ndarray:
    """All points of ``{0, step, 2 step, ..., 1}^m``."""
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ConfigurationError(f"grid step {step} must divide 1")
    axis = np.arange(n + 1) / n
    return np.array(list(itertools.product(axis, repeat=m)), dtype=float).reshape(-1, m)


def uniform(m: int, n: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).random((n, m))


def default_sampler(m: int = 2, step: float | None = None, n_random: int = 1000, seed: int = 0) -> np.ndarray:
    if step is None:
        step = 0.02 if m <= 2 else (0.1 if m <= 4 else 0.5)
    return np.vstack([grid(m, step), uniform(m, n_random, seed)])


# -- helpers ------------------------------------------------------------------


def _group_index(groups: Sequence) -> tuple[np.ndarray, tuple]:
    labels = tuple(dict.fromkeys(groups))
    pos = {g: i for i, g in enumerate(labels)}
    return np.array([pos[g] for g in groups], dtype=np.int64), labels


def _vectors(mask_row: np.ndarray, m: int) -> frozenset:
    bits = kernels.treatment_bits(m)
    return frozenset(TreatmentVector(tuple(int(b) for b in bits[k])) for k in np.flatnonzero(mask_row))


def _check_cap(n_treatments: int, m: int, cap: int) -> None:
    if n_treatments ** m > cap:
        raise EnumerationLimitError(f"|T|^m = {n_treatments}^{m} exceeds the cap {cap}")


def _uses_kernel(obj: RegularizedObjective) -> bool:
    return not callable(obj.regularizer)


def objective_table(obj: RegularizedObjective, groups: Sequence, P, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Objective of every binary treatment vector at every row of ``P``."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    m = P.shape[1]
    if len(groups) != m:
        raise ConfigurationError(f"{len(groups)} group labels for populations of size {m}")
    _check_cap(2, m, cap)
    gidx, labels = _group_index(groups)
    if _uses_kernel(obj):
        if obj.regularizer == "eeo" and obj.effective_lam > 0 and np.any(P.sum(axis=1) <= 0):
            warnings.warn("EEO undefined where sum(p) = 0; regularizer set to 0 there",
                          RuntimeWarning, stacklevel=2)
        return kernels.objective_table(P, gidx, len(labels), obj.regularizer, obj.effective_lam)
    vectors = list(itertools.product((0, 1), repeat=m))
    out = np.empty((P.shape[0], len(vectors)))
    for n, row in enumerate(P):
        pop = Population.binary(row, groups, labels)
        for k, t in enumerate(vectors):
            out[n, k] = objective_value(obj, t, pop, strict=False)
    return out


def argmin_mask(values: np.ndarray, tol: float = TIE_TOL) -> np.ndarray:
    return values <= values.min(axis=-1, keepdims=True) + tol


def regularized_masks(obj: RegularizedObjective, groups: Sequence, P, tol: float = TIE_TOL):
    """``(values, mask)`` with ``mask[n, k]`` true iff vector ``k`` is optimal at ``P[n]``."""
    values = objective_table(obj, groups, P)
    return values, argmin_mask(values, tol)


def agent_optimal(loss_id: str, P, tol: float = TIE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent optimality of treatments 0 and 1 for binary outcomes."""
    check_loss(loss_id)
    P = np.atleast_2d(np.asarray(P, dtype=float))
    l0, l1 = P, 1.0 - P  # 0-1 and squared coincide on binary treatments
    best = np.minimum(l0, l1)
    return l0 <= best + tol, l1 <= best + tol


def unregularized_masks(loss_id: str, P, tol: float = TIE_TOL) -> np.ndarray:
    """Membership of each treatment vector in the agent-wise extension of the property."""
    opt0, opt1 = agent_optimal(loss_id, P, tol)
    N, m = opt0.shape
    bits = kernels.treatment_bits(m).astype(bool)
    out = np.empty((N, bits.shape[0]), dtype=bool)
    for k, b in enumerate(bits):
        out[:, k] = np.all(np.where(b[None, :], opt1, opt0), axis=1)
    return out


# -- properties ---------------------------------------------------------------


def unregularized_property(loss_id: str, pop: Population, cap: int = DEFAULT_CAP,
                           tol: float = TIE_TOL) -> PropertyValue:
    """Agent-wise argmin of the expected loss, assembled over the population."""
    check_loss(loss_id)
    k = pop.n_outcomes
    _check_cap(k, pop.m, cap)
    per_agent = []
    best_total = 0.0
    for a in pop.agents:
        losses = [expected_loss(loss_id, t, a.dist) for t in range(k)]
        best = min(losses)
        best_total += best
        per_agent.append([t for t, v in enumerate(losses) if v <= best + tol])
    space = tuple(range(k))
    minimizers = frozenset(TreatmentVector(t, space) for t in itertools.product(*per_agent))
    return PropertyValue(minimizers, best_total / pop.m, tol)


def regularized_property(obj: RegularizedObjective, pop: Population, cap: int = DEFAULT_CAP,
                         tol: float = TIE_TOL) -> PropertyValue:
    """Exact argmin of the regularized objective over all of ``T^m``."""
    k = pop.n_outcomes
    _check_cap(k, pop.m, cap)
    if pop.is_binary and _uses_kernel(obj):
        if obj.regularizer == "eeo" and obj.effective_lam > 0:
            # raises on the degenerate sum(p) = 0 population
            objective_value(obj, (0,) * pop.m, pop)
        values = objective_table(obj, pop.group_labels, pop.p1[None, :], cap)[0]
        mask = argmin_mask(values, tol)
        return PropertyValue(_vectors(mask, pop.m), float(values.min()), tol)
    space = tuple(range(k))
    vectors = list(itertools.product(space, repeat=pop.m))
    values = np.array([objective_value(obj, t, pop) for t in vectors])
    best = float(values.min())
    minimizers = frozenset(TreatmentVector(t, space) for t, v in zip(vectors, values) if v <= best + tol)
    return PropertyValue(minimizers, best, tol)


# -- closed forms for m = 2, s = (a, b), 0-1 loss ------------------------------


def dp_levelset_00_membership(p, lam: float) -> bool:
    """Published half-space description of the DP level set of (0, 0).

    Tests ``p1 >= c``, ``p2 >= c`` and ``p1 + p2 <= 1`` with
    ``c = (1 - 3 lam) / (2 (1 - lam))``; at ``lam = 1`` the threshold is taken
    as its limit, minus infinity.  Note that this system disagrees with the
    brute-force (0, 0) cell whenever ``lam < 1/3``; :func:`dp_cell_membership`
    gives the exact cells.
    """
    p1, p2 = float(p[0]), float(p[1])
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError(f"lambda={lam!r} outside [0, 1]")
    if lam == 1.0:
        return p1 + p2 <= 1.0
    c = (1.0 - 3.0 * lam) / (2.0 * (1.0 - lam))
    return p1 >= c and p2 >= c and p1 + p2 <= 1.0


def dp_thresholds(lam: float) -> tuple[float, float]:
    """``(lo, hi)`` = ``((1 - 3 lam) / (2 (1 - lam)), (1 + lam) / (2 (1 - lam)))``."""
    if lam >= 1.0:
        return -np.inf, np.inf
    return (1.0 - 3.0 * lam) / (2.0 * (1.0 - lam)), (1.0 + lam) / (2.0 * (1.0 - lam))


def dp_cell_membership(t, p, lam: float) -> bool:
    """Exact DP level sets for two singleton groups, derived from the four closed-form losses.

    (0,0): p1 <= hi, p2 <= hi, p1 + p2 <= 1
    (1,1): p1 >= lo, p2 >= lo, p1 + p2 >= 1
    (1,0): p1 >= hi, p2 <= lo        (0,1): p2 >= hi, p1 <= lo
    """
    lo, hi = dp_thresholds(lam)
    p1, p2 = float(p[0]), float(p[1])
    t = tuple(t)
    if t == (0, 0):
        return p1 <= hi and p2 <= hi and p1 + p2 <= 1.0
    if t == (1, 1):
        return p1 >= lo and p2 >= lo and p1 + p2 >= 1.0
    if t == (1, 0):
        return p1 >= hi and p2 <= lo
    if t == (0, 1):
        return p2 >= hi and p1 <= lo
    raise ConfigurationError(f"{t} is not a treatment vector for two agents")


# -- checks -------------------------------------------------------------------


def check_equivalence(loss_id: str, obj: RegularizedObjective, groups: Sequence, sampler,
                      max_counterexamples: int | None = None) -> EquivalenceReport:
    """Compare the agent-wise property with the regularized one at every sample."""
    P = np.atleast_2d(np.asarray(sampler, dtype=float))
    m = P.shape[1]
    gamma = unregularized_masks(loss_id, P)
    _, theta = regularized_masks(obj.replace(loss=loss_id), groups, P)
    bad = np.flatnonzero(np.any(gamma != theta, axis=1))
    if max_counterexamples is not None:
        bad = bad[:max_counterexamples]
    cex = [Counterexample(tuple(float(x) for x in P[n]), _vectors(gamma[n], m), _vectors(theta[n], m))
           for n in bad]
    return EquivalenceReport(not cex, cex, P.shape[0])


def check_nonenforcing(regularizer, groups: Sequence, sampler, loss_id: str = "zero-one",
                       tol: float = TIE_TOL) -> bool:
    """True iff every treatment vector minimizes the regularizer at every sample."""
    check_regularizer(regularizer)
    if regularizer == "none":
        return True
    obj = RegularizedObjective(loss_id, regularizer, 1.0)
    values = objective_table(obj, groups, sampler)
    return bool(np.all(values.max(axis=1) - values.min(axis=1) <= tol))


def check_subset_intersection(loss_id: str, obj: RegularizedObjective, t, groups: Sequence,
                              sampler) -> ContainmentReport:
    """Where ``t`` is optimal for both the loss and the regularizer, it must be optimal overall."""
    if not 0.0 < obj.lam < 1.0:
        raise ConfigurationError("subset-intersection is stated for lambda in (0, 1)")
    P = np.atleast_2d(np.asarray(sampler, dtype=float))
    m = P.shape[1]
    k = _index_of(t, m)
    gamma = unregularized_masks(loss_id, P)[:, k]
    h = argmin_mask(objective_table(obj.replace(loss=loss_id, lam=1.0), groups, P))[:, k]
    _, theta = regularized_masks(obj.replace(loss=loss_id), groups, P)
    premise = gamma & h
    bad = np.flatnonzero(premise & ~theta[:, k])
    return ContainmentReport(bad.size == 0, [tuple(P[n]) for n in bad], P.shape[0], int(premise.sum()))


def unfair_vector(groups: Sequence) -> TreatmentVector:
    """Indicator of the first declared group."""
    first = groups[0]
    return TreatmentVector(tuple(1 if g == first else 0 for g in groups))


def check_unfair_optimum_containment(lam: float, sampler, groups: Sequence | None = None,
                                     loss_id: str = "zero-one") -> ContainmentReport:
    """Where treating exactly group a is DP-optimal, it must also be loss-optimal."""
    P = np.atleast_2d(np.asarray(sampler, dtype=float))
    m = P.shape[1]
    if groups is None:
        groups = ["a"] * ((m + 1) // 2) + ["b"] * (m // 2)
    if len(set(groups)) != 2:
        raise ConfigurationError("the unfair-optimum containment needs two groups")
    k = _index_of(unfair_vector(list(groups)), m)
    _, theta = regularized_masks(RegularizedObjective(loss_id, "dp", lam), groups, P)
    gamma = unregularized_masks(loss_id, P)
    premise = theta[:, k]
    bad = np.flatnonzero(premise & ~gamma[:, k])
    return ContainmentReport(bad.size == 0, [tuple(P[n]) for n in bad], P.shape[0], int(premise.sum()))


def bayes_risk(obj: RegularizedObjective, groups: Sequence, P) -> np.ndarray:
    return objective_table(obj, groups, P).min(axis=1)


@dataclass
class ConcavityReport:
    holds: bool
    segments: int
    violations: list = field(default_factory=list)
    worst_gap: float = 0.0


def check_concavity(obj: RegularizedObjective, groups: Sequence, n_segments: int = 200,
                    seed: int = 0, tol: float = TIE_TOL) -> ConcavityReport:
    """Midpoint concavity of the Bayes risk on random segments of ``[0, 1]^m``."""
    rng = np.random.default_rng(seed)
    m = len(groups)
    a = rng.random((n_segments, m))
    b = rng.random((n_segments, m))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ra, rb, rmid = (bayes_risk(obj, groups, x) for x in (a, b, (a + b) / 2))
    gap = (ra + rb) / 2 - rmid  # > 0 means the midpoint lies below the chord
    bad = np.flatnonzero(gap > tol)
    violations = [(tuple(a[i]), tuple(b[i]), float(gap[i])) for i in bad]
    return ConcavityReport(bad.size == 0, n_segments, violations, float(max(gap.max(), 0.0)))


def _index_of(t, m: int) -> int:
    t = tuple(int(x) for x in t)
    if len(t) != m or any(x not in (0, 1) for x in t):
        raise ConfigurationError(f"{t} is not a binary treatment vector of length {m}")
    k = 0
    for x in t:
        k = (k << 1) | x
    return k
