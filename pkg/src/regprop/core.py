"""Domain types and evaluation of the regularized population objective.

A population is an ordered list of agents, each carrying a group label and a
distribution over a finite outcome set.  The objective of a treatment vector
mixes the mean per-agent expected loss with a regularizer term::

    value(t) = (1 - lam) * mean_i L(t_i; p_i) + lam * R(t; s; p)
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import InitVar, dataclass, field
from typing import Callable, Hashable, Iterable, Sequence, Union

import numpy as np

from .errors import ConfigurationError, InvalidDistributionError

LOSSES = ("zero-one", "squared")
REGULARIZERS = ("none", "dp", "fpr", "fnr", "eeo", "cal", "bgl")

PROB_TOL = 1e-12
TIE_TOL = 1e-9

Group = Hashable


def check_loss(loss_id: str) -> str:
    if loss_id not in LOSSES:
        raise ConfigurationError(f"unknown loss id {loss_id!r}; expected one of {LOSSES}")
    return loss_id


def check_regularizer(reg) -> Union[str, Callable]:
    if callable(reg):
        return reg
    if reg not in REGULARIZERS:
        raise ConfigurationError(
            f"unknown regularizer id {reg!r}; expected one of {REGULARIZERS}"
        )
    return reg


@dataclass(frozen=True)
class OutcomeDistribution:
    """A point of the simplex over outcomes ``0..k-1``.

    Validation is strict; pass ``normalize=True`` to rescale nonnegative
    weights instead.
    """

    probs: tuple
    normalize: InitVar[bool] = False

    def __post_init__(self, normalize: bool) -> None:
        probs = tuple(float(x) for x in self.probs)
        if len(probs) < 2:
            raise InvalidDistributionError("need at least two outcomes")
        if any(not math.isfinite(x) or x < 0.0 for x in probs):
            raise InvalidDistributionError(f"negative or non-finite entry in {probs}")
        total = math.fsum(probs)
        if normalize:
            if total <= 0.0:
                raise InvalidDistributionError("cannot normalize all-zero weights")
            probs = tuple(x / total for x in probs)
        elif abs(total - 1.0) > PROB_TOL:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def binary(cls, p1: float) -> "OutcomeDistribution":
        p1 = float(p1)
        if not 0.0 <= p1 <= 1.0:
            raise InvalidDistributionError(f"p1={p1!r} outside [0, 1]")
        return cls((1.0 - p1, p1))

    @property
    def k(self) -> int:
        return len(self.probs)

    @property
    def p1(self) -> float:
        if len(self.probs) != 2:
            raise InvalidDistributionError("p1 is defined only for binary outcomes")
        return self.probs[1]


@dataclass(frozen=True)
class Agent:
    group: Group
    dist: OutcomeDistribution


@dataclass(frozen=True)
class Population:
    """Ordered agents plus the declared group set (first-seen order by default)."""

    agents: tuple
    groups: tuple = None

    def __post_init__(self) -> None:
        agents = tuple(self.agents)
        if not agents:
            raise ConfigurationError("a population needs at least one agent")
        seen = list(dict.fromkeys(a.group for a in agents))
        groups = tuple(seen) if self.groups is None else tuple(self.groups)
        if len(set(groups)) != len(groups):
            raise ConfigurationError(f"duplicate declared groups {groups}")
        stray = set(seen) - set(groups)
        if stray:
            raise ConfigurationError(f"agents reference undeclared groups {sorted(map(str, stray))}")
        empty = [g for g in groups if g not in seen]
        if empty:
            raise ConfigurationError(f"declared groups with no members: {empty}")
        if len({a.dist.k for a in agents}) != 1:
            raise InvalidDistributionError("all agents must share one outcome space")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "groups", groups)

    @classmethod
    def binary(cls, p1: Iterable[float], groups: Sequence[Group], declared=None) -> "Population":
        p1 = list(p1)
        groups = list(groups)
        if len(p1) != len(groups):
            raise ConfigurationError("p1 and groups must have equal length")
        agents = tuple(Agent(g, OutcomeDistribution.binary(p)) for g, p in zip(groups, p1))
        return cls(agents, declared)

    @property
    def m(self) -> int:
        return len(self.agents)

    @property
    def n_outcomes(self) -> int:
        return self.agents[0].dist.k

    @property
    def is_binary(self) -> bool:
        return self.n_outcomes == 2

    @property
    def p1(self) -> np.ndarray:
        return np.array([a.dist.p1 for a in self.agents], dtype=float)

    @property
    def group_labels(self) -> tuple:
        return tuple(a.group for a in self.agents)

    @property
    def group_index(self) -> np.ndarray:
        pos = {g: i for i, g in enumerate(self.groups)}
        return np.array([pos[a.group] for a in self.agents], dtype=np.int64)

    def count(self, group: Group) -> int:
        return sum(1 for a in self.agents if a.group == group)

    def with_p1(self, p1: Iterable[float]) -> "Population":
        """Same groups, new binary distributions."""
        return Population.binary(p1, self.group_labels, self.groups)


@dataclass(frozen=True, order=True)
class TreatmentVector:
    treatments: tuple
    treatment_space: tuple = field(default=(0, 1), compare=False)

    def __post_init__(self) -> None:
        t = tuple(int(x) for x in self.treatments)
        bad = [x for x in t if x not in self.treatment_space]
        if bad:
            raise ConfigurationError(f"treatments {bad} not in {self.treatment_space}")
        object.__setattr__(self, "treatments", t)

    def __iter__(self):
        return iter(self.treatments)

    def __len__(self) -> int:
        return len(self.treatments)

    def __getitem__(self, i):
        return self.treatments[i]

    def complement(self) -> "TreatmentVector":
        return TreatmentVector(tuple(1 - x for x in self.treatments), self.treatment_space)

    def __repr__(self) -> str:
        return "(" + ",".join(map(str, self.treatments)) + ")"


def as_treatment(t, treatment_space=(0, 1)) -> TreatmentVector:
    if isinstance(t, TreatmentVector):
        return t
    return TreatmentVector(tuple(t), treatment_space)


@dataclass(frozen=True)
class RegularizedObjective:
    """Base loss, regularizer (id or callable ``R(t, pop)``) and weight ``lam``.

    With regularizer ``none`` the objective is the plain mean loss whatever
    ``lam`` says.
    """

    loss: str = "zero-one"
    regularizer: Union[str, Callable] = "none"
    lam: float = 0.0

    def __post_init__(self) -> None:
        check_loss(self.loss)
        check_regularizer(self.regularizer)
        lam = float(self.lam)
        if not 0.0 <= lam <= 1.0:
            raise ConfigurationError(f"lambda={lam!r} outside [0, 1]")
        object.__setattr__(self, "lam", lam)

    @property
    def effective_lam(self) -> float:
        return 0.0 if self.regularizer == "none" else self.lam

    def replace(self, **kw) -> "RegularizedObjective":
        fields = {"loss": self.loss, "regularizer": self.regularizer, "lam": self.lam}
        fields.update(kw)
        return RegularizedObjective(**fields)


def expected_loss(loss_id: str, t: int, p: OutcomeDistribution) -> float:
    """Expected loss of treatment ``t`` when the outcome is drawn from ``p``.

    Treatments and outcomes share the index set ``0..k-1``.
    """
    check_loss(loss_id)
    t = int(t)
    if not 0 <= t < p.k:
        raise ConfigurationError(f"treatment {t} outside 0..{p.k - 1}")
    if loss_id == "zero-one":
        return math.fsum(py for y, py in enumerate(p.probs) if y != t)
    return math.fsum(py * (t - y) ** 2 for y, py in enumerate(p.probs))


def mean_loss(loss_id: str, t: TreatmentVector, pop: Population) -> float:
    return math.fsum(expected_loss(loss_id, ti, a.dist) for ti, a in zip(t, pop.agents)) / pop.m


def objective_value(obj: RegularizedObjective, t, pop: Population, *, strict: bool = True) -> float:
    """Evaluate the regularized objective of treatment vector ``t`` on ``pop``."""
    from .regularizers import evaluate

    t = as_treatment(t, tuple(range(pop.n_outcomes)))
    if len(t) != pop.m:
        raise ConfigurationError(f"treatment vector has length {len(t)}, population has {pop.m}")
    lam = obj.effective_lam
    base = mean_loss(obj.loss, t, pop)
    if lam == 0.0:
        return base
    reg = evaluate(obj.regularizer, t, pop, loss_id=obj.loss, strict=strict)
    return (1.0 - lam) * base + lam * reg


def population_to_csv(pop: Population) -> str:
    """Binary population as CSV text with header ``group,p1``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group", "p1"])
    for a in pop.agents:
        w.writerow([a.group, repr(a.dist.p1)])
    return buf.getvalue()


def population_from_csv(text: str) -> Population:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["group", "p1"]:
        raise ConfigurationError("population CSV needs the header group,p1")
    body = [r for r in rows[1:] if r]
    try:
        p1 = [float(r[1]) for r in body]
    except (ValueError, IndexError) as exc:
        raise InvalidDistributionError(f"bad p1 value: {exc}") from exc
    return Population.binary(p1, [r[0].strip() for r in body])
