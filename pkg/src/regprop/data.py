"""Synthetic two-group datasets and CSV ingestion with group statistics."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Population
from .errors import DatasetError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupStats:
    group: str
    count: int
    base_rate: float
    share: float


@dataclass(frozen=True)
class SyntheticSpec:
    p_a: float
    p_b: float
    n_samples: int = 2000
    k_noise: int = 3
    seed: int = 0
    group_balance: float = 0.5

    def __post_init__(self) -> None:
        for name in ("p_a", "p_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DatasetError(f"{name}={v} outside [0, 1]")
        if self.n_samples < 1 or self.k_noise < 0:
            raise DatasetError("n_samples must be positive and k_noise nonnegative")
        if not 0.0 < self.group_balance < 1.0:
            raise DatasetError("group_balance must lie in (0, 1)")

    def with_(self, **kw) -> "SyntheticSpec":
        return replace(self, **kw)


@dataclass
class TabularDataset:
    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray  # 0 = group a, 1 = group b
    group_names: tuple = ("a", "b")
    feature_names: tuple = ()
    stats: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.groups = np.asarray(self.groups, dtype=np.int64)
        n = self.labels.size
        if self.features.ndim != 2 or self.features.shape[0] != n or self.groups.size != n:
            raise DatasetError("features, labels and groups disagree on the number of rows")
        if not np.isin(self.labels, (0, 1)).all():
            raise DatasetError("labels must be binary 0/1")
        present = set(np.unique(self.groups).tolist())
        if present != {0, 1}:
            raise DatasetError(f"dataset must contain both groups, found {sorted(present)}")
        if not self.feature_names:
            self.feature_names = tuple(f"x{i}" for i in range(self.features.shape[1]))
        self.stats = compute_group_stats(self.labels, self.groups, self.group_names)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def group_stats(self) -> tuple:
        return tuple(self.stats[g] for g in self.group_names)


def compute_group_stats(labels, groups, names=("a", "b")) -> dict:
    labels = np.asarray(labels)
    groups = np.asarray(groups)
    out = {}
    for gi, name in enumerate(names):
        mk = groups == gi
        count = int(mk.sum())
        out[name] = GroupStats(name, count, float(labels[mk].mean()) if count else math.nan,
                               count / labels.size)
    return out


def generate_synthetic(spec: SyntheticSpec) -> TabularDataset:
    """Draw one dataset.

    Each row is a member of group a with probability ``group_balance``
    (otherwise b), has label ``Bernoulli(p_group)`` and features
    ``(p_a * [a], p_b * [b], r_1..r_k)`` with ``r ~ U[-1, 1]``.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_samples
    groups = (rng.random(n) >= spec.group_balance).astype(np.int64)
    if n >= 2 and groups.min() == groups.max():
        # keep both groups present on tiny draws
        groups[0], groups[-1] = 0, 1
    rates = np.where(groups == 0, spec.p_a, spec.p_b)
    labels = (rng.random(n) < rates).astype(np.int64)
    noise = rng.uniform(-1.0, 1.0, size=(n, spec.k_noise))
    own = np.column_stack([np.where(groups == 0, spec.p_a, 0.0), np.where(groups == 1, spec.p_b, 0.0)])
    features = np.hstack([own, noise])
    names = ("p_a", "p_b") + tuple(f"r{i + 1}" for i in range(spec.k_noise))
    return TabularDataset(features, labels, groups, ("a", "b"), names)


def _standardize(x: np.ndarray) -> np.ndarray:
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    out = np.zeros_like(x)
    nz = sd > 0
    out[:, nz] = (x[:, nz] - mu[nz]) / sd[nz]
    return out


def load_csv(path, label_col: str, group_col: str, threshold: Optional[float] = None,
             feature_cols: Optional[Sequence[str]] = None, standardize: bool = True,
             group_values: Optional[Sequence[str]] = None) -> TabularDataset:
    """Read a headered CSV into a two-group dataset.

    With ``threshold`` the group column is numeric and a row belongs to group
    b iff its value is below the threshold; otherwise the column is
    categorical and its two values map to (a, b) in first-seen order, or in
    the order given by ``group_values``.
    Features default to every other column and are standardized per column.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [r for r in reader if r]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not header:
        raise DatasetError(f"{path}: missing header row")
    header = [h.strip() for h in header]
    for col in (label_col, group_col):
        if col not in header:
            raise DatasetError(f"{path}: no column {col!r} (have {header})")
    if feature_cols is None:
        feature_cols = [h for h in header if h not in (label_col, group_col)]
    missing = [c for c in feature_cols if c not in header]
    if missing:
        raise DatasetError(f"{path}: missing feature columns {missing}")
    col = {h: i for i, h in enumerate(header)}
    if any(len(r) != len(header) for r in rows):
        raise DatasetError(f"{path}: ragged rows")

    try:
        labels = np.array([int(float(r[col[label_col]])) for r in rows])
    except ValueError as exc:
        raise DatasetError(f"{path}: non-numeric label: {exc}") from exc

    raw_groups = [r[col[group_col]].strip() for r in rows]
    if threshold is not None:
        try:
            gvals = np.array([float(v) for v in raw_groups])
        except ValueError as exc:
            raise DatasetError(f"{path}: group column {group_col!r} is not numeric") from exc
        groups = (gvals < threshold).astype(np.int64)
        names = (f"{group_col}>={threshold:g}", f"{group_col}<{threshold:g}")
    else:
        seen = list(dict.fromkeys(raw_groups))
        if group_values is not None:
            stray = set(seen) - set(group_values)
            if stray or len(group_values) != 2:
                raise DatasetError(f"{path}: group values {sorted(stray)} not in {list(group_values)}")
            seen = list(group_values)
        if len(seen) != 2:
            raise DatasetError(f"{path}: group column {group_col!r} has {len(seen)} values, need 2")
        log.info("group mapping for %s: a=%s b=%s", group_col, seen[0], seen[1])
        groups = np.array([seen.index(v) for v in raw_groups], dtype=np.int64)
        names = (seen[0], seen[1])
    if len(set(groups.tolist())) < 2:
        raise DatasetError(f"{path}: only one group present")

    feats = np.empty((len(rows), len(feature_cols)))
    for j, c in enumerate(feature_cols):
        try:
            feats[:, j] = [float(r[col[c]]) for r in rows]
        except ValueError as exc:
            raise DatasetError(f"{path}: non-numeric feature column {c!r}") from exc
    if standardize:
        feats = _standardize(feats)
    return TabularDataset(feats, labels, groups, names, tuple(feature_cols))


def export_csv(ds: TabularDataset, path, label_col: str = "label", group_col: str = "group") -> Path:
    """Write features, label and group name.

    Reload with ``load_csv(..., group_values=ds.group_names)`` to keep the
    a/b assignment when the first row belongs to group b.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.feature_names) + [label_col, group_col])
        for i in range(ds.n):
            w.writerow([repr(float(x)) for x in ds.features[i]] + [int(ds.labels[i]), ds.group_names[ds.groups[i]]])
    return path


def population_from_group_stats(stats) -> Population:
    """Two-agent population of each group's average member."""
    stats = list(stats.values()) if isinstance(stats, dict) else list(stats)
    if len(stats) != 2:
        raise DatasetError(f"need statistics for exactly two groups, got {len(stats)}")
    return Population.binary([s.base_rate for s in stats], [s.group for s in stats])


FIXTURES = {
    "german": dict(file="german_fixture.csv", label_col="credit", group_col="age", threshold=25.0),
    "heart": dict(file="heart_fixture.csv", label_col="target", group_col="sex", threshold=None),
}


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise DatasetError(f"unknown fixture {name!r}; have {sorted(FIXTURES)}")
    return Path(str(resources.files("regprop") / "fixtures" / FIXTURES[name]["file"]))


def load_fixture(name: str) -> TabularDataset:
    """Committed stand-ins matching the published group statistics of the real datasets."""
    spec = FIXTURES.get(name)
    if spec is None:
        raise DatasetError(f"unknown fixture {name!r}; have {sorted(FIXTURES)}")
    return load_csv(fixture_path(name), spec["label_col"], spec["group_col"], spec["threshold"])
