"""Linear classifiers trained on BCE plus a weighted soft fairness regularizer.

The training objective for parameters ``(w, b)`` with scores
``s = sigmoid(X w + b)`` is::

    (1 - lam) * BCE(s, y) + lam * soft_surrogate(reg, s, y, groups)

minimized by gradient descent with analytic gradients.  Evaluation
thresholds the scores at 1/2 and plugs the hard decisions and observed
labels into the hard regularizer formulas.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import regularizers as R
from .core import check_regularizer
from .data import SyntheticSpec, TabularDataset, generate_synthetic
from .errors import ConfigurationError, TrainingDivergedError

METRICS = ("dp", "fpr", "fnr", "eeo")
EXPERIMENT_REGULARIZERS = ("none", "dp", "fpr", "fnr", "eeo")
RESULT_COLUMNS = ("regularizer", "lambda", "grid_value", "trial", "accuracy") + METRICS


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float = 0.0

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    ``learning_rate`` is a per-sample step: full-batch descent moves by
    ``learning_rate * n`` times the mean gradient, the same total step as
    one epoch of per-sample SGD.
    """

    lam: float = 0.0
    regularizer: str = "none"
    learning_rate: float = 0.001
    epochs: int = 1500
    trials: int = 10
    full_batch: bool = True
    batch_size: int = 64
    seed: int = 0
    init_scale: float = 0.01

    def __post_init__(self) -> None:
        check_regularizer(self.regularizer)
        if callable(self.regularizer):
            raise ConfigurationError("training needs a built-in regularizer id")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigurationError(f"lambda={self.lam} outside [0, 1]")
        if self.learning_rate <= 0 or self.epochs < 1 or self.trials < 1 or self.batch_size < 1:
            raise ConfigurationError("learning_rate, epochs, trials and batch_size must be positive")

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


def objective_and_grad(theta: np.ndarray, X: np.ndarray, y: np.ndarray, groups: np.ndarray,
                       lam: float, regularizer: str) -> tuple[float, np.ndarray, dict]:
    """Objective value, gradient w.r.t. ``theta = (w, b)`` and the value parts."""
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    s = sigmoid(z)
    n = y.size
    bce = float(np.mean(np.logaddexp(0.0, z) - y * z))
    lam = 0.0 if regularizer == "none" else lam
    g_z = (1.0 - lam) * (s - y) / n
    reg = 0.0
    if lam > 0.0:
        reg = R.soft_value_indexed(regularizer, s, y, groups, 2)
        g_z = g_z + lam * R.soft_grad_indexed(regularizer, s, y, groups, 2) * s * (1.0 - s)
    grad = np.empty_like(theta)
    grad[:-1] = X.T @ g_z
    grad[-1] = g_z.sum()
    value = (1.0 - lam) * bce + lam * reg
    return value, grad, {"bce": bce, "regularizer": reg}


def train(dataset: TabularDataset, config: TrainConfig, seed: Optional[int] = None) -> LinearModel:
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    X, y, g = dataset.features, dataset.labels.astype(float), dataset.groups
    theta = np.zeros(X.shape[1] + 1)
    theta[:-1] = rng.normal(0.0, config.init_scale, X.shape[1])
    n = y.size
    for epoch in range(config.epochs):
        if config.full_batch:
            batches = (slice(None),)
        else:
            order = rng.permutation(n)
            batches = [order[i:i + config.batch_size] for i in range(0, n, config.batch_size)]
        for idx in batches:
            Xb, yb, gb = X[idx], y[idx], g[idx]
            if not config.full_batch and len(np.unique(gb)) < 2 and config.regularizer in METRICS:
                continue
            with np.errstate(over="ignore", invalid="ignore"):
                value, grad, parts = objective_and_grad(theta, Xb, yb, gb, config.lam, config.regularizer)
            if not (math.isfinite(value) and np.all(np.isfinite(grad))):
                raise TrainingDivergedError(
                    f"non-finite objective at epoch {epoch}: bce={parts['bce']!r} "
                    f"regularizer={parts['regularizer']!r}"
                )
            theta -= config.learning_rate * yb.size * grad
    return LinearModel(theta[:-1].copy(), float(theta[-1]))


@dataclass
class EvalReport:
    accuracy: float
    dp_violation: float
    fpr_violation: float
    fnr_violation: float
    eeo_violation: float
    per_trial: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.per_trial:
            self.per_trial = {k: [v] for k, v in self.metrics().items()}

    def metrics(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "dp": self.dp_violation,
            "fpr": self.fpr_violation,
            "fnr": self.fnr_violation,
            "eeo": self.eeo_violation,
        }

    def stderr(self, metric: str) -> float:
        vals = np.asarray(self.per_trial[metric], dtype=float)
        return float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0

    @classmethod
    def aggregate(cls, reports: Sequence["EvalReport"]) -> "EvalReport":
        per = {k: [r.metrics()[k] for r in reports] for k in ("accuracy",) + METRICS}
        mean = {k: float(np.mean(v)) for k, v in per.items()}
        return cls(mean["accuracy"], mean["dp"], mean["fpr"], mean["fnr"], mean["eeo"], per)


def hard_violations(pred, labels, groups) -> dict:
    """Hard regularizer values with decisions in the treatment slots and labels in the p slots."""
    t = np.asarray(pred, dtype=float)
    y = np.asarray(labels, dtype=float)
    gidx = np.asarray(groups, dtype=np.int64)
    return {m: R._value(m, t, y, gidx, 2, None, strict=False) for m in METRICS}


def evaluate(model: LinearModel, dataset: TabularDataset) -> EvalReport:
    pred = model.predict(dataset.features)
    v = hard_violations(pred, dataset.labels, dataset.groups)
    acc = float(np.mean(pred == dataset.labels))
    return EvalReport(acc, v["dp"], v["fpr"], v["fnr"], v["eeo"])


# -- experiments --------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    regularizer: str
    lam: float
    grid_value: float
    trial: int
    accuracy: float
    dp: float
    fpr: float
    fnr: float
    eeo: float

    def as_csv(self) -> list:
        return [self.regularizer, repr(self.lam), repr(self.grid_value), self.trial,
                repr(self.accuracy), repr(self.dp), repr(self.fpr), repr(self.fnr), repr(self.eeo)]


def _run_task(task) -> ResultRow:
    config, dataset, grid_value, trial = task
    if isinstance(dataset, SyntheticSpec):
        dataset = generate_synthetic(dataset.with_(seed=dataset.seed + trial))
    model = train(dataset, config, seed=config.seed + trial)
    rep = evaluate(model, dataset)
    return ResultRow(config.regularizer, config.lam, grid_value, trial, rep.accuracy,
                     rep.dp_violation, rep.fpr_violation, rep.fnr_violation, rep.eeo_violation)


def run_experiment(config: TrainConfig, dataset: Union[SyntheticSpec, TabularDataset],
                   lambda_grid: Optional[Sequence[float]] = None,
                   pb_grid: Optional[Sequence[float]] = None,
                   regularizers: Sequence[str] = EXPERIMENT_REGULARIZERS,
                   jobs: Optional[int] = 1) -> list[ResultRow]:
    """Sweep either ``lambda`` or the group-b base rate, training every regularizer per point.

    A synthetic spec is redrawn per trial with seed ``spec.seed + trial``;
    models are initialized with ``config.seed + trial``.  ``grid_value`` is
    the swept quantity (the lambda itself for lambda sweeps).
    """
    if (lambda_grid is None) == (pb_grid is None):
        raise ConfigurationError("give exactly one of lambda_grid and pb_grid")
    tasks = []
    if pb_grid is not None:
        if not isinstance(dataset, SyntheticSpec):
            raise ConfigurationError("a p_b sweep needs a synthetic dataset spec")
        for pb in pb_grid:
            for reg in regularizers:
                for trial in range(config.trials):
                    tasks.append((config.with_(regularizer=reg), dataset.with_(p_b=float(pb)), float(pb), trial))
    else:
        for lam in lambda_grid:
            for reg in regularizers:
                for trial in range(config.trials):
                    tasks.append((config.with_(regularizer=reg, lam=float(lam)), dataset, float(lam), trial))
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def summarize(rows: Sequence[ResultRow]) -> dict:
    """Aggregate reports keyed by ``(regularizer, lambda, grid_value)``."""
    buckets: dict = {}
    for r in rows:
        buckets.setdefault((r.regularizer, r.lam, r.grid_value), []).append(
            EvalReport(r.accuracy, r.dp, r.fpr, r.fnr, r.eeo))
    return {k: EvalReport.aggregate(v) for k, v in buckets.items()}


def write_results_csv(rows: Sequence[ResultRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())
    return path


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)
