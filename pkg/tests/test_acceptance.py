"""Acceptance criteria, one test each.

Every test prints a ``criterion N: PASS|FAIL`` line in the terminal summary
(or on stdout when run as ``python tests/test_acceptance.py``).  Criteria are
evaluated at their stated tolerances and runtime limits; a red line is a
real result, not a skipped check.
"""

import sys
import time
import warnings

import numpy as np
import pytest

from regprop import cli
from regprop import elicitation as E
from regprop import raster as RS
from regprop import trainer as T
from regprop.core import RegularizedObjective
from regprop.data import SyntheticSpec, generate_synthetic

AB = ("a", "b")
ENFORCING = ("dp", "fpr", "fnr", "eeo", "cal", "bgl")
ALL_REGS = ("none",) + ENFORCING


def _finish(report, n, title, ok, detail, elapsed, limit):
    fast = elapsed < limit
    passed = ok and fast
    report(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {title}  "
           f"[{elapsed:.2f}s / {limit:g}s] {detail}")
    return passed


def _centers(n=201):
    c = (np.arange(n) + 0.5) / n
    return np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1).reshape(-1, 2)


# 1 ---------------------------------------------------------------------------


def criterion_1(report):
    t0 = time.perf_counter()
    P = _centers(201)
    step = 1.0 / 201
    parts, ok = [], True
    for lam in (0.05, 0.1, 0.2, 1 / 3):
        _, mask = E.regularized_masks(RegularizedObjective("zero-one", "dp", lam), AB, P)
        brute = mask[:, 0]
        c = (1 - 3 * lam) / (2 * (1 - lam))
        published = np.array([E.dp_levelset_00_membership(p, lam) for p in P])
        boundary = (np.abs(P[:, 0] - c) <= step) | (np.abs(P[:, 1] - c) <= step) \
            | (np.abs(P.sum(axis=1) - 1) / np.sqrt(2) <= step)
        bad = int(np.sum((brute != published) & ~boundary))
        ok &= bad == 0
        parts.append(f"lambda={lam:.4g}: {bad} mismatches")
    return _finish(report, 1, "DP (0,0) polyhedron", ok, "; ".join(parts), time.perf_counter() - t0, 10)


# 2 ---------------------------------------------------------------------------


def criterion_2(report):
    t0 = time.perf_counter()
    P = _centers(201)
    mode = np.argmax(E.unregularized_masks("zero-one", P), axis=1).reshape(201, 201)
    bad = [reg for reg in ENFORCING if not np.array_equal(RS.rasterize(reg, 0.0, 201).labels, mode)]
    detail = "all six equal the mode partition" if not bad else f"differ: {bad}"
    return _finish(report, 2, "lambda=0 identity", not bad, detail, time.perf_counter() - t0, 5)


# 3 ---------------------------------------------------------------------------


def criterion_3(report):
    t0 = time.perf_counter()
    r = RS.rasterize("dp", 0.95, 201)
    area = RS.cell_area(r, (0, 0)) + RS.cell_area(r, (1, 1))
    return _finish(report, 3, "DP collapse at lambda=0.95", area >= 0.99, f"uniform area {area:.4f}",
                   time.perf_counter() - t0, 5)


# 4 ---------------------------------------------------------------------------


def _mixed_group_batches(n, m, seed):
    rng = np.random.default_rng(seed)
    P = rng.random((n, m))
    batches = {}
    for row in P:
        while True:
            g = tuple(rng.choice(AB, m))
            if len(set(g)) == 2:
                break
        batches.setdefault(g, []).append(row)
    return {g: np.array(rows) for g, rows in batches.items()}


def criterion_4(report):
    t0 = time.perf_counter()
    grid = E.grid(2, 0.02)
    batches = _mixed_group_batches(500, 4, seed=4)
    n_cex = 0
    for reg in ("bgl", "cal"):
        for lam in (0.25, 0.5, 0.75):
            obj = RegularizedObjective("zero-one", reg, lam)
            n_cex += len(E.check_equivalence("zero-one", obj, AB, grid).counterexamples)
            for groups, P in batches.items():
                n_cex += len(E.check_equivalence("zero-one", obj, list(groups), P).counterexamples)
    return _finish(report, 4, "BGL and Cal equivalence", n_cex == 0, f"{n_cex} counterexamples "
                   f"({len(batches)} group patterns)", time.perf_counter() - t0, 60)


# 5 ---------------------------------------------------------------------------


def criterion_5(report):
    t0 = time.perf_counter()
    P = E.default_sampler(2)
    counts = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for reg in ("dp", "fpr", "fnr", "eeo"):
            rep = E.check_equivalence("zero-one", RegularizedObjective("zero-one", reg, 0.3), AB, P)
            counts[reg] = len(rep.counterexamples)
    ok = all(v >= 1 for v in counts.values())
    detail = ", ".join(f"{k}={v}" for k, v in counts.items())
    return _finish(report, 5, "nonequivalence witnesses", ok, detail, time.perf_counter() - t0, 30)


# 6 ---------------------------------------------------------------------------


def criterion_6(report):
    t0 = time.perf_counter()
    P = E.default_sampler(2)
    rng = np.random.default_rng(6)
    violations, checks = 0, 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for i in range(10):
            t = tuple(int(x) for x in rng.integers(0, 2, 2))
            lam = float(rng.uniform(0.01, 0.99))
            reg = ENFORCING[i % len(ENFORCING)]
            rep = E.check_subset_intersection("zero-one", RegularizedObjective("zero-one", reg, lam), t, AB, P)
            violations += len(rep.violations)
            checks += 1
        for reg in ("dp", "fpr", "eeo"):
            rep = E.check_subset_intersection("zero-one", RegularizedObjective("zero-one", reg, 0.4), (0, 0), AB, P)
            violations += len(rep.violations)
            checks += 1
        for lam in (0.1, 0.2):
            rep = E.check_unfair_optimum_containment(lam, P, AB)
            violations += len(rep.violations)
            checks += 1
    return _finish(report, 6, "containments", violations == 0, f"{checks} checks, {violations} violations",
                   time.perf_counter() - t0, 60)


# 7 ---------------------------------------------------------------------------


def criterion_7(report):
    t0 = time.perf_counter()
    failing = {}
    for reg in ALL_REGS:
        rep = E.check_concavity(RegularizedObjective("zero-one", reg, 0.3), AB, n_segments=200, seed=7, tol=1e-9)
        if not rep.holds:
            failing[reg] = (len(rep.violations), rep.worst_gap)
    detail = "all regularizers concave" if not failing else "violations: " + ", ".join(
        f"{k} {n}/200 (gap {g:.3g})" for k, (n, g) in failing.items())
    return _finish(report, 7, "Bayes-risk concavity", not failing, detail, time.perf_counter() - t0, 30)


# 8 ---------------------------------------------------------------------------


def criterion_8(report):
    t0 = time.perf_counter()
    ds = generate_synthetic(SyntheticSpec(0.3, 0.7, n_samples=300, seed=8))
    X, y, g = ds.features, ds.labels.astype(float), ds.groups
    rng = np.random.default_rng(8)
    worst = 0.0
    for reg in T.EXPERIMENT_REGULARIZERS:
        done = 0
        while done < 20:
            theta = rng.normal(0, 1, X.shape[1] + 1)
            lam = float(rng.uniform(0.1, 0.9))
            _, grad, parts = T.objective_and_grad(theta, X, y, g, lam, reg)
            if reg != "none" and parts["regularizer"] < 1e-6:
                continue
            h = 1e-5
            num = np.array([
                (T.objective_and_grad(theta + h * e, X, y, g, lam, reg)[0]
                 - T.objective_and_grad(theta - h * e, X, y, g, lam, reg)[0]) / (2 * h)
                for e in np.eye(theta.size)])
            err = np.linalg.norm(grad - num) / max(np.linalg.norm(grad), np.linalg.norm(num), 1e-12)
            worst = max(worst, err)
            done += 1
    return _finish(report, 8, "gradient checks", worst <= 1e-4, f"worst relative error {worst:.2e}",
                   time.perf_counter() - t0, 10)


# 9 ---------------------------------------------------------------------------


def criterion_9(report, jobs=1):
    t0 = time.perf_counter()
    cfg = T.TrainConfig(lam=0.15, epochs=1500, trials=10)
    grid = [0.1, 0.3, 0.55, 0.65]
    rows = T.run_experiment(cfg, SyntheticSpec(0.3, 0.5, n_samples=2000), pb_grid=grid,
                            regularizers=["none", "dp"], jobs=jobs)
    s = T.summarize(rows)
    ok, parts = True, []
    for pb in grid:
        a, b = s[("none", 0.15, pb)], s[("dp", 0.15, pb)]
        se = float(np.hypot(a.stderr("dp"), b.stderr("dp")))
        diff = a.dp_violation - b.dp_violation
        if pb > 0.5:
            good = diff >= 2 * se and diff > 0
        else:
            good = abs(diff) <= 2 * se
        ok &= good
        parts.append(f"pb={pb}: none {a.dp_violation:.3f} dp {b.dp_violation:.3f} se {se:.3f} "
                     f"{'ok' if good else 'miss'}")
    return _finish(report, 9, "synthetic sweep", ok, "; ".join(parts), time.perf_counter() - t0, 900)


# 10 --------------------------------------------------------------------------


def _stats_rows(fixture, out_dir, extra=()):
    import csv
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        code = cli.main(["stats", "--fixture", fixture, "--out-dir", str(out_dir), *extra])
    assert code == 0
    with open(out_dir / "stats.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def criterion_10(report, tmp):
    t0 = time.perf_counter()
    german = _stats_rows("german", tmp / "german")
    german_ok = len(german) == 28 and all(r["uniform"] == "1" for r in german)
    heart = _stats_rows("heart", tmp / "heart", ["--reg", "dp", "--lambda", "0.1"])
    heart_row = heart[0]
    heart_ok = heart_row["uniform"] == "0"
    detail = (f"German ({float(german[0]['p_a']):.3f}, {float(german[0]['p_b']):.3f}) uniform at all "
              f"{len(german)} points: {german_ok}; heart ({float(heart_row['p_a']):.3f}, "
              f"{float(heart_row['p_b']):.3f}) dp lambda=0.1 label {heart_row['label']}, non-uniform: {heart_ok}")
    return _finish(report, 10, "diagram placement", german_ok and heart_ok, detail, time.perf_counter() - t0, 10)


# -- pytest wrappers ----------------------------------------------------------


def test_criterion_1_dp_polyhedron(acceptance_report):
    assert criterion_1(acceptance_report)


def test_criterion_2_lambda_zero_identity(acceptance_report):
    assert criterion_2(acceptance_report)


def test_criterion_3_dp_collapse(acceptance_report):
    assert criterion_3(acceptance_report)


def test_criterion_4_bgl_cal_equivalence(acceptance_report):
    assert criterion_4(acceptance_report)


def test_criterion_5_nonequivalence(acceptance_report):
    assert criterion_5(acceptance_report)


def test_criterion_6_containments(acceptance_report):
    assert criterion_6(acceptance_report)


def test_criterion_7_concavity(acceptance_report):
    assert criterion_7(acceptance_report)


def test_criterion_8_gradients(acceptance_report):
    assert criterion_8(acceptance_report)


@pytest.mark.slow
def test_criterion_9_synthetic_sweep(acceptance_report):
    assert criterion_9(acceptance_report)


def test_criterion_10_diagram_placement(acceptance_report, tmp_path):
    assert criterion_10(acceptance_report, tmp_path)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    results = []
    for fn in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
               criterion_6, criterion_7, criterion_8, criterion_9):
        results.append(fn(print))
    with tempfile.TemporaryDirectory() as d:
        results.append(criterion_10(print, Path(d)))
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
