"""Command-line entry point: ``regprop <subcommand> ...``.

Exit codes: 0 success, 1 I/O or dataset failure, 2 usage error,
3 property counterexample or invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import data as D
from . import elicitation as E
from . import raster as RS
from . import trainer as T
from .core import REGULARIZERS, RegularizedObjective, TreatmentVector
from .errors import ConfigurationError, DatasetError, EnumerationLimitError, RegPropError

log = logging.getLogger("regprop")

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2, 3
DEFAULT_LAMBDAS = (0.0, 0.1, 0.2, 1.0 / 3.0, 0.5, 0.75, 0.95)
SWEEP_PB_LAMBDA = 0.15
DEFAULT_PB_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))
STATS_REGULARIZERS = ("dp", "fpr", "fnr", "eeo")
SUITES = ("subset", "containment", "nonenforcing", "concavity")
ENFORCING = tuple(r for r in REGULARIZERS if r != "none")
MANIFEST = "manifest.jsonl"


class UsageError(RegPropError):
    """Bad flag combination or config value; exit code 2."""


# -- config -------------------------------------------------------------------


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: Optional[str], overrides: Sequence[str] = ()) -> dict:
    cfg = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DatasetError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        cfg.update(parse_config_text(text, path))
    cfg.update(parse_config_text("\n".join(overrides), "--set"))
    return cfg


def _floats(v: str) -> list:
    try:
        return [float(x) for x in v.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"expected a list of numbers, got {v!r}") from exc


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {v!r}")


_SPEC_KEYS = ("p_a", "p_b", "n_samples", "k_noise", "group_balance")


def train_config_from(cfg: dict) -> T.TrainConfig:
    kw = {}
    casts = {"lam": float, "learning_rate": float, "init_scale": float, "epochs": int,
             "trials": int, "batch_size": int, "seed": int, "regularizer": str, "full_batch": _bool}
    for k, cast in casts.items():
        if k in cfg:
            try:
                kw[k] = cast(cfg[k])
            except ValueError as exc:
                raise UsageError(f"bad value for {k}: {cfg[k]!r}") from exc
    try:
        return T.TrainConfig(**kw)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from exc


def dataset_from(cfg: dict, seed: int):
    """A ``SyntheticSpec`` (default) or a loaded ``TabularDataset``."""
    src = cfg.get("dataset", "synthetic")
    if src == "synthetic":
        kw = dict(p_a=0.3, p_b=0.5)
        for k in _SPEC_KEYS:
            if k in cfg:
                kw[k] = int(cfg[k]) if k in ("n_samples", "k_noise") else float(cfg[k])
        return D.SyntheticSpec(seed=seed, **kw)
    if src.startswith("fixture:"):
        return D.load_fixture(src.split(":", 1)[1])
    for k in ("label_col", "group_col"):
        if k not in cfg:
            raise UsageError(f"dataset {src} needs {k}")
    thr = float(cfg["threshold"]) if cfg.get("threshold") else None
    return D.load_csv(src, cfg["label_col"], cfg["group_col"], thr)


# -- output helpers -----------------------------------------------------------


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    return out


def write_manifest(out: Path, records: Sequence[dict]) -> Path:
    path = out / MANIFEST
    with path.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def _fmt_lam(lam: float) -> str:
    return f"{lam:.6g}"


# -- levelset -----------------------------------------------------------------


def cmd_levelset(args) -> int:
    out = _out_dir(args.out_dir)
    records = []
    for lam in args.lam:
        r = RS.rasterize(args.reg, lam, args.res, args.loss)
        path = RS.export_raster(r, out / RS.raster_filename(args.reg, lam, args.res, args.format), args.format)
        areas = RS.cell_areas(r)
        records.append({"file": path.name, "regularizer": args.reg, "lambda": lam,
                        "resolution": args.res, "format": args.format, "cell_areas": areas,
                        "tie_fraction": float(r.tie_mask.mean())})
        print(f"{path.name}: " + " ".join(f"{k}={v:.4f}" for k, v in areas.items()))
    write_manifest(out, records)
    return EXIT_OK


# -- equiv --------------------------------------------------------------------


def _groups_for(m: int) -> list:
    return ["a"] * ((m + 1) // 2) + ["b"] * (m // 2)


def cmd_equiv(args) -> int:
    if args.m < 2:
        raise UsageError("--m must be at least 2")
    groups = _groups_for(args.m)
    P = E.default_sampler(args.m, args.grid_step, args.samples, args.seed)
    rep = E.check_equivalence(args.loss, RegularizedObjective(args.loss, args.reg, args.lam), groups, P)
    print(f"# reg={args.reg} lambda={_fmt_lam(args.lam)} m={args.m} groups={''.join(groups)}")
    print(rep.to_text())
    return EXIT_OK if rep.equivalent else EXIT_VIOLATION


# -- check --------------------------------------------------------------------


@dataclass
class SuiteResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.suite}: {self.name}" + (f" ({self.detail})" if self.detail else "")


def _reg_name(reg) -> str:
    return reg if isinstance(reg, str) else getattr(reg, "__name__", "custom")


def _suite_subset(regs, sampler, groups) -> list:
    res = []
    for reg in regs:
        for lam in (0.1, 0.4, 0.7):
            for t in E.kernels.treatment_bits(len(groups)).astype(int):
                obj = RegularizedObjective("zero-one", reg, lam)
                rep = E.check_subset_intersection("zero-one", obj, tuple(t), groups, sampler)
                res.append(SuiteResult("subset", f"{_reg_name(reg)} lambda={lam:g} t={TreatmentVector(tuple(t))!r}",
                                       rep.holds, f"{len(rep.violations)} violations, {rep.premise_hits} premise hits"))
    return res


def _suite_containment(regs, sampler, groups) -> list:
    res = []
    if "dp" not in regs:
        return res
    for lam in (0.1, 0.2, 1.0 / 3.0, 0.5, 0.9):
        rep = E.check_unfair_optimum_containment(lam, sampler, groups)
        res.append(SuiteResult("containment", f"dp lambda={_fmt_lam(lam)} t=1_a", rep.holds,
                               f"{len(rep.violations)} violations, {rep.premise_hits} premise hits"))
    return res


def _suite_nonenforcing(regs, sampler, groups) -> list:
    res = []
    for reg in regs:
        ne = E.check_nonenforcing(reg, groups, sampler)
        res.append(SuiteResult("nonenforcing", f"{_reg_name(reg)} is enforcing", not ne,
                               "nonenforcing" if ne else "enforcing"))
    return res


def _suite_concavity(regs, sampler, groups, seed=0) -> list:
    res = []
    for reg in regs:
        for lam in (0.3, 0.7):
            rep = E.check_concavity(RegularizedObjective("zero-one", reg, lam), groups, 200, seed)
            res.append(SuiteResult("concavity", f"{_reg_name(reg)} lambda={lam:g}", rep.holds,
                                   f"{len(rep.violations)}/{rep.segments} segments, worst gap {rep.worst_gap:.3g}"))
    return res


_SUITE_FUNCS = {"subset": _suite_subset, "containment": _suite_containment,
                "nonenforcing": _suite_nonenforcing, "concavity": _suite_concavity}


def run_suites(suites: Sequence[str], regularizers: Sequence = ENFORCING, m: int = 2,
               seed: int = 0) -> list:
    """Run invariant suites; ``regularizers`` may include callables ``R(t, pop)``."""
    groups = _groups_for(m)
    sampler = E.default_sampler(m, seed=seed)
    results = []
    with warnings.catch_warnings():
        # EEO's sum(p) = 0 corner of the grid is handled leniently
        warnings.simplefilter("ignore", RuntimeWarning)
        for s in suites:
            if s not in _SUITE_FUNCS:
                raise UsageError(f"unknown suite {s!r}")
            results.extend(_SUITE_FUNCS[s](list(regularizers), sampler, groups))
    return results


def cmd_check(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    regs = args.reg or ENFORCING
    results = run_suites(suites, regs, args.m, args.seed)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VIOLATION if failed else EXIT_OK


# -- train / sweep ------------------------------------------------------------


def _print_summary(rows) -> None:
    print("regularizer,lambda,grid_value,accuracy,dp,dp_se,fpr,fnr,eeo")
    for (reg, lam, gv), rep in sorted(T.summarize(rows).items()):
        m = rep.metrics()
        print(f"{reg},{_fmt_lam(lam)},{_fmt_lam(gv)},{m['accuracy']:.4f},{m['dp']:.4f},"
              f"{rep.stderr('dp'):.4f},{m['fpr']:.4f},{m['fnr']:.4f},{m['eeo']:.4f}")


def _experiment_config(args) -> tuple:
    cfg = load_config(args.config, args.set or ())
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    tc = train_config_from(cfg)
    ds = dataset_from(cfg, tc.seed)
    return cfg, tc, ds


def _emit(out: Path, name: str, rows, extra: dict) -> int:
    path = T.write_results_csv(rows, out / name)
    write_manifest(out, [dict(file=path.name, rows=len(rows), **extra)])
    _print_summary(rows)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg, tc, ds = _experiment_config(args)
    out = _out_dir(args.out_dir)
    rows = T.run_experiment(tc, ds, lambda_grid=[tc.lam], regularizers=[tc.regularizer], jobs=args.jobs)
    return _emit(out, "train.csv", rows, {"config": T.config_dict(tc), "dataset": cfg.get("dataset", "synthetic")})


def cmd_sweep(args) -> int:
    cfg, tc, ds = _experiment_config(args)
    out = _out_dir(args.out_dir)
    kind = cfg.get("sweep", "pb")
    if kind == "pb" and "lam" not in cfg:
        tc = tc.with_(lam=SWEEP_PB_LAMBDA)
    regs = cfg.get("regularizers", " ".join(T.EXPERIMENT_REGULARIZERS)).replace(",", " ").split()
    if kind == "pb":
        grid = _floats(cfg["pb_grid"]) if "pb_grid" in cfg else list(DEFAULT_PB_GRID)
        if not isinstance(ds, D.SyntheticSpec):
            raise UsageError("a pb sweep needs dataset=synthetic")
        rows = T.run_experiment(tc, ds, pb_grid=grid, regularizers=regs, jobs=args.jobs)
    elif kind == "lambda":
        grid = _floats(cfg["lambda_grid"]) if "lambda_grid" in cfg else list(DEFAULT_LAMBDAS)
        rows = T.run_experiment(tc, ds, lambda_grid=grid, regularizers=regs, jobs=args.jobs)
    else:
        raise UsageError(f"sweep must be pb or lambda, got {kind!r}")
    return _emit(out, "sweep.csv", rows, {"sweep": kind, "grid": grid, "regularizers": regs,
                                          "config": T.config_dict(tc),
                                          "dataset": cfg.get("dataset", "synthetic")})


# -- stats --------------------------------------------------------------------


@dataclass(frozen=True)
class Placement:
    regularizer: str
    lam: float
    p: tuple
    minimizers: frozenset
    canonical: TreatmentVector

    @property
    def uniform(self) -> bool:
        return len(set(self.canonical)) == 1

    def as_csv(self) -> list:
        return [self.regularizer, repr(self.lam), repr(self.p[0]), repr(self.p[1]),
                "".join(map(str, self.canonical)), int(self.uniform), len(self.minimizers)]


def diagram_placements(p, regularizers=STATS_REGULARIZERS, lambdas=DEFAULT_LAMBDAS) -> list:
    """Cell of the two-agent population ``p = (p_a, p_b)`` for each regularizer and lambda."""
    from .core import Population
    pop = Population.binary(p, RS.GROUPS)
    out = []
    for reg in regularizers:
        for lam in lambdas:
            pv = E.regularized_property(RegularizedObjective("zero-one", reg, lam), pop)
            out.append(Placement(reg, float(lam), tuple(float(x) for x in p), pv.minimizers, pv.canonical))
    return out


def _stats_dataset(args):
    if args.fixture:
        return D.load_fixture(args.fixture)
    if not (args.data and args.label_col and args.group_col):
        raise UsageError("stats needs --fixture or --data with --label-col and --group-col")
    return D.load_csv(args.data, args.label_col, args.group_col, args.threshold)


def cmd_stats(args) -> int:
    ds = _stats_dataset(args)
    out = _out_dir(args.out_dir)
    for gs in ds.group_stats:
        print(f"group {gs.group}: n={gs.count} share={gs.share:.4f} base_rate={gs.base_rate:.5f}")
    p = tuple(gs.base_rate for gs in ds.group_stats)
    lambdas = args.lam if args.lam else DEFAULT_LAMBDAS
    places = diagram_placements(p, args.reg or STATS_REGULARIZERS, lambdas)
    print(f"placement of (p_a, p_b) = ({p[0]:.5f}, {p[1]:.5f})")
    for pl in places:
        kind = "uniform" if pl.uniform else "non-uniform"
        print(f"  {pl.regularizer:>3} lambda={_fmt_lam(pl.lam):<8} {pl.canonical!r} {kind}")
    path = out / "stats.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["regularizer", "lambda", "p_a", "p_b", "label", "uniform", "n_minimizers"])
        for pl in places:
            w.writerow(pl.as_csv())
    groups = [dict(group=g.group, count=g.count, share=g.share, base_rate=g.base_rate) for g in ds.group_stats]
    write_manifest(out, [{"file": path.name, "groups": groups}])
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _unit_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from exc
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} outside [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regprop", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default="out")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=None, help="worker cap (default: all CPUs)")

    p = sub.add_parser("levelset", parents=[common], help="rasterize the m=2 level sets")
    p.add_argument("--reg", required=True, choices=REGULARIZERS)
    p.add_argument("--lambda", dest="lam", type=_unit_float, nargs="+", action="extend", required=True)
    p.add_argument("--res", type=int, default=201)
    p.add_argument("--format", choices=("csv", "pgm"), default="csv")
    p.add_argument("--loss", choices=("zero-one", "squared"), default="zero-one")
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("equiv", parents=[common], help="compare the regularized and plain properties")
    p.add_argument("--reg", required=True, choices=REGULARIZERS)
    p.add_argument("--lambda", dest="lam", type=_unit_float, required=True)
    p.add_argument("--grid-step", type=float, default=None, help="default 0.02 for m=2")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--loss", choices=("zero-one", "squared"), default="zero-one")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("check", parents=[common], help="run invariant suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--reg", choices=ENFORCING, action="append")
    p.add_argument("--m", type=int, default=2)
    p.set_defaults(func=cmd_check)

    for name, func, hlp in (("train", cmd_train, "train one configuration"),
                            ("sweep", cmd_sweep, "sweep p_b or lambda")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--config", help="key=value file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.set_defaults(func=func)

    p = sub.add_parser("stats", parents=[common], help="group statistics and diagram placement")
    p.add_argument("--fixture", choices=sorted(D.FIXTURES))
    p.add_argument("--data")
    p.add_argument("--label-col")
    p.add_argument("--group-col")
    p.add_argument("--threshold", type=float)
    p.add_argument("--reg", choices=REGULARIZERS, action="append")
    p.add_argument("--lambda", dest="lam", type=_unit_float, nargs="+", action="extend")
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed", None) is None and args.command in ("equiv", "check"):
        args.seed = 0
    if getattr(args, "jobs", None) is None:
        args.jobs = os.cpu_count() or 1
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, EnumerationLimitError) as exc:
        print(f"regprop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK
    except (DatasetError, OSError) as exc:
        print(f"regprop: error: {exc}", file=sys.stderr)
        return EXIT_IO

if __name__ == "__main__":
    sys.exit(main())
