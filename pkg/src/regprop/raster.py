"""Level-set partitions of ``[0, 1]^2`` for two agents in different groups.

Cell ``(i, j)`` of an ``n x n`` raster is the population
``p = ((i + 0.5) / n, (j + 0.5) / n)``; its label is the index of the
lexicographically smallest optimal treatment vector
(0 -> (0,0), 1 -> (0,1), 2 -> (1,0), 3 -> (1,1)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import elicitation
from .core import RegularizedObjective, TreatmentVector, check_regularizer

GROUPS = ("a", "b")
VECTORS = ((0, 0), (0, 1), (1, 0), (1, 1))
GRAY = (0, 85, 170, 255)


@dataclass(frozen=True)
class LevelSetRaster:
    resolution: int
    lam: float
    regularizer: str
    labels: np.ndarray  # (n, n) int, axis 0 = p1, axis 1 = p2
    tie_mask: np.ndarray

    def centers(self) -> np.ndarray:
        return (np.arange(self.resolution) + 0.5) / self.resolution

    def label_at(self, i: int, j: int) -> TreatmentVector:
        return TreatmentVector(VECTORS[int(self.labels[i, j])])


def rasterize(regularizer, lam: float, resolution: int = 201, loss: str = "zero-one") -> LevelSetRaster:
    check_regularizer(regularizer)
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    c = (np.arange(resolution) + 0.5) / resolution
    P = np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1).reshape(-1, 2)
    obj = RegularizedObjective(loss, regularizer, lam)
    _, mask = elicitation.regularized_masks(obj, GROUPS, P)
    labels = np.argmax(mask, axis=1).reshape(resolution, resolution)
    ties = (mask.sum(axis=1) > 1).reshape(resolution, resolution)
    name = regularizer if isinstance(regularizer, str) else getattr(regularizer, "__name__", "custom")
    return LevelSetRaster(resolution, float(lam), name, labels, ties)


def cell_area(raster: LevelSetRaster, t) -> float:
    k = VECTORS.index(tuple(t))
    return float(np.mean(raster.labels == k))


def cell_areas(raster: LevelSetRaster) -> dict:
    return {"".join(map(str, v)): cell_area(raster, v) for v in VECTORS}


def raster_filename(regularizer: str, lam: float, resolution: int, ext: str) -> str:
    return f"{regularizer}_{lam:g}_{resolution}.{ext}"


def export_raster(raster: LevelSetRaster, path, fmt: str = "csv") -> Path:
    path = Path(path)
    try:
        if fmt == "csv":
            _write_csv(raster, path)
        elif fmt == "pgm":
            _write_pgm(raster, path)
        else:
            raise ValueError(f"unknown raster format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write raster to {path}: {exc.strerror or exc}") from exc
    return path


def _write_csv(raster: LevelSetRaster, path: Path) -> None:
    c = raster.centers()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "p1", "p2", "label", "tie"])
        n = raster.resolution
        for i in range(n):
            for j in range(n):
                w.writerow([i, j, repr(float(c[i])), repr(float(c[j])),
                            "".join(map(str, VECTORS[raster.labels[i, j]])), int(raster.tie_mask[i, j])])


def _write_pgm(raster: LevelSetRaster, path: Path) -> None:
    n = raster.resolution
    # image rows run from high p2 (top) to low p2; columns follow p1
    img = np.asarray(GRAY, dtype=np.uint8)[raster.labels.T[::-1, :]]
    mapping = " ".join(f"{''.join(map(str, v))}={g}" for v, g in zip(VECTORS, GRAY))
    header = (
        f"P5\n# regprop level set reg={raster.regularizer} lambda={raster.lam!r}\n"
        f"# gray: {mapping}; columns p1 ascending, rows p2 descending\n{n} {n}\n255\n"
    )
    with path.open("wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(img.tobytes())


def load_raster_csv(path, regularizer: str = "", lam: float = float("nan")) -> LevelSetRaster:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = int(round(len(rows) ** 0.5))
    if n * n != len(rows):
        raise ValueError(f"{path}: {len(rows)} rows is not a square raster")
    labels = np.zeros((n, n), dtype=np.int64)
    ties = np.zeros((n, n), dtype=bool)
    codes = {"".join(map(str, v)): k for k, v in enumerate(VECTORS)}
    for r in rows:
        i, j = int(r["i"]), int(r["j"])
        labels[i, j] = codes[r["label"]]
        ties[i, j] = r["tie"] == "1"
    return LevelSetRaster(n, lam, regularizer, labels, ties)
