import numpy as np
import pytest

from regprop import elicitation as E
from regprop import raster as RS
from regprop.core import TreatmentVector

REGS = ("none", "dp", "fpr", "fnr", "eeo", "cal", "bgl")


def mode_labels(n):
    c = (np.arange(n) + 0.5) / n
    hi = (c > 0.5).astype(int)
    return 2 * hi[:, None] + hi[None, :]


def test_dp_lambda_zero_quadrants():
    r = RS.rasterize("dp", 0.0, 100)
    assert np.array_equal(r.labels, mode_labels(100))
    assert RS.cell_area(r, (0, 0)) == pytest.approx(0.25, abs=1 / 100)
    assert sum(RS.cell_areas(r).values()) == 1.0


def test_lambda_zero_identical_across_regularizers():
    base = RS.rasterize("none", 0.0, 51).labels
    for reg in REGS:
        assert np.array_equal(RS.rasterize(reg, 0.0, 51).labels, base)


def test_none_ignores_lambda():
    assert np.array_equal(RS.rasterize("none", 0.7, 51).labels, RS.rasterize("dp", 0.0, 51).labels)


def test_dp_near_one_uniform_split():
    r = RS.rasterize("dp", 0.99, 100)
    assert set(np.unique(r.labels)) == {0, 3}
    c = r.centers()
    total = c[:, None] + c[None, :]
    assert np.all(r.labels[total < 1 - 1e-9] == 0) and np.all(r.labels[total > 1 + 1e-9] == 3)


def test_dp_02_zero_cell_matches_exact_form():
    r = RS.rasterize("dp", 0.2, 100)
    c = r.centers()
    for i in range(0, 100, 7):
        for j in range(0, 100, 7):
            p = (c[i], c[j])
            assert (r.labels[i, j] == 0) == E.dp_cell_membership((0, 0), p, 0.2)


def test_mixed_cells_vanish_at_large_lambda():
    assert RS.cell_area(RS.rasterize("dp", 0.9, 100), (1, 0)) == 0.0


def test_label_at_and_ties():
    r = RS.rasterize("dp", 0.0, 2)
    assert r.label_at(1, 0) == TreatmentVector((1, 0))
    assert not r.tie_mask.any()
    # even resolution at lambda=0.5 puts centers on p1 + p2 = 1
    r = RS.rasterize("dp", 0.5, 4)
    assert r.tie_mask[1, 2] and r.labels[1, 2] == 0


def test_uniform_area_monotone_in_lambda():
    areas = []
    for lam in np.arange(10) / 10:
        r = RS.rasterize("dp", lam, 101)
        areas.append(RS.cell_area(r, (0, 0)) + RS.cell_area(r, (1, 1)))
    assert areas[0] == pytest.approx(0.5, abs=0.02)
    assert all(b >= a for a, b in zip(areas, areas[1:]))


def test_dp_symmetry():
    for lam in (0.1, 0.25, 0.6):
        L = RS.rasterize("dp", lam, 101).labels
        flipped = L[::-1, ::-1]
        # complement of vector k is 3 - k
        off = ~RS.rasterize("dp", lam, 101).tie_mask
        assert np.array_equal((3 - flipped)[off & off[::-1, ::-1]], L[off & off[::-1, ::-1]])


def test_fpr_star_and_fnr_mirror():
    r = RS.rasterize("fpr", 0.3, 201)
    c = r.centers()
    t1 = np.array([RS.VECTORS[k][0] for k in r.labels.ravel()]).reshape(r.labels.shape)
    assert np.any((c[:, None] > 0.5) & (t1 == 0))
    r = RS.rasterize("fnr", 0.3, 201)
    t1 = np.array([RS.VECTORS[k][0] for k in r.labels.ravel()]).reshape(r.labels.shape)
    assert np.any((c[:, None] < 0.5) & (t1 == 1))


def test_csv_export_round_trip(tmp_path):
    r = RS.rasterize("fpr", 0.3, 13)
    path = RS.export_raster(r, tmp_path / RS.raster_filename("fpr", 0.3, 13, "csv"))
    assert path.name == "fpr_0.3_13.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == "i,j,p1,p2,label,tie" and len(lines) == 13 * 13 + 1
    back = RS.load_raster_csv(path)
    assert np.array_equal(back.labels, r.labels) and np.array_equal(back.tie_mask, r.tie_mask)


def test_pgm_export(tmp_path):
    r = RS.rasterize("dp", 0.0, 2)
    data = RS.export_raster(r, tmp_path / "x.pgm", "pgm").read_bytes()
    assert data.startswith(b"P5\n")
    header, _, pixels = data.partition(b"2 2\n255\n")
    assert b"00=0 01=85 10=170 11=255" in header
    # top row is high p2: (0,1) then (1,1); bottom row (0,0) then (1,0)
    assert list(pixels) == [85, 255, 0, 170]


def test_export_errors(tmp_path):
    r = RS.rasterize("dp", 0.0, 2)
    with pytest.raises(OSError, match="missing"):
        RS.export_raster(r, tmp_path / "missing" / "x.csv")
    with pytest.raises(ValueError):
        RS.export_raster(r, tmp_path / "x.png", "png")


def test_resolution_check():
    with pytest.raises(ValueError):
        RS.rasterize("dp", 0.1, 1)
