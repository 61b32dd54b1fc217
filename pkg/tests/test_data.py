import math

import numpy as np
import pytest

from regprop import data as D
from regprop.errors import DatasetError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestSynthetic:
    def test_degenerate_rates(self):
        ds = D.generate_synthetic(D.SyntheticSpec(1.0, 0.0, n_samples=1000, seed=3))
        assert np.all(ds.labels[ds.groups == 0] == 1)
        assert np.all(ds.labels[ds.groups == 1] == 0)

    def test_pooled_rate(self):
        ds = D.generate_synthetic(D.SyntheticSpec(0.3, 0.3, n_samples=10000, seed=11))
        # 0.02 is about 4.4 binomial standard errors at n = 10000
        assert abs(ds.labels.mean() - 0.3) < 0.02

    def test_shape_and_features(self):
        ds = D.generate_synthetic(D.SyntheticSpec(0.3, 0.7, n_samples=500, k_noise=3))
        assert ds.d == 5 and ds.n == 500
        a = ds.groups == 0
        assert np.all(ds.features[a, 0] == 0.3) and np.all(ds.features[a, 1] == 0.0)
        assert np.all(ds.features[~a, 1] == 0.7) and np.all(ds.features[~a, 0] == 0.0)
        noise = ds.features[:, 2:]
        assert noise.min() >= -1.0 and noise.max() <= 1.0

    def test_pure_function_of_spec(self):
        spec = D.SyntheticSpec(0.4, 0.6, n_samples=300, seed=5)
        a, b = D.generate_synthetic(spec), D.generate_synthetic(spec)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.groups, b.groups)

    @pytest.mark.parametrize("pa,pb", [(0.1, 0.9), (0.3, 0.55), (0.8, 0.2)])
    def test_stats_converge(self, pa, pb):
        # standardized base-rate errors over many seeds behave like N(0, 1)
        z = []
        for seed in range(100):
            ds = D.generate_synthetic(D.SyntheticSpec(pa, pb, n_samples=2000, seed=seed))
            for gs, p in zip(ds.group_stats, (pa, pb)):
                z.append((gs.base_rate - p) / math.sqrt(p * (1 - p) / gs.count))
        z = np.array(z)
        assert abs(z.mean()) < 3 / math.sqrt(z.size)
        assert np.mean(np.abs(z) > 3) < 0.02
        assert 0.8 < z.std() < 1.2

    def test_spec_validation(self):
        with pytest.raises(DatasetError):
            D.SyntheticSpec(1.2, 0.5)
        with pytest.raises(DatasetError):
            D.SyntheticSpec(0.2, 0.5, group_balance=1.0)

    def test_tiny_draw_keeps_both_groups(self):
        ds = D.generate_synthetic(D.SyntheticSpec(0.5, 0.5, n_samples=2, seed=0))
        assert set(ds.groups.tolist()) == {0, 1}


class TestCSV:
    def test_two_row_round_trip(self, tmp_path):
        p = write(tmp_path, "x,z,y,g\n1.5,2,1,u\n-3,4.25,0,v\n")
        ds = D.load_csv(p, "y", "g", standardize=False)
        np.testing.assert_array_equal(ds.features, [[1.5, 2.0], [-3.0, 4.25]])
        assert ds.labels.tolist() == [1, 0] and ds.groups.tolist() == [0, 1]
        assert ds.group_names == ("u", "v") and ds.feature_names == ("x", "z")

    def test_threshold_rule(self, tmp_path):
        p = write(tmp_path, "f,age,y\n1,30,1\n2,24,0\n3,25,1\n4,19,1\n")
        ds = D.load_csv(p, "y", "age", threshold=25)
        assert ds.groups.tolist() == [0, 1, 0, 1]
        assert ds.group_names == ("age>=25", "age<25")

    def test_standardize(self, tmp_path):
        p = write(tmp_path, "a,c,y,g\n1,7,1,u\n2,7,0,v\n3,7,1,u\n")
        ds = D.load_csv(p, "y", "g")
        np.testing.assert_allclose(ds.features[:, 0].mean(), 0, atol=1e-15)
        np.testing.assert_allclose(ds.features[:, 0].std(), 1)
        assert np.all(ds.features[:, 1] == 0)

    @pytest.mark.parametrize("text,match", [
        ("x,y\n1,0\n2,1\n", "no column 'g'"),
        ("x,y,g\nfoo,0,u\n2,1,v\n", "non-numeric feature"),
        ("x,y,g\n1,0,u\n2,1,u\n", "has 1 values"),
        ("x,y,g\n1,0,u\n2,1,v\n3,1,w\n", "has 3 values"),
        ("x,y,g\n1,0\n", "ragged"),
        ("", "missing header"),
    ])
    def test_errors(self, tmp_path, text, match):
        with pytest.raises(DatasetError, match=match):
            D.load_csv(write(tmp_path, text), "y", "g")

    def test_single_group_threshold(self, tmp_path):
        with pytest.raises(DatasetError, match="one group"):
            D.load_csv(write(tmp_path, "x,y,g\n1,0,40\n2,1,50\n"), "y", "g", threshold=25)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="cannot read"):
            D.load_csv(tmp_path / "nope.csv", "y", "g")

    def test_export_reload_idempotent(self, tmp_path):
        ds = D.load_fixture("heart")
        p1 = D.export_csv(ds, tmp_path / "a.csv")
        back = D.load_csv(p1, "label", "group", standardize=False, group_values=ds.group_names)
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)
        np.testing.assert_array_equal(back.groups, ds.groups)
        p2 = D.export_csv(back, tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()

    def test_group_mapping_logged(self, tmp_path, caplog):
        with caplog.at_level("INFO", logger="regprop.data"):
            D.load_csv(write(tmp_path, "x,y,g\n1,0,u\n2,1,v\n"), "y", "g")
        assert "a=u b=v" in caplog.text


class TestFixtures:
    def test_german(self):
        ds = D.load_fixture("german")
        a, b = ds.group_stats
        assert a.base_rate == pytest.approx(0.728, abs=1e-3)
        assert b.base_rate == pytest.approx(0.578, abs=3e-3)
        assert b.share == pytest.approx(0.191, abs=1e-3)

    def test_heart(self):
        ds = D.load_fixture("heart")
        a, b = ds.group_stats
        assert a.base_rate == pytest.approx(0.75, abs=1e-3)
        assert b.base_rate == pytest.approx(0.449, abs=1e-3)
        assert b.share == pytest.approx(0.63, abs=1e-3)

    def test_unknown(self):
        with pytest.raises(DatasetError):
            D.load_fixture("adult")

    def test_population_from_stats(self):
        pop = D.population_from_group_stats(D.load_fixture("german").stats)
        np.testing.assert_allclose(pop.p1, [0.728, 0.576], atol=3e-3)
        pop = D.population_from_group_stats([D.GroupStats("a", 5, 0.5, 0.5), D.GroupStats("b", 5, 0.5, 0.5)])
        assert pop.p1.tolist() == [0.5, 0.5] and pop.groups == ("a", "b")
        with pytest.raises(DatasetError):
            D.population_from_group_stats([D.GroupStats("a", 5, 0.5, 1.0)])
