import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from noisegate import (Dataset, DatasetParseError, load_features, make_blobs,
                       save_features, split)


class TestMakeBlobs:
    def test_degenerate_separation(self):
        ds = make_blobs(2, 1, 1, separation=0, spread=1, seed=0)
        assert ds.n_samples == 2
        assert set(ds.true_labels.tolist()) == {0, 1}
        assert np.array_equal(ds.true_labels, ds.observed_labels)

    def test_nearest_center_separability(self):
        ds = make_blobs(10, 100, 16, separation=10, spread=1, seed=7)
        assert ds.n_samples == 1000
        acc = oracles.nearest_center_accuracy(ds.features.tolist(),
                                              ds.true_labels.tolist(), 10)
        assert acc > 0.99

    def test_deterministic(self):
        a = make_blobs(3, 5, 4, separation=2, spread=0.5, seed=42)
        b = make_blobs(3, 5, 4, separation=2, spread=0.5, seed=42)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.true_labels, b.true_labels)

    def test_min_center_distance_equals_separation(self):
        ds = make_blobs(5, 1, 8, separation=7.5, spread=1e-9, seed=3)
        d = np.sqrt(((ds.features[:, None] - ds.features[None]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        assert d.min() == pytest.approx(7.5, rel=1e-6)

    @pytest.mark.parametrize("kwargs", [
        dict(k=1, n_per_class=1, d=1, separation=0, spread=1, seed=0),
        dict(k=2, n_per_class=0, d=1, separation=0, spread=1, seed=0),
        dict(k=2, n_per_class=1, d=1, separation=float("nan"), spread=1, seed=0),
        dict(k=2, n_per_class=1, d=1, separation=0, spread=0, seed=0),
        dict(k=2, n_per_class=1, d=1, separation=-1, spread=1, seed=0),
    ])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ValueError):
            make_blobs(**kwargs)


class TestDatasetInvariants:
    def test_rejects_labels_out_of_range(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 1)), [0, 2], [0, 2], ["", ""], num_classes=2)

    def test_rejects_non_finite_features(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[np.nan]]), [0], [0], [""], num_classes=1)

    def test_rejects_corruption_outside_train(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 1)), [0, 1], [1, 1], ["val", "train"], num_classes=2)

    def test_arrays_immutable(self):
        ds = make_blobs(2, 2, 2, 1, 1, seed=0)
        with pytest.raises(ValueError):
            ds.features[0, 0] = 9.0


class TestSplit:
    def test_exact_80_10_10(self):
        ds = make_blobs(10, 100, 4, 5, 1, seed=0)
        out = split(ds, (0.8, 0.1, 0.1), seed=5)
        for c in range(10):
            mask = out.true_labels == c
            assert (out.split[mask] == "train").sum() == 80
            assert (out.split[mask] == "val").sum() == 10
            assert (out.split[mask] == "test").sum() == 10

    def test_all_train(self):
        ds = make_blobs(3, 4, 2, 1, 1, seed=0)
        out = split(ds, (1, 0, 0), seed=0)
        assert (out.split == "train").all()

    def test_seeds_change_partition_not_counts(self):
        ds = make_blobs(4, 25, 3, 3, 1, seed=0)
        a = split(ds, (0.8, 0.1, 0.1), seed=1)
        b = split(ds, (0.8, 0.1, 0.1), seed=2)
        assert not np.array_equal(a.split, b.split)
        for tag in ("train", "val", "test"):
            assert (a.split == tag).sum() == (b.split == tag).sum()

    def test_fractions_must_sum_to_one(self):
        ds = make_blobs(2, 3, 2, 1, 1, seed=0)
        with pytest.raises(ValueError):
            split(ds, (0.5, 0.2, 0.2), seed=0)

    @settings(max_examples=40, deadline=None)
    @given(n_per_class=st.integers(3, 40), frac=st.floats(0.05, 0.9),
           seed=st.integers(0, 1000))
    def test_stratification_within_one_sample(self, n_per_class, frac, seed):
        rest = (1 - frac) / 2
        ds = make_blobs(3, n_per_class, 2, 1, 1, seed=0)
        out = split(ds, (frac, rest, rest), seed=seed)
        fractions = {"train": frac, "val": rest, "test": rest}
        for c in range(3):
            mask = out.true_labels == c
            for tag, f in fractions.items():
                count = (out.split[mask] == tag).sum()
                assert abs(count - f * n_per_class) <= 1


class TestCsvRoundTrip:
    def test_three_row_file(self, tmp_path):
        path = tmp_path / "tiny.csv"
        path.write_text("f0,f1,label\n0.5,1.0,0\n-1.25,3.5,1\n2.0,0.0,0\n")
        ds = load_features(path)
        assert ds.n_samples == 3
        assert ds.num_classes == 2
        assert np.array_equal(ds.observed_labels, [0, 1, 0])
        assert np.array_equal(ds.observed_labels, ds.true_labels)
        assert (ds.split == "").all()

    def test_short_row_names_the_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f0,f1,label\n0.5,1.0,0\n0.5,1\n")
        with pytest.raises(DatasetParseError, match=":3"):
            load_features(path)

    def test_non_numeric_feature(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f0,label\nabc,0\n")
        with pytest.raises(DatasetParseError, match=":2"):
            load_features(path)

    def test_float_label_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f0,label\n1.0,0.5\n")
        with pytest.raises(DatasetParseError):
            load_features(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y,label\n1,2,0\n")
        with pytest.raises(DatasetParseError, match=":1"):
            load_features(path)

    def test_label_outside_sidecar_range(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f0,label\n1.0,5\n")
        (tmp_path / "bad.csv.meta.json").write_text('{"k": 3}')
        with pytest.raises(ValueError):
            load_features(path)

    def test_round_trip_identical(self, tmp_path):
        ds = make_blobs(3, 7, 5, separation=4, spread=1.5, seed=11)
        path = tmp_path / "blobs.csv"
        save_features(ds, path)
        back = load_features(path)
        assert np.array_equal(ds.features, back.features)
        assert np.array_equal(ds.true_labels, back.true_labels)
        assert np.array_equal(ds.observed_labels, back.observed_labels)
        assert back.num_classes == ds.num_classes
        assert (back.split == "").all()

    def test_sidecar_preserves_empty_classes(self, tmp_path):
        ds = make_blobs(2, 3, 2, 1, 1, seed=0)
        ds = Dataset(ds.features, ds.true_labels, ds.observed_labels, ds.split,
                     num_classes=5, class_names=("a", "b", "c", "d", "e"))
        path = tmp_path / "wide.csv"
        save_features(ds, path)
        back = load_features(path)
        assert back.num_classes == 5
        assert back.class_names == ("a", "b", "c", "d", "e")
