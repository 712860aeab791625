import numpy as np
import pytest

import oracles
from noisegate import (Dataset, TopoConfig, TrainConfig, corrupt, knn_graph,
                       largest_component_per_class, make_blobs, run_topofilter,
                       split, uniform_matrix, zeta_filter)


def graph_edges(adj):
    n = adj.shape[0]
    return {(i, j) for i in range(n) for j in range(i + 1, n) if adj[i, j]}


class TestKnnGraph:
    def test_three_collinear_points(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        adj = knn_graph(pts, k=1)
        assert graph_edges(adj) == {(0, 1), (1, 2)}

    def test_complete_graph(self):
        pts = np.random.default_rng(0).standard_normal((6, 3))
        adj = knn_graph(pts, k=5)
        assert adj.sum() == 6 * 5  # all off-diagonal pairs

    def test_symmetry(self):
        pts = np.random.default_rng(1).standard_normal((20, 4))
        adj = knn_graph(pts, k=3)
        assert np.array_equal(adj, adj.T)
        assert not adj.diagonal().any()

    def test_k_must_be_below_n(self):
        pts = np.zeros((4, 2))
        with pytest.raises(ValueError):
            knn_graph(pts, k=4)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = rng.integers(5, 30)
            k = rng.integers(1, min(6, n - 1) + 1)
            pts = rng.standard_normal((n, rng.integers(1, 4)))
            adj = knn_graph(pts, int(k))
            assert graph_edges(adj) == oracles.knn_edges(pts.tolist(), int(k))


class TestLargestComponentPerClass:
    def test_single_class_connected(self):
        adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
        kept = largest_component_per_class(adj, np.zeros(3, dtype=int))
        assert kept.tolist() == [0, 1, 2]

    def test_five_two_split(self):
        # class 0 vertices {0..6}: component {0..4} connected, {5,6} separate
        adj = np.zeros((7, 7), dtype=bool)
        for a, b in [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6)]:
            adj[a, b] = adj[b, a] = True
        kept = largest_component_per_class(adj, np.zeros(7, dtype=int))
        assert kept.tolist() == [0, 1, 2, 3, 4]

    def test_tie_break_to_lowest_vertex(self):
        adj = np.zeros((4, 4), dtype=bool)
        adj[0, 1] = adj[1, 0] = True
        adj[2, 3] = adj[3, 2] = True
        kept = largest_component_per_class(adj, np.zeros(4, dtype=int))
        assert kept.tolist() == [0, 1]

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(6, 30))
            k = int(rng.integers(1, 4))
            pts = rng.standard_normal((n, 2))
            labels = rng.integers(0, 3, size=n)
            kept = largest_component_per_class(knn_graph(pts, k), labels)
            expect = oracles.largest_component_per_class(pts.tolist(),
                                                         labels.tolist(), k)
            assert kept.tolist() == expect


class TestZetaFilter:
    def test_zeta_zero_keeps_everything(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((10, 2))
        labels = rng.integers(0, 2, size=10)
        kept = np.arange(10)
        out = zeta_filter(kept, pts, labels, k=3, zeta=0.0)
        assert np.array_equal(out, kept)

    def test_zeta_one_drops_any_impurity(self):
        # point 0's single nearest neighbor has a different label
        pts = np.array([[0.0], [0.1], [5.0], [5.1]])
        labels = np.array([0, 1, 0, 0])
        out = zeta_filter(np.array([0, 2, 3]), pts, labels, k=1, zeta=1.0)
        assert out.tolist() == [2, 3]

    def test_matches_brute_force_on_ten_points(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((10, 2))
        labels = rng.integers(0, 2, size=10)
        kept = np.arange(10)
        for zeta in (0.0, 0.34, 0.5, 0.67, 1.0):
            out = zeta_filter(kept, pts, labels, k=3, zeta=zeta)
            assert out.tolist() == oracles.zeta_filter(range(10), pts.tolist(),
                                                       labels.tolist(), 3, zeta)


class TestKeptSetInvariants:
    def test_pipeline_monotone(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            n = int(rng.integers(8, 40))
            pts = rng.standard_normal((n, 3))
            labels = rng.integers(0, 3, size=n)
            k = int(rng.integers(1, 5))
            comp_kept = largest_component_per_class(knn_graph(pts, k), labels)
            filtered = zeta_filter(comp_kept, pts, labels, k, zeta=0.5)
            assert set(filtered) <= set(comp_kept)
            for c in np.unique(labels):
                class_set = set(np.flatnonzero(labels == c).tolist())
                assert set(comp_kept) & class_set <= class_set


class TestRunTopofilter:
    def test_zero_noise_low_false_positive(self, blobs800):
        noisy = corrupt(blobs800, uniform_matrix(4, 0.0), seed=0)
        result, _ = run_topofilter(noisy, TopoConfig(train_cfg=TrainConfig(seed=0)))
        assert result.predicted_noise_level < 0.05

    def test_detection_quality_30pct(self, uniform_detection_runs):
        assert uniform_detection_runs.seed_mean(0.3, "topofilter", "f1") >= 0.8

    def test_filter_event_schedule(self, blobs800):
        noisy = corrupt(blobs800, uniform_matrix(4, 0.3), seed=1)
        cfg = TopoConfig(train_cfg=TrainConfig(seed=1, epochs=22))
        result, _ = run_topofilter(noisy, cfg)
        # defaults: first event at epoch 10, then every 5 -> 10, 15, 20
        assert result.diagnostics["filter_events"] == 3.0
        assert result.diagnostics["degenerate_abort"] == 0.0

    def test_flagged_kept_partition(self, blobs800):
        noisy = corrupt(blobs800, uniform_matrix(4, 0.3), seed=2)
        result, _ = run_topofilter(noisy, TopoConfig(train_cfg=TrainConfig(seed=2)))
        n = blobs800.indices("train").size
        assert result.flagged.shape == (n,)
        assert result.flagged.sum() + result.diagnostics["kept_samples"] == n
        assert result.predicted_noise_level == pytest.approx(result.flagged.mean())

    def test_returned_model_is_trained(self, blobs800):
        from noisegate import evaluate
        noisy = corrupt(blobs800, uniform_matrix(4, 0.3), seed=3)
        _, model = run_topofilter(noisy, TopoConfig(train_cfg=TrainConfig(seed=3)))
        assert evaluate(model, noisy, "test") > 0.9

    def test_degenerate_filter_aborts_and_keeps_last_valid(self):
        # interleaved 1-d classes: every neighborhood is impure, zeta=1 drops all
        feats = np.arange(12, dtype=float).reshape(-1, 1)
        labels = np.tile([0, 1, 2], 4)
        ds = Dataset(feats, labels, labels.copy(),
                     np.full(12, "train", dtype="U10"), num_classes=3)
        cfg = TopoConfig(k_neighbors=2, zeta=1.0,
                         first_filter_epoch=1, filter_interval=1,
                         train_cfg=TrainConfig(epochs=2, hidden_dim=0, seed=0))
        result, _ = run_topofilter(ds, cfg)
        assert result.diagnostics["degenerate_abort"] == 1.0
        assert result.flagged.sum() == 0  # last valid set was everything

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            TopoConfig(first_filter_epoch=100, train_cfg=TrainConfig(epochs=50))
