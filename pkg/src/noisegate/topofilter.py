"""Topological noise filtering: kNN-graph component selection during training.

The detector alternates between training the classifier and selecting clean
samples: it builds a k-nearest-neighbor graph over the current embeddings,
keeps each class's largest connected component, drops samples whose local
neighborhoods are label-impure (zeta filtering), and continues training on
the kept set only. Samples outside the final kept set are flagged as noisy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from .dataset import TRAIN, Dataset
from .detection import DetectionResult
from .trainer import Model, TrainConfig, TrainingError, embed, init_model, \
    mean_cross_entropy, sgd_epoch


@dataclass
class TopoConfig:
    k_neighbors: int = 10
    zeta: float = 0.5
    first_filter_epoch: int = 10
    filter_interval: int = 5
    train_cfg: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError("zeta must lie in [0, 1]")
        if self.first_filter_epoch < 1 or self.filter_interval < 1:
            raise ValueError("filter schedule values must be >= 1")
        if self.first_filter_epoch > self.train_cfg.epochs:
            raise ValueError("first_filter_epoch exceeds the configured epochs")


def _nearest_neighbors(embeddings: np.ndarray, k: int,
                       rows: np.ndarray | None = None) -> np.ndarray:
    """Indices of each row's k nearest points by exact Euclidean distance.

    Ties are broken toward the lower sample index; a point is never its own
    neighbor.
    """
    E = np.asarray(embeddings, dtype=np.float64)
    n = E.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= n:
        raise ValueError("k must be smaller than the number of samples")
    if rows is None:
        dist = cdist(E, E)
        np.fill_diagonal(dist, np.inf)
    else:
        dist = cdist(E[rows], E)
        dist[np.arange(rows.size), rows] = np.inf
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :k]


def knn_graph(embeddings: np.ndarray, k: int) -> np.ndarray:
    """Union-symmetrized k-nearest-neighbor adjacency as a boolean matrix."""
    nearest = _nearest_neighbors(embeddings, k)
    n = nearest.shape[0]
    adj = np.zeros((n, n), dtype=bool)
    adj[np.repeat(np.arange(n), k), nearest.ravel()] = True
    return adj | adj.T


def largest_component_per_class(graph: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Union over classes of the largest connected component in each class's subgraph.

    Ties go to the component containing the lowest vertex index. Returns a
    sorted array of kept vertex indices.
    """
    labels = np.asarray(labels)
    if labels.shape[0] != graph.shape[0]:
        raise ValueError("labels must cover every graph vertex")
    kept_parts = []
    for c in np.unique(labels):
        verts = np.flatnonzero(labels == c)
        sub = csr_matrix(graph[np.ix_(verts, verts)])
        n_comp, comp = connected_components(sub, directed=False)
        sizes = np.bincount(comp, minlength=n_comp)
        candidates = np.flatnonzero(sizes == sizes.max())
        best = min(candidates, key=lambda cid: verts[comp == cid].min())
        kept_parts.append(verts[comp == best])
    if not kept_parts:
        return np.array([], dtype=np.int64)
    return np.sort(np.concatenate(kept_parts))


def zeta_filter(kept: np.ndarray, embeddings: np.ndarray, labels: np.ndarray,
                k: int, zeta: float) -> np.ndarray:
    """Drop kept samples whose k-nearest neighborhoods are too label-impure.

    A sample survives when at least a ``zeta`` fraction of its k nearest
    neighbors (searched over ALL samples, kept or not) carries the same
    observed label. Single pass against the incoming kept set.
    """
    kept = np.asarray(kept, dtype=np.int64)
    if kept.size == 0:
        return kept.copy()
    labels = np.asarray(labels)
    nearest = _nearest_neighbors(embeddings, k, rows=kept)
    purity = (labels[nearest] == labels[kept, None]).mean(axis=1)
    return kept[purity >= zeta]


def run_topofilter(ds: Dataset, cfg: TopoConfig):
    """Alternate training and topological cleaning; return (DetectionResult, Model).

    Training starts on the full train split. From ``first_filter_epoch`` on,
    every ``filter_interval`` epochs the kept set is recomputed from scratch
    (largest component per class, then zeta filtering) over fresh embeddings
    of ALL train samples, so previously dropped samples can be re-admitted.
    The returned model is the final classifier trained on the kept set; the
    final complement is flagged as noisy.

    If a filter event would leave fewer samples than classes, or lose an
    observed class entirely, filtering aborts and the last valid kept set
    stands (recorded in diagnostics).
    """
    tc = cfg.train_cfg
    train_idx = ds.indices(TRAIN)
    if train_idx.size == 0:
        raise ValueError("train split is empty")
    X = ds.features[train_idx]
    y = ds.observed_labels[train_idx]
    n = train_idx.size
    n_present = np.unique(y).size

    rng = np.random.default_rng(tc.seed)
    model = init_model(rng, ds.n_features, tc.hidden_dim, ds.num_classes,
                       tc.weight_init_scale)

    kept = np.arange(n)
    filtering = True
    degenerate = False
    n_events = 0
    for epoch in range(1, tc.epochs + 1):
        sgd_epoch(model, X[kept], y[kept], tc.learning_rate, tc.batch_size, rng)
        loss = mean_cross_entropy(model, X[kept], y[kept])
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        due = (epoch >= cfg.first_filter_epoch
               and (epoch - cfg.first_filter_epoch) % cfg.filter_interval == 0)
        if filtering and due:
            emb = embed(model, X)
            graph = knn_graph(emb, cfg.k_neighbors)
            candidate = zeta_filter(largest_component_per_class(graph, y), emb, y,
                                    cfg.k_neighbors, cfg.zeta)
            if candidate.size < ds.num_classes or np.unique(y[candidate]).size < n_present:
                degenerate = True
                filtering = False
            else:
                kept = candidate
                n_events += 1

    flagged = np.ones(n, dtype=bool)
    flagged[kept] = False
    result = DetectionResult.from_flags(
        flagged, flagged.astype(np.float64), "topofilter",
        filter_events=float(n_events),
        kept_samples=float(kept.size),
        degenerate_abort=float(degenerate),
    )
    return result, model
