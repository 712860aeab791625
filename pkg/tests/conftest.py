import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from noisegate import (AumConfig, TopoConfig, TrainConfig, compute_filter_metrics,
                       corrupt, derive_seed, make_blobs, run_aum, run_cl,
                       run_topofilter, split, uniform_matrix)

DETECTORS = ("topofilter", "aum", "cl")


@pytest.fixture(scope="session")
def blobs800():
    """Default benchmark dataset: 4 well-separated blobs, 800 samples, 80/10/10."""
    return split(make_blobs(4, 200, 16, 10.0, 1.0, seed=0), (0.8, 0.1, 0.1), seed=1)


@dataclass
class DetectionRuns:
    """Detector metrics on blobs800 under uniform noise, keyed by (level, method, seed)."""

    metrics: dict = field(default_factory=dict)
    duration_by_level: dict = field(default_factory=dict)

    def seed_mean(self, level, method, name):
        values = [getattr(self.metrics[(level, method, s)], name) for s in range(3)]
        return float(np.mean(values))


@pytest.fixture(scope="session")
def uniform_detection_runs(blobs800) -> DetectionRuns:
    """Run all three detectors at uniform levels 0.1/0.3/0.5 over 3 seeds."""
    ds = blobs800
    train_idx = ds.indices("train")
    runs = DetectionRuns()
    for level in (0.1, 0.3, 0.5):
        t0 = time.time()
        for seed in range(3):
            noisy = corrupt(ds, uniform_matrix(4, level),
                            seed=derive_seed("detect-fixture", level, seed))
            truth = noisy.observed_labels[train_idx] != noisy.true_labels[train_idx]
            tc = TrainConfig(seed=derive_seed("detect-train", level, seed))
            for method in DETECTORS:
                if method == "topofilter":
                    result, _ = run_topofilter(noisy, TopoConfig(train_cfg=tc))
                elif method == "aum":
                    result = run_aum(noisy, AumConfig(train_cfg=tc))
                else:
                    result = run_cl(noisy, tc, folds=4)
                runs.metrics[(level, method, seed)] = compute_filter_metrics(
                    result.flagged, truth)
        runs.duration_by_level[level] = time.time() - t0
    return runs
