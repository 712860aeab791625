"""Label-noise injection, detection and cleanup benchmarking.

The pipeline: build or load a feature-vector dataset, split it, corrupt
train labels by sampling from a transition matrix, detect the noisy labels
(topological filtering, area-under-the-margin, or confident learning),
score the detection, and measure how retraining on the cleaned data changes
clean-test accuracy.
"""

from .aum import AumConfig, MarginTrace, compute_aum, margin, run_aum, threshold_flags
from .confident import (ConfidentJoint, class_thresholds, confident_joint, prune,
                        run_cl, run_cl_with_joint)
from .dataset import (TEST, TRAIN, UNASSIGNED, VAL, Dataset, DatasetParseError,
                      load_features, make_blobs, save_features, split)
from .detection import DetectionResult
from .figures import render_report_figures
from .harness import (ConfigError, ExperimentConfig, ExperimentReport, ReportRow,
                      report_csv, report_json, run_cell, run_grid)
from .metrics import (FilterMetrics, compute_filter_metrics, detection_metrics,
                      noise_level_metrics)
from .noise import (TransitionMatrix, asymmetric_matrix, corrupt,
                    realized_noise_level, uniform_matrix)
from .seeding import derive_seed
from .topofilter import (TopoConfig, knn_graph, largest_component_per_class,
                         run_topofilter, zeta_filter)
from .trainer import (CVProbabilities, Model, TrainConfig, TrainingError,
                      TrainingTrace, cv_predict, embed, evaluate, loss_and_grads,
                      predict_proba, train)

__version__ = "0.1.0"

__all__ = [
    "AumConfig", "MarginTrace", "compute_aum", "margin", "run_aum", "threshold_flags",
    "ConfidentJoint", "class_thresholds", "confident_joint", "prune", "run_cl",
    "run_cl_with_joint",
    "TRAIN", "VAL", "TEST", "UNASSIGNED", "Dataset", "DatasetParseError",
    "load_features", "make_blobs", "save_features", "split",
    "DetectionResult",
    "render_report_figures",
    "ConfigError", "ExperimentConfig", "ExperimentReport", "ReportRow",
    "report_csv", "report_json", "run_cell", "run_grid",
    "FilterMetrics", "compute_filter_metrics", "detection_metrics",
    "noise_level_metrics",
    "TransitionMatrix", "asymmetric_matrix", "corrupt", "realized_noise_level",
    "uniform_matrix",
    "derive_seed",
    "TopoConfig", "knn_graph", "largest_component_per_class", "run_topofilter",
    "zeta_filter",
    "CVProbabilities", "Model", "TrainConfig", "TrainingError", "TrainingTrace",
    "cv_predict", "embed", "evaluate", "loss_and_grads", "predict_proba", "train",
]
