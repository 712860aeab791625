"""Shared result type for the label-noise detectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class DetectionResult:
    """Per-sample verdicts over the train split.

    ``flagged`` marks samples predicted to be mislabeled; ``scores`` are
    higher for more suspicious samples. ``predicted_noise_level`` is the
    flagged fraction of the train split.
    """

    flagged: np.ndarray
    scores: np.ndarray
    predicted_noise_level: float
    method: str
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        flagged = np.asarray(self.flagged, dtype=bool)
        scores = np.asarray(self.scores, dtype=np.float64)
        if flagged.shape != scores.shape or flagged.ndim != 1:
            raise ValueError("flagged and scores must be equal-length 1-d arrays")
        if not 0.0 <= self.predicted_noise_level <= 1.0:
            raise ValueError("predicted_noise_level must lie in [0, 1]")
        if abs(self.predicted_noise_level - flagged.mean()) > 1e-12:
            raise ValueError("predicted_noise_level inconsistent with the flagged count")
        object.__setattr__(self, "flagged", flagged)
        object.__setattr__(self, "scores", scores)

    @classmethod
    def from_flags(cls, flagged: np.ndarray, scores: np.ndarray, method: str,
                   **diagnostics: float) -> "DetectionResult":
        flagged = np.asarray(flagged, dtype=bool)
        return cls(flagged=flagged, scores=scores,
                   predicted_noise_level=float(flagged.mean()),
                   method=method, diagnostics=dict(diagnostics))
