"""
Pose Prior for Vantage.
Collapses many per-frame camera pose predictions (focal length, tilt, roll)
into one set of trusted parameters by taking the mode of each.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Sequence

import numpy as np

from constants import POSE_FOCAL_BIN_PX, POSE_ANGLE_BIN_DEG
from errors import InputError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PosePrediction:
    """One frame's predicted intrinsics and orientation."""
    focal_px: float
    tilt_deg: float
    roll_deg: float

    def to_dict(self) -> Dict[str, Any]:
        return {'focal_px': self.focal_px, 'tilt_deg': self.tilt_deg, 'roll_deg': self.roll_deg}


def parameter_mode(values: Sequence[float], bin_width: float) -> float:
    """
    Center of the most populated histogram bin.

    Bin k covers [k * bin_width, (k + 1) * bin_width). Ties go to the lowest bin.

    Raises:
        InputError: If there are no values
        DomainError: If the bin width is not positive or a value is not finite
    """
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise DomainError(f"Bin width must be positive, got {bin_width}")
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        raise InputError("Cannot take the mode of no values")
    if not np.all(np.isfinite(array)):
        raise DomainError("Values must be finite")

    bins, counts = np.unique(np.floor(array / bin_width), return_counts=True)
    best = bins[np.argmax(counts)]
    return float((best + 0.5) * bin_width)


def pose_mode(predictions: Sequence[PosePrediction], focal_bin_px: float = POSE_FOCAL_BIN_PX,
              angle_bin_deg: float = POSE_ANGLE_BIN_DEG) -> PosePrediction:
    """Per-parameter mode of a list of pose predictions."""
    if not predictions:
        raise InputError("No pose predictions to aggregate")
    mode = PosePrediction(
        focal_px=parameter_mode([p.focal_px for p in predictions], focal_bin_px),
        tilt_deg=parameter_mode([p.tilt_deg for p in predictions], angle_bin_deg),
        roll_deg=parameter_mode([p.roll_deg for p in predictions], angle_bin_deg),
    )
    logger.info("Pose mode over %d predictions: f = %.1f px, tilt = %.2f, roll = %.2f",
                len(predictions), mode.focal_px, mode.tilt_deg, mode.roll_deg)
    return mode
