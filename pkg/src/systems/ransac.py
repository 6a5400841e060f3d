"""
Robust Calibration for Vantage.
Random-sample consensus around the vertical calibration solver, scoring each
candidate camera height by how well it predicts head pixels from foot pixels.

Random streams: iteration n draws from numpy's PCG64 generator seeded with
SeedSequence([rng_seed, n]), so every iteration is reproducible on its own and
the result does not depend on the order iterations run in.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np

from constants import (
    RANSAC_THRESHOLD_PX, RANSAC_ITERATIONS, RANSAC_SAMPLE_SIZE, RANSAC_MIN_INLIERS,
    RANSAC_SEED, RANSAC_CONFIDENCE, RANSAC_MAX_REFIT_ROUNDS, MIN_BOX_HEIGHT_PX,
)
from entities.camera import CameraIntrinsics, CameraPose, ProjectionMatrix
from entities.detection import PersonDetection, HeightModel
from errors import (
    InputError, DomainError, ConsensusError,
    DegenerateConfigurationError, DegenerateSystemError, ImplausibleGeometryError,
)
from systems.calibration import (
    CalibrationSolution, Formulation, assemble_system, solve_system, calibrate, keypoint_arrays,
)
from systems.geometry import (
    build_rotation, compose_projection, projection_coefficients,
    backproject_points, project_points,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RansacConfig:
    """
    Consensus parameters.

    With `adaptive` set, the loop stops once the iteration count exceeds
    log(1 - confidence) / log(1 - w^sample_size) for the best inlier ratio w.
    """
    inlier_threshold_px: float = RANSAC_THRESHOLD_PX
    iterations: int = RANSAC_ITERATIONS
    sample_size: int = RANSAC_SAMPLE_SIZE
    min_inliers: int = RANSAC_MIN_INLIERS
    rng_seed: int = RANSAC_SEED
    adaptive: bool = False
    confidence: float = RANSAC_CONFIDENCE

    def __post_init__(self):
        if not (math.isfinite(self.inlier_threshold_px) and self.inlier_threshold_px > 0):
            raise DomainError(f"Inlier threshold must be positive, got {self.inlier_threshold_px}")
        if self.iterations < 1:
            raise DomainError(f"Iterations must be positive, got {self.iterations}")
        if self.sample_size < 1:
            raise DomainError(f"Sample size must be at least 1, got {self.sample_size}")
        if self.min_inliers < self.sample_size:
            raise DomainError(
                f"min_inliers {self.min_inliers} must be at least the sample size {self.sample_size}"
            )
        if self.rng_seed < 0:
            raise DomainError(f"Seed must be non-negative, got {self.rng_seed}")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError(f"Confidence must lie in (0, 1), got {self.confidence}")


@dataclass(frozen=True, eq=False)
class RansacResult:
    """Refit solution with the inlier mask and per-detection head errors under its projection."""
    solution: CalibrationSolution
    inlier_mask: np.ndarray = field(repr=False)
    per_detection_error_px: np.ndarray = field(repr=False)
    iterations_run: int = 0
    refit_rounds: int = 0
    converged: bool = True

    @property
    def inlier_count(self) -> int:
        return int(np.count_nonzero(self.inlier_mask))

    def to_dict(self) -> Dict[str, Any]:
        errors = [e if math.isfinite(e) else None for e in self.per_detection_error_px.tolist()]
        return {
            'solution': self.solution.to_dict(),
            'inlier_count': self.inlier_count,
            'inlier_mask': self.inlier_mask.tolist(),
            'per_detection_error_px': errors,
            'iterations_run': self.iterations_run,
            'refit_rounds': self.refit_rounds,
            'converged': self.converged,
        }


# =============================================================================
# HEAD REPROJECTION ERROR
# =============================================================================

def head_errors(P: ProjectionMatrix, feet: np.ndarray, heads: np.ndarray,
                heights: HeightModel) -> np.ndarray:
    """
    Head reprojection errors for (N, 2) foot and head pixel arrays.

    Each foot is dropped onto the foot plane, lifted to the average head height
    and projected; degenerate feet get an infinite error.
    """
    ground = backproject_points(P, feet, heights.foot_plane_m)
    lifted = ground.copy()
    lifted[:, 2] = heights.avg_height_m
    predicted, _ = project_points(P, lifted)
    errors = np.linalg.norm(predicted - heads, axis=1)
    errors[~np.isfinite(errors)] = np.inf
    return errors


def reprojection_error(solution: CalibrationSolution, det: PersonDetection, heights: HeightModel,
                       P: Optional[ProjectionMatrix] = None) -> float:
    """
    Pixel distance between the predicted and observed head of one detection.

    Args:
        solution: Calibration whose projection is used when P is not given
        det: Detection to score
        heights: Average head height and foot plane
        P: Projection matrix overriding the solution's

    Returns:
        Error in pixels, or infinity when the foot pixel cannot reach the foot plane
    """
    if P is None:
        P = solution.projection
    feet, heads = keypoint_arrays([det])
    return float(head_errors(P, feet, heads, heights)[0])


# =============================================================================
# CONSENSUS LOOP
# =============================================================================

def _required_iterations(inlier_ratio: float, sample_size: int, confidence: float) -> float:
    """Standard stopping rule; infinite while no inliers are known."""
    good_sample = inlier_ratio ** sample_size
    if good_sample <= 0:
        return math.inf
    if good_sample >= 1:
        return 0.0
    return math.log(1.0 - confidence) / math.log(1.0 - good_sample)


def _candidate(camera_height_m: float, errors: np.ndarray, mask: np.ndarray,
               cfg: RansacConfig) -> Dict[str, Any]:
    """ConsensusError payload describing the candidate that fell short."""
    count = int(np.count_nonzero(mask))
    rms = float(math.sqrt(np.mean(errors[mask] ** 2))) if count else math.inf
    return {
        'camera_height_m': camera_height_m,
        'inlier_count': count,
        'inlier_rms_px': rms,
        'min_inliers': cfg.min_inliers,
    }


def ransac_calibrate(detections: Sequence[PersonDetection], K: CameraIntrinsics, pose: CameraPose,
                     heights: HeightModel, cfg: RansacConfig = RansacConfig(),
                     min_box_height_px: float = MIN_BOX_HEIGHT_PX) -> RansacResult:
    """
    Estimate the camera height robustly and refit it on the consensus set.

    Args:
        detections: Person detections, possibly with gross outliers
        K: Trusted intrinsics
        pose: Trusted tilt and roll
        heights: Average head height and foot plane
        cfg: Consensus parameters
        min_box_height_px: Boxes shorter than this are never sampled nor inliers

    Returns:
        RansacResult whose mask matches the threshold under the final projection

    Raises:
        InputError: If there are fewer usable detections than the sample size
        ConsensusError: If no candidate reaches min_inliers
    """
    n = len(detections)
    if n < cfg.sample_size:
        raise InputError(f"Need at least {cfg.sample_size} detections, got {n}")

    eligible = np.array([d.box_height_px >= min_box_height_px for d in detections], dtype=bool)
    candidates = np.flatnonzero(eligible)
    if len(candidates) < cfg.sample_size:
        raise InputError(
            f"Only {len(candidates)} detections reach {min_box_height_px} px; "
            f"need {cfg.sample_size}"
        )

    R = build_rotation(pose.tilt_deg, pose.roll_deg)
    coeffs = projection_coefficients(K, R)
    feet, heads = keypoint_arrays(detections)

    best = None  # (count, rms, camera_height, errors)
    iterations_run = 0
    for iteration in range(cfg.iterations):
        iterations_run = iteration + 1
        rng = np.random.default_rng([cfg.rng_seed, iteration])
        sample = rng.choice(candidates, size=cfg.sample_size, replace=False)

        A, b = assemble_system(feet[sample], heads[sample], coeffs, heights,
                               Formulation.VERTICAL_CONSTRAINED)
        try:
            x, _, rank = solve_system(A, b)
        except DegenerateSystemError:
            continue
        camera_height = float(x[0])
        if rank < A.shape[1] or not math.isfinite(camera_height) or camera_height <= heights.avg_height_m:
            continue

        P = compose_projection(K, R, camera_height)
        errors = head_errors(P, feet, heads, heights)
        errors[~eligible] = np.inf
        inliers = errors <= cfg.inlier_threshold_px
        count = int(np.count_nonzero(inliers))
        rms = float(math.sqrt(np.mean(errors[inliers] ** 2))) if count else math.inf

        if best is None or count > best[0] or (count == best[0] and rms < best[1]):
            best = (count, rms, camera_height, errors)

        if cfg.adaptive and best[0] > 0:
            needed = _required_iterations(best[0] / len(candidates), cfg.sample_size, cfg.confidence)
            if iterations_run >= needed:
                logger.info("Adaptive stop after %d iterations", iterations_run)
                break

    if best is None or best[0] < cfg.min_inliers:
        candidate = None
        if best is not None:
            candidate = _candidate(best[2], best[3], best[3] <= cfg.inlier_threshold_px, cfg)
        found = 0 if best is None else best[0]
        raise ConsensusError(
            f"Best candidate has {found} inliers; {cfg.min_inliers} required", candidate)

    logger.info("Consensus: %d/%d inliers at C_Z = %.4f m after %d iterations",
                best[0], n, best[2], iterations_run)

    # Refit on the inliers and re-verify until the mask stops changing
    mask = best[3] <= cfg.inlier_threshold_px
    converged = False
    rounds = 0
    solution = None
    errors = best[3]
    for rounds in range(1, RANSAC_MAX_REFIT_ROUNDS + 1):
        chosen = [detections[i] for i in np.flatnonzero(mask)]
        try:
            solution = calibrate(chosen, K, pose, heights, Formulation.VERTICAL_CONSTRAINED,
                                 min_box_height_px)
        except (DegenerateConfigurationError, ImplausibleGeometryError) as e:
            raise ConsensusError(f"Refit on {len(chosen)} inliers failed: {e}",
                                 _candidate(best[2], best[3], mask, cfg)) from e

        errors = head_errors(solution.projection, feet, heads, heights)
        errors[~eligible] = np.inf
        new_mask = errors <= cfg.inlier_threshold_px
        if np.array_equal(new_mask, mask):
            converged = True
            break
        mask = new_mask
        if np.count_nonzero(mask) < cfg.min_inliers:
            break

    if not converged and np.count_nonzero(mask) >= cfg.min_inliers:
        logger.warning("Inlier refit did not reach a fixed point in %d rounds", rounds)
        mask = errors <= cfg.inlier_threshold_px

    if np.count_nonzero(mask) < cfg.min_inliers:
        raise ConsensusError(
            f"Refit left {int(np.count_nonzero(mask))} inliers; {cfg.min_inliers} required",
            _candidate(solution.camera_height_m, errors, mask, cfg))

    return RansacResult(
        solution=solution,
        inlier_mask=mask,
        per_detection_error_px=errors,
        iterations_run=iterations_run,
        refit_rounds=rounds,
        converged=converged,
    )
