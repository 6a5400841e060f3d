"""
Point Set Alignment for Vantage.
Least-squares rigid registration of estimated world points onto ground truth,
plus the correspondence error statistics reported after alignment.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from constants import COLLINEAR_RTOL
from entities.camera import RotationMatrix, WorldPoint
from entities.detection import PositionRecord
from errors import InputError, DegenerateFitError, ParseError

logger = logging.getLogger(__name__)

PointsLike = Union[np.ndarray, Sequence[WorldPoint], Sequence[Sequence[float]]]


def as_point_array(points: PointsLike) -> np.ndarray:
    """Coerce a list of WorldPoints or 3-sequences to an (N, 3) array."""
    rows = [p.as_array() if isinstance(p, WorldPoint) else p for p in points]
    array = np.asarray(rows, dtype=np.float64)
    if array.size == 0:
        return array.reshape(0, 3)
    if array.ndim != 2 or array.shape[1] != 3:
        raise InputError(f"Expected N x 3 points, got shape {array.shape}")
    return array


# =============================================================================
# TRANSFORMS
# =============================================================================

@dataclass(frozen=True, eq=False)
class RigidTransform:
    """
    x -> R x + t with R a proper rotation.

    Usage:
        T = fit_rigid(estimated, truth)
        aligned = T.apply(estimated)
    """
    rotation: RotationMatrix
    translation: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        t.setflags(write=False)
        object.__setattr__(self, 'translation', t)

    @classmethod
    def identity(cls) -> 'RigidTransform':
        return cls(RotationMatrix(np.eye(3)), np.zeros(3))

    def apply(self, points: PointsLike) -> np.ndarray:
        array = as_point_array(points)
        return array @ self.rotation.matrix.T + self.translation

    def apply_point(self, point: WorldPoint) -> WorldPoint:
        return WorldPoint.from_array(self.apply([point])[0])

    def inverse(self) -> 'RigidTransform':
        r_t = self.rotation.matrix.T
        return RigidTransform(RotationMatrix(r_t), -r_t @ self.translation)

    def compose(self, other: 'RigidTransform') -> 'RigidTransform':
        """The transform applying `other` first, then this one."""
        R = self.rotation.matrix @ other.rotation.matrix
        t = self.rotation.matrix @ other.translation + self.translation
        return RigidTransform(RotationMatrix(R), t)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rotation': self.rotation.matrix.tolist(),
            'translation': self.translation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: str = '<alignment>') -> 'RigidTransform':
        try:
            return cls(RotationMatrix(data['rotation']), data['translation'])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(source, None, f"Invalid rigid transform: {e}") from e


@dataclass(frozen=True, eq=False)
class SimilarityTransform:
    """x -> s R x + t; diagnostics only."""
    scale: float
    rotation: RotationMatrix
    translation: np.ndarray = field(repr=False)

    def apply(self, points: PointsLike) -> np.ndarray:
        array = as_point_array(points)
        return self.scale * (array @ self.rotation.matrix.T) + np.asarray(self.translation)


@dataclass(frozen=True)
class CorrespondenceReport:
    """Per-point Euclidean errors after alignment; std is the population std."""
    mean_error_m: float
    std_error_m: float
    max_error_m: float
    per_point_error_m: Tuple[float, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mean_error_m': self.mean_error_m,
            'std_error_m': self.std_error_m,
            'max_error_m': self.max_error_m,
            'per_point_error_m': list(self.per_point_error_m),
        }


# =============================================================================
# FITTING
# =============================================================================

def _centered_pair(source: PointsLike, target: PointsLike):
    src = as_point_array(source)
    dst = as_point_array(target)
    if len(src) != len(dst):
        raise InputError(f"Source has {len(src)} points but target has {len(dst)}")
    if len(src) < 3:
        raise DegenerateFitError(f"Need at least 3 correspondences, got {len(src)}")

    src_mean = src.mean(axis=0)
    dst_mean = dst.mean(axis=0)
    src_c = src - src_mean
    dst_c = dst - dst_mean

    spread = np.linalg.svd(src_c, compute_uv=False)
    if spread[0] == 0 or spread[1] < COLLINEAR_RTOL * spread[0]:
        raise DegenerateFitError("Source points are collinear")
    return src_c, dst_c, src_mean, dst_mean


def _best_rotation(src_c: np.ndarray, dst_c: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rotation maximising trace(R^T H); returns (R, singular values, reflection fix)."""
    H = src_c.T @ dst_c
    U, S, Vt = np.linalg.svd(H)
    fix = np.ones(3)
    if np.linalg.det(Vt.T @ U.T) < 0:
        # Flip the axis of the smallest singular value
        fix[2] = -1.0
    R = Vt.T @ np.diag(fix) @ U.T
    return R, S, fix


def fit_rigid(source: PointsLike, target: PointsLike) -> RigidTransform:
    """
    Least-squares rotation and translation taking source onto target.

    Args:
        source: Estimated points (list of WorldPoint or N x 3)
        target: Matching ground-truth points

    Returns:
        RigidTransform minimising sum |R s_i + t - t_i|^2 with det(R) = +1

    Raises:
        DegenerateFitError: Fewer than 3 points or collinear source points
    """
    src_c, dst_c, src_mean, dst_mean = _centered_pair(source, target)
    R, _, fix = _best_rotation(src_c, dst_c)
    if fix[2] < 0:
        logger.debug("Reflection corrected in rigid fit")
    t = dst_mean - R @ src_mean
    return RigidTransform(RotationMatrix(R), t)


def fit_similarity(source: PointsLike, target: PointsLike) -> SimilarityTransform:
    """Rigid fit plus a uniform scale."""
    src_c, dst_c, src_mean, dst_mean = _centered_pair(source, target)
    R, S, fix = _best_rotation(src_c, dst_c)
    variance = float(np.sum(src_c ** 2))
    scale = float(np.sum(S * fix) / variance)
    t = dst_mean - scale * (R @ src_mean)
    return SimilarityTransform(scale, RotationMatrix(R), t)


def correspondence_errors(transform: RigidTransform, source: PointsLike,
                          target: PointsLike) -> CorrespondenceReport:
    """
    Distances between transformed source points and their targets.

    Raises:
        InputError: If the lists are empty or differ in length
    """
    src = as_point_array(source)
    dst = as_point_array(target)
    if len(src) == 0:
        raise InputError("No correspondences to measure")
    if len(src) != len(dst):
        raise InputError(f"Source has {len(src)} points but target has {len(dst)}")

    errors = np.linalg.norm(transform.apply(src) - dst, axis=1)
    report = CorrespondenceReport(
        mean_error_m=float(np.mean(errors)),
        std_error_m=float(np.std(errors)),
        max_error_m=float(np.max(errors)),
        per_point_error_m=tuple(float(e) for e in errors),
    )
    logger.info("Correspondence error over %d points: mean %.4f m, std %.4f m, max %.4f m",
                len(errors), report.mean_error_m, report.std_error_m, report.max_error_m)
    return report


def match_positions(estimated: Sequence[PositionRecord],
                    truth: Sequence[PositionRecord]) -> Tuple[List[int], np.ndarray, np.ndarray]:
    """
    Pair located records with their truth by record id.

    Returns:
        (record_ids, estimated_points, truth_points) over records located in both
    """
    truth_by_id = {r.record_id: r for r in truth if r.is_ok}
    ids, src, dst = [], [], []
    for record in estimated:
        match = truth_by_id.get(record.record_id)
        if record.is_ok and match is not None:
            ids.append(record.record_id)
            src.append([record.X, record.Y, record.Z])
            dst.append([match.X, match.Y, match.Z])
    unmatched = sum(1 for r in estimated if r.is_ok) - len(ids)
    if unmatched:
        logger.warning("%d located records have no truth counterpart", unmatched)
    return ids, np.array(src, dtype=np.float64).reshape(-1, 3), np.array(dst, dtype=np.float64).reshape(-1, 3)
