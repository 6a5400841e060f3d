"""
Camera Height Calibration for Vantage.
Builds and solves the linear system that recovers the camera height and the
3-D positions of people from their foot and head pixels.

Each observed pixel (u, v) of a point at known height Z gives two rows:

    (d - u l) C_Z + (a - u i) X + (b - u j) Y = Z (u k - c)
    (h - v l) C_Z + (e - v i) X + (f - v j) Y = Z (v k - g)

The literal form gives every foot and every head its own (X, Y) unknowns and
has a one-dimensional nullspace. The vertical form puts each head directly
above its foot, which makes the system full column rank for two or more people.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from constants import (
    FORMULATION_PAPER_LITERAL, FORMULATION_VERTICAL,
    MIN_BOX_HEIGHT_PX, RANK_RTOL, CONDITION_WARN,
)
from entities.camera import (
    CameraIntrinsics, CameraPose, ProjectionCoefficients, ProjectionMatrix, WorldPoint,
)
from entities.detection import PersonDetection, HeightModel
from errors import (
    InputError, DegenerateSystemError, DegenerateConfigurationError, ImplausibleGeometryError,
)
from systems.geometry import build_rotation, compose_projection, projection_coefficients, project_points

logger = logging.getLogger(__name__)


class Formulation(Enum):
    """Which linear system to assemble."""
    PAPER_LITERAL = FORMULATION_PAPER_LITERAL    # independent head unknowns
    VERTICAL_CONSTRAINED = FORMULATION_VERTICAL  # head shares the foot's X, Y


@dataclass(frozen=True, eq=False)
class CalibrationSolution:
    """
    Recovered camera height and person positions.

    `residual_rms_px` is the pixel RMS of the foot and head reprojections under
    `projection`; `algebraic_rms` is the RMS of the linear system residual.
    """
    camera_height_m: float
    person_positions: Tuple[Tuple[WorldPoint, WorldPoint], ...]
    residual_rms_px: float
    formulation: Formulation
    projection: ProjectionMatrix = field(repr=False)
    rank: int = 0
    column_count: int = 0
    condition_number: float = 0.0
    algebraic_rms: float = 0.0
    plausible: bool = True
    detection_count: int = 0

    @property
    def nullspace_dim(self) -> int:
        return self.column_count - self.rank

    def to_dict(self) -> Dict[str, Any]:
        return {
            'camera_height_m': self.camera_height_m,
            'formulation': self.formulation.value,
            'residual_rms_px': self.residual_rms_px,
            'algebraic_rms': self.algebraic_rms,
            'rank': self.rank,
            'column_count': self.column_count,
            'nullspace_dim': self.nullspace_dim,
            'condition_number': self.condition_number if math.isfinite(self.condition_number) else None,
            'plausible': self.plausible,
            'detection_count': self.detection_count,
            'projection_matrix': self.projection.to_list(),
            'person_positions': [
                {'foot': [foot.X, foot.Y, foot.Z], 'head': [head.X, head.Y, head.Z]}
                for foot, head in self.person_positions
            ],
        }


# =============================================================================
# DETECTION FILTERING
# =============================================================================

def filter_detections(detections: Sequence[PersonDetection],
                      min_box_height_px: float = MIN_BOX_HEIGHT_PX) -> List[PersonDetection]:
    """Drop detections whose box is shorter than the floor."""
    kept = [det for det in detections if det.box_height_px >= min_box_height_px]
    dropped = len(detections) - len(kept)
    if dropped:
        logger.warning("Dropped %d detections below %g px", dropped, min_box_height_px)
    return kept


def keypoint_arrays(detections: Sequence[PersonDetection]) -> Tuple[np.ndarray, np.ndarray]:
    feet = np.array([[d.foot_px.u, d.foot_px.v] for d in detections], dtype=np.float64)
    heads = np.array([[d.head_px.u, d.head_px.v] for d in detections], dtype=np.float64)
    return feet.reshape(-1, 2), heads.reshape(-1, 2)


# =============================================================================
# SYSTEM ASSEMBLY
# =============================================================================

def _pixel_rows(pixels: np.ndarray, plane_z: float,
                coeffs: ProjectionCoefficients) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Row blocks for N pixels at a known height.

    Returns:
        (c_z, xy, rhs): (2N,) C_Z coefficients, (2N, 2) X/Y coefficients and
        (2N,) right-hand sides, interleaved as u-row then v-row per pixel.
    """
    a, b, c, d, e, f, g, h, i, j, k, l = coeffs
    u = pixels[:, 0]
    v = pixels[:, 1]

    c_z = np.empty(2 * len(pixels))
    c_z[0::2] = d - u * l
    c_z[1::2] = h - v * l

    xy = np.empty((2 * len(pixels), 2))
    xy[0::2, 0] = a - u * i
    xy[0::2, 1] = b - u * j
    xy[1::2, 0] = e - v * i
    xy[1::2, 1] = f - v * j

    rhs = np.empty(2 * len(pixels))
    rhs[0::2] = plane_z * (u * k - c)
    rhs[1::2] = plane_z * (v * k - g)
    return c_z, xy, rhs


def assemble_system(feet: np.ndarray, heads: np.ndarray, coeffs: ProjectionCoefficients,
                    heights: HeightModel, formulation: Formulation) -> Tuple[np.ndarray, np.ndarray]:
    """
    Assemble A x = b from (N, 2) foot and head pixel arrays.

    Rows come four per person: foot u, foot v, head u, head v. Column 0 is C_Z.
    The literal form then has foot X, Y, head X, Y per person (4N + 1 columns);
    the vertical form has one X, Y per person (2N + 1 columns).
    """
    feet = np.asarray(feet, dtype=np.float64).reshape(-1, 2)
    heads = np.asarray(heads, dtype=np.float64).reshape(-1, 2)
    n = len(feet)
    if n == 0:
        raise InputError("Cannot build a calibration system from zero detections")
    if len(heads) != n:
        raise InputError(f"Got {n} foot pixels but {len(heads)} head pixels")

    foot_cz, foot_xy, foot_rhs = _pixel_rows(feet, heights.foot_plane_m, coeffs)
    head_cz, head_xy, head_rhs = _pixel_rows(heads, heights.avg_height_m, coeffs)

    literal = formulation is Formulation.PAPER_LITERAL
    columns = 4 * n + 1 if literal else 2 * n + 1
    A = np.zeros((4 * n, columns))
    b = np.zeros(4 * n)

    for person in range(n):
        foot_rows = slice(4 * person, 4 * person + 2)
        head_rows = slice(4 * person + 2, 4 * person + 4)
        pair = slice(2 * person, 2 * person + 2)

        A[foot_rows, 0] = foot_cz[pair]
        A[head_rows, 0] = head_cz[pair]
        b[foot_rows] = foot_rhs[pair]
        b[head_rows] = head_rhs[pair]

        if literal:
            foot_col = 1 + 4 * person
            head_col = foot_col + 2
        else:
            foot_col = head_col = 1 + 2 * person
        A[foot_rows, foot_col:foot_col + 2] = foot_xy[pair]
        A[head_rows, head_col:head_col + 2] = head_xy[pair]

    return A, b


def build_system_literal(detections: Sequence[PersonDetection], P_coeffs: ProjectionCoefficients,
                         heights: HeightModel) -> Tuple[np.ndarray, np.ndarray]:
    """4N x (4N + 1) system with unknowns [C_Z, X_g, Y_g, X_t, Y_t, ...]."""
    if not detections:
        raise InputError("Cannot build a calibration system from zero detections")
    feet, heads = keypoint_arrays(detections)
    return assemble_system(feet, heads, P_coeffs, heights, Formulation.PAPER_LITERAL)


def build_system_vertical(detections: Sequence[PersonDetection], P_coeffs: ProjectionCoefficients,
                          heights: HeightModel) -> Tuple[np.ndarray, np.ndarray]:
    """4N x (2N + 1) system with unknowns [C_Z, X_0, Y_0, X_1, Y_1, ...]."""
    if not detections:
        raise InputError("Cannot build a calibration system from zero detections")
    feet, heads = keypoint_arrays(detections)
    return assemble_system(feet, heads, P_coeffs, heights, Formulation.VERTICAL_CONSTRAINED)


# =============================================================================
# SOLVER
# =============================================================================

def solve_system(A: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, float, int]:
    """
    Minimum-norm least-squares solve.

    Returns:
        (x, residual_rms, rank) where residual_rms = |Ax - b| / sqrt(rows) and
        rank counts singular values above 1e-10 of the largest

    Raises:
        InputError: If A is empty
        DegenerateSystemError: If A is all zeros
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.size == 0:
        raise InputError("Cannot solve an empty system")
    if not np.any(A):
        raise DegenerateSystemError(f"System matrix of shape {A.shape} is all zeros")

    x, _, _, singular = np.linalg.lstsq(A, b, rcond=RANK_RTOL)
    rank = int(np.sum(singular > RANK_RTOL * singular[0]))
    residual_rms = float(np.linalg.norm(A @ x - b) / math.sqrt(A.shape[0]))
    return x, residual_rms, rank


def _condition_number(A: np.ndarray) -> float:
    singular = np.linalg.svd(A, compute_uv=False)
    if singular[-1] == 0:
        return math.inf
    return float(singular[0] / singular[-1])


def _pixel_rms(P: ProjectionMatrix, feet_world: np.ndarray, heads_world: np.ndarray,
               feet: np.ndarray, heads: np.ndarray) -> float:
    projected, _ = project_points(P, np.vstack([feet_world, heads_world]))
    residuals = np.linalg.norm(projected - np.vstack([feet, heads]), axis=1)
    if not np.all(np.isfinite(residuals)):
        return math.inf
    return float(math.sqrt(np.mean(residuals ** 2)))


# =============================================================================
# CALIBRATION
# =============================================================================

def calibrate(detections: Sequence[PersonDetection], K: CameraIntrinsics, pose: CameraPose,
              heights: HeightModel, formulation: Formulation = Formulation.VERTICAL_CONSTRAINED,
              min_box_height_px: float = MIN_BOX_HEIGHT_PX) -> CalibrationSolution:
    """
    Recover the camera height and person positions from detections.

    Args:
        detections: Person detections (boxes or keypoints)
        K: Trusted camera intrinsics
        pose: Trusted tilt and roll; any height on it is ignored
        heights: Average head height and foot plane
        formulation: Literal or vertical system
        min_box_height_px: Detections with shorter boxes are dropped first

    Returns:
        CalibrationSolution with the composed projection matrix

    Raises:
        InputError: If no detection survives the box-height floor
        DegenerateConfigurationError: If the vertical system is rank-deficient
        ImplausibleGeometryError: If the recovered camera is not above the average head
    """
    formulation = Formulation(formulation)
    kept = filter_detections(detections, min_box_height_px)
    if not kept:
        raise InputError("No detections left to calibrate with")

    R = build_rotation(pose.tilt_deg, pose.roll_deg)
    coeffs = projection_coefficients(K, R)
    feet, heads = keypoint_arrays(kept)
    A, b = assemble_system(feet, heads, coeffs, heights, formulation)
    x, algebraic_rms, rank = solve_system(A, b)
    columns = A.shape[1]
    condition = _condition_number(A)
    literal = formulation is Formulation.PAPER_LITERAL

    if rank < columns:
        if not literal:
            raise DegenerateConfigurationError(
                f"Vertical system has rank {rank} of {columns} columns", rank, columns)
        logger.warning("Literal system has rank %d of %d columns (nullspace dimension %d); "
                       "returning the minimum-norm solution", rank, columns, columns - rank)
    elif condition > CONDITION_WARN:
        logger.warning("Calibration system is ill-conditioned (condition number %.3e)", condition)

    camera_height = float(x[0])
    plausible = camera_height > heights.avg_height_m
    if not plausible:
        message = (f"Recovered camera height {camera_height:.4f} m is not above "
                   f"the average height {heights.avg_height_m} m")
        if not literal or camera_height <= 0:
            raise ImplausibleGeometryError(message)
        logger.warning("%s; literal solution flagged implausible", message)

    n = len(kept)
    if literal:
        blocks = x[1:].reshape(n, 4)
        foot_xy, head_xy = blocks[:, 0:2], blocks[:, 2:4]
    else:
        foot_xy = head_xy = x[1:].reshape(n, 2)

    feet_world = np.column_stack([foot_xy, np.full(n, heights.foot_plane_m)])
    heads_world = np.column_stack([head_xy, np.full(n, heights.avg_height_m)])
    positions = tuple(
        (WorldPoint.from_array(f), WorldPoint.from_array(h))
        for f, h in zip(feet_world, heads_world)
    )

    P = compose_projection(K, R, camera_height)
    pixel_rms = _pixel_rms(P, feet_world, heads_world, feet, heads)
    logger.info("Calibrated %s from %d detections: C_Z = %.4f m, pixel RMS %.4f",
                formulation.value, n, camera_height, pixel_rms)

    return CalibrationSolution(
        camera_height_m=camera_height,
        person_positions=positions,
        residual_rms_px=pixel_rms,
        formulation=formulation,
        projection=P,
        rank=rank,
        column_count=columns,
        condition_number=condition,
        algebraic_rms=algebraic_rms,
        plausible=plausible,
        detection_count=n,
    )
