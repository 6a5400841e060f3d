"""
Camera value types for Vantage.
Intrinsics, pose, rotation, projection matrix, and world/pixel points.

Conventions:
    World frame is Z-up with the ground plane at Z = 0 and the camera at (0, 0, C_Z).
    Image frame has u to the right, v down, origin at the top-left pixel corner.
    Angles are degrees at every public boundary.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from constants import TILT_MIN_DEG, TILT_MAX_DEG, PRINCIPAL_POINT_BAND
from errors import DomainError


def _frozen_array(values, shape: Tuple[int, ...]) -> np.ndarray:
    """Copy values into a read-only float64 array of the given shape."""
    array = np.array(values, dtype=np.float64).reshape(shape)
    if not np.all(np.isfinite(array)):
        raise DomainError(f"Matrix entries must be finite, got {array.tolist()}")
    array.setflags(write=False)
    return array


# =============================================================================
# POINTS
# =============================================================================

@dataclass(frozen=True)
class WorldPoint:
    """A 3-D point in world coordinates (meters)."""
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.X, self.Y, self.Z)):
            raise DomainError(f"World point must be finite, got ({self.X}, {self.Y}, {self.Z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> 'WorldPoint':
        return cls(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class PixelPoint:
    """A 2-D image point (pixels)."""
    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise DomainError(f"Pixel point must be finite, got ({self.u}, {self.v})")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> 'PixelPoint':
        return cls(float(values[0]), float(values[1]))


# =============================================================================
# INTRINSICS AND POSE
# =============================================================================

@dataclass(frozen=True)
class CameraIntrinsics:
    """
    Focal length and principal point (square pixels, no skew).

    Usage:
        K = CameraIntrinsics.from_image_size(1500.0, 1920, 1080)
        K.matrix  # 3x3
    """
    focal_length_px: float
    principal_point: Tuple[float, float]
    image_size: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if not (math.isfinite(self.focal_length_px) and self.focal_length_px > 0):
            raise DomainError(f"Focal length must be positive, got {self.focal_length_px}")
        u0, v0 = self.principal_point
        if not (math.isfinite(u0) and math.isfinite(v0)):
            raise DomainError(f"Principal point must be finite, got {self.principal_point}")
        if self.image_size is not None:
            width, height = self.image_size
            if not (0 <= u0 <= PRINCIPAL_POINT_BAND * width and
                    0 <= v0 <= PRINCIPAL_POINT_BAND * height):
                raise DomainError(
                    f"Principal point {self.principal_point} outside sanity band "
                    f"for image {width}x{height}"
                )

    @classmethod
    def from_image_size(cls, focal_length_px: float, width: int, height: int,
                        principal_point: Optional[Tuple[float, float]] = None) -> 'CameraIntrinsics':
        """Build intrinsics, defaulting the principal point to the image center."""
        if principal_point is None:
            principal_point = (width / 2.0, height / 2.0)
        return cls(float(focal_length_px),
                   (float(principal_point[0]), float(principal_point[1])),
                   (int(width), int(height)))

    @property
    def matrix(self) -> np.ndarray:
        f = self.focal_length_px
        u0, v0 = self.principal_point
        return np.array([[f, 0.0, u0],
                         [0.0, f, v0],
                         [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraPose:
    """Tilt from nadir, roll about the optical axis, and the camera height once known."""
    tilt_deg: float
    roll_deg: float
    camera_height_m: Optional[float] = None

    def __post_init__(self):
        if not (TILT_MIN_DEG < self.tilt_deg < TILT_MAX_DEG):
            raise DomainError(
                f"Tilt must lie in ({TILT_MIN_DEG}, {TILT_MAX_DEG}) degrees, got {self.tilt_deg}"
            )
        if not math.isfinite(self.roll_deg):
            raise DomainError(f"Roll must be finite, got {self.roll_deg}")
        if self.camera_height_m is not None and not self.camera_height_m > 0:
            raise DomainError(f"Camera height must be positive, got {self.camera_height_m}")

    @property
    def pitch_deg(self) -> float:
        """Off-nadir pitch: tilt - 90."""
        return self.tilt_deg - 90.0

    def with_height(self, camera_height_m: float) -> 'CameraPose':
        return CameraPose(self.tilt_deg, self.roll_deg, camera_height_m)


# =============================================================================
# MATRICES
# =============================================================================

@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """A proper 3x3 rotation (world -> camera)."""
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen_array(self.matrix, (3, 3)))

    def orthonormality_residual(self) -> float:
        """Max-abs entry of R^T R - I."""
        return float(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(3))))

    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))


class ProjectionCoefficients(NamedTuple):
    """Named entries a..l of a projection matrix with the camera height factored out of column 4."""
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float
    i: float
    j: float
    k: float
    l: float


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """
    A 3x4 pinhole projection P = K[R|t].

    `camera_height_m` is the C_Z the fourth column was built with; when it is
    None it is recovered from the camera center.
    """
    matrix: np.ndarray = field(repr=False)
    camera_height_m: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen_array(self.matrix, (3, 4)))

    def camera_center(self) -> np.ndarray:
        """World camera center: the right null vector of P, dehomogenised."""
        _, _, vt = np.linalg.svd(self.matrix)
        center = vt[-1]
        if abs(center[3]) < 1e-15:
            raise DomainError("Camera center is at infinity")
        return center[:3] / center[3]

    def coefficients(self) -> ProjectionCoefficients:
        """Named coefficients; column 4 divided by C_Z so that d = -c, h = -g, l = -k."""
        height = self.camera_height_m
        if height is None:
            height = float(self.camera_center()[2])
        if height == 0:
            raise DomainError("Camera height is zero; column 4 cannot be factored")
        m = self.matrix
        return ProjectionCoefficients(
            m[0, 0], m[0, 1], m[0, 2], m[0, 3] / height,
            m[1, 0], m[1, 1], m[1, 2], m[1, 3] / height,
            m[2, 0], m[2, 1], m[2, 2], m[2, 3] / height,
        )

    def scaled(self, factor: float) -> 'ProjectionMatrix':
        return ProjectionMatrix(self.matrix * factor, self.camera_height_m)

    def to_list(self):
        return self.matrix.tolist()
