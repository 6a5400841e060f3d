"""
Pinhole Camera Geometry for Vantage.
Rotation construction, projection-matrix composition, forward projection,
and back-projection of pixels onto horizontal world planes.

Rotation convention (world -> camera):
    R = R_roll(roll) @ R_pitch(tilt - 90) @ R_overhead

    R_overhead = [[1, 0,  0],      optical axis along world +Y,
                  [0, 0, -1],      image u along world +X,
                  [0, 1,  0]]      image v along world -Z

    R_pitch(p) = [[1,       0,      0],     about the camera x-axis,
                  [0,  cos p,  sin p],      positive p raises the optical axis
                  [0, -sin p,  cos p]]

    R_roll(r)  = [[ cos r, sin r, 0],       about the optical axis
                  [-sin r, cos r, 0],
                  [     0,     0, 1]]

So tilt 0 looks straight down, tilt 90 looks at the horizon.
"""

import math
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from constants import (
    R_OVERHEAD, TILT_MIN_DEG, TILT_MAX_DEG,
    PROJECTION_EPS, HORIZON_EPS,
)
from entities.camera import (
    CameraIntrinsics, RotationMatrix, ProjectionMatrix,
    ProjectionCoefficients, WorldPoint, PixelPoint,
)
from errors import DomainError, DegenerateProjectionError, HorizonDegenerateError


# =============================================================================
# ROTATIONS
# =============================================================================

def _rotation_pitch(pitch_rad: float) -> np.ndarray:
    c, s = math.cos(pitch_rad), math.sin(pitch_rad)
    return np.array([[1.0, 0.0, 0.0],
                     [0.0, c, s],
                     [0.0, -s, c]])


def _rotation_roll(roll_rad: float) -> np.ndarray:
    c, s = math.cos(roll_rad), math.sin(roll_rad)
    return np.array([[c, s, 0.0],
                     [-s, c, 0.0],
                     [0.0, 0.0, 1.0]])


def build_rotation(tilt_deg: float, roll_deg: float) -> RotationMatrix:
    """
    Build the world-to-camera rotation from tilt and roll.

    Args:
        tilt_deg: Tilt from nadir in degrees, strictly inside (0, 180)
        roll_deg: Roll about the optical axis in degrees

    Returns:
        RotationMatrix R_roll @ R_pitch @ R_overhead with pitch = tilt - 90

    Raises:
        DomainError: If tilt is out of range
    """
    if not (TILT_MIN_DEG < tilt_deg < TILT_MAX_DEG):
        raise DomainError(f"Tilt must lie in ({TILT_MIN_DEG}, {TILT_MAX_DEG}) degrees, got {tilt_deg}")
    if not math.isfinite(roll_deg):
        raise DomainError(f"Roll must be finite, got {roll_deg}")

    pitch_rad = math.radians(tilt_deg - 90.0)
    roll_rad = math.radians(math.fmod(roll_deg, 360.0))
    overhead = np.array(R_OVERHEAD, dtype=np.float64)
    return RotationMatrix(_rotation_roll(roll_rad) @ _rotation_pitch(pitch_rad) @ overhead)


# =============================================================================
# PROJECTION MATRIX
# =============================================================================

def compose_projection(K: CameraIntrinsics, R: RotationMatrix, camera_height_m: float) -> ProjectionMatrix:
    """
    Compose P = K[R|t] for a camera at (0, 0, C_Z), with t = -R C_o.

    Args:
        K: Camera intrinsics
        R: World-to-camera rotation
        camera_height_m: C_Z, strictly positive

    Returns:
        ProjectionMatrix whose coefficients satisfy d = -c, h = -g, l = -k

    Raises:
        DomainError: If the camera height is not positive
    """
    if not (math.isfinite(camera_height_m) and camera_height_m > 0):
        raise DomainError(f"Camera height must be positive, got {camera_height_m}")

    M = K.matrix @ R.matrix
    # K t = -K R (0, 0, C_Z) = -C_Z * (KR)[:, 2]
    fourth = -camera_height_m * M[:, 2]
    return ProjectionMatrix(np.column_stack([M, fourth]), camera_height_m)


def projection_coefficients(K: CameraIntrinsics, R: RotationMatrix) -> ProjectionCoefficients:
    """Named coefficients a..l of K[R|t]; they do not depend on C_Z."""
    return compose_projection(K, R, 1.0).coefficients()


def camera_center(P: ProjectionMatrix) -> WorldPoint:
    return WorldPoint.from_array(P.camera_center())


def decompose_projection(P: ProjectionMatrix) -> Tuple[CameraIntrinsics, RotationMatrix, np.ndarray]:
    """
    Split P into intrinsics, rotation and translation with an RQ decomposition.

    K comes back with a positive diagonal and K[2, 2] = 1, and det(R) = +1.
    The global scale of P is divided out of t, so K[R|t] equals P up to scale.
    """
    M = P.matrix[:, :3]
    K, R = linalg.rq(M)

    # Flip paired signs so the diagonal of K is positive
    fix = np.diag(np.sign(np.diag(K)))
    fix[fix == 0] = 1.0
    K = K @ fix
    R = fix @ R

    scale = K[2, 2]
    K = K / scale
    t = np.linalg.solve(K, P.matrix[:, 3]) / scale
    if np.linalg.det(R) < 0:
        R = -R
        t = -t

    focal = (K[0, 0] + K[1, 1]) / 2.0
    intrinsics = CameraIntrinsics(float(focal), (float(K[0, 2]), float(K[1, 2])))
    return intrinsics, RotationMatrix(R), t


def focal_from_fov(fov_deg: float, width_px: float) -> float:
    """Focal length in pixels for a horizontal field of view."""
    if not (0.0 < fov_deg < 180.0):
        raise DomainError(f"Field of view must lie in (0, 180) degrees, got {fov_deg}")
    return (width_px / 2.0) / math.tan(math.radians(fov_deg) / 2.0)


# =============================================================================
# FORWARD PROJECTION
# =============================================================================

def project_points(P: ProjectionMatrix, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Project an (N, 3) array of world points.

    Returns:
        (pixels, lam): (N, 2) pixel coordinates and the (N,) homogeneous scale.
        Rows with |lam| below the projection tolerance are NaN.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    homogeneous = np.column_stack([points, np.ones(len(points))])
    image = homogeneous @ P.matrix.T
    lam = image[:, 2]

    tolerance = PROJECTION_EPS * np.maximum(
        1.0, np.linalg.norm(P.matrix[2]) * np.linalg.norm(homogeneous, axis=1))
    degenerate = np.abs(lam) < tolerance
    with np.errstate(divide='ignore', invalid='ignore'):
        pixels = image[:, :2] / lam[:, None]
    pixels[degenerate] = np.nan
    return pixels, lam


def project(P: ProjectionMatrix, pt: WorldPoint) -> PixelPoint:
    """
    Project a world point to a pixel.

    Raises:
        DegenerateProjectionError: If the point lies on the camera's principal plane
    """
    pixels, lam = project_points(P, pt.as_array()[None, :])
    if np.isnan(pixels[0, 0]):
        raise DegenerateProjectionError(f"Point {pt} projects with lambda = {lam[0]:.3e}")
    return PixelPoint.from_array(pixels[0])


# =============================================================================
# BACK-PROJECTION
# =============================================================================

def _rays(P: ProjectionMatrix, pixels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Camera center and forward ray directions through (N, 2) pixels."""
    M = P.matrix[:, :3]
    center = np.linalg.solve(M, -P.matrix[:, 3])
    homogeneous = np.column_stack([pixels, np.ones(len(pixels))])
    directions = np.linalg.solve(M, homogeneous.T).T
    # Forward means positive lambda for the properly oriented P
    directions *= np.sign(np.linalg.det(M))
    return center, directions


def backproject_points(P: ProjectionMatrix, pixels: np.ndarray, plane_z: float = 0.0) -> np.ndarray:
    """
    Intersect the rays through (N, 2) pixels with the plane Z = plane_z.

    Returns:
        (N, 3) world points; rows whose ray is parallel to the plane or meets
        it behind the camera are NaN.
    """
    pixels = np.atleast_2d(np.asarray(pixels, dtype=np.float64))
    center, directions = _rays(P, pixels)
    dz = directions[:, 2]
    parallel = np.abs(dz) < HORIZON_EPS * np.linalg.norm(directions, axis=1)

    with np.errstate(divide='ignore', invalid='ignore'):
        s = (plane_z - center[2]) / dz
    invalid = parallel | ~(s > 0)

    points = center[None, :] + s[:, None] * directions
    points[:, 2] = plane_z
    points[invalid] = np.nan
    return points


def backproject_to_plane(P: ProjectionMatrix, px: PixelPoint, plane_z: float = 0.0) -> WorldPoint:
    """
    Back-project a pixel onto the horizontal plane Z = plane_z.

    Args:
        P: Projection matrix
        px: Pixel to back-project
        plane_z: Height of the plane in meters

    Returns:
        World point on the plane whose projection is px

    Raises:
        HorizonDegenerateError: If the ray is parallel to the plane or meets it behind the camera
    """
    center, directions = _rays(P, px.as_array()[None, :])
    direction = directions[0]
    dz = direction[2]
    if abs(dz) < HORIZON_EPS * np.linalg.norm(direction):
        raise HorizonDegenerateError(f"Ray through {px} is parallel to plane Z = {plane_z}")

    s = (plane_z - center[2]) / dz
    if not s > 0:
        raise HorizonDegenerateError(f"Ray through {px} meets plane Z = {plane_z} behind the camera")

    point = center + s * direction
    return WorldPoint(float(point[0]), float(point[1]), float(plane_z))


# =============================================================================
# PLANE AND HORIZON HELPERS
# =============================================================================

def ground_homography(P: ProjectionMatrix, plane_z: float = 0.0) -> np.ndarray:
    """3x3 map from (X, Y, 1) on the plane Z = plane_z to homogeneous pixels."""
    m = P.matrix
    return np.column_stack([m[:, 0], m[:, 1], plane_z * m[:, 2] + m[:, 3]])


def horizon_line(P: ProjectionMatrix) -> np.ndarray:
    """
    Image line (a, b, c) with a*u + b*v + c = 0 through the vanishing points of horizontal directions.

    Normalised so that a^2 + b^2 = 1.
    """
    line = np.cross(P.matrix[:, 0], P.matrix[:, 1])
    norm = math.hypot(line[0], line[1])
    if norm == 0:
        raise DomainError("Horizon is at infinity for a nadir-looking camera")
    return line / norm


def vertical_vanishing_point(P: ProjectionMatrix) -> Optional[PixelPoint]:
    """Image of the vertical direction, or None when it lies at infinity."""
    column = P.matrix[:, 2]
    if abs(column[2]) < PROJECTION_EPS * np.linalg.norm(column):
        return None
    return PixelPoint(float(column[0] / column[2]), float(column[1] / column[2]))
