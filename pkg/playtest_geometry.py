#!/usr/bin/env python3
"""
Vantage - Geometry Playtest
Rotations, projection composition, forward projection and ground back-projection.
"""

import sys
import os
import math

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from constants import R_OVERHEAD
from entities.camera import CameraIntrinsics, PixelPoint, ProjectionMatrix, RotationMatrix, WorldPoint
from errors import DegenerateProjectionError, DomainError, HorizonDegenerateError
from systems.geometry import (
    backproject_points, backproject_to_plane, build_rotation, camera_center, compose_projection,
    decompose_projection, focal_from_fov, ground_homography, horizon_line, project, project_points,
    projection_coefficients, vertical_vanishing_point,
)


def make_camera(tilt=70.0, roll=0.0, height=8.0, focal=1500.0):
    K = CameraIntrinsics.from_image_size(focal, 1920, 1080)
    return K, compose_projection(K, build_rotation(tilt, roll), height)


# =============================================================================
# ROTATIONS
# =============================================================================

@pytest.mark.parametrize('tilt, roll', [(70.0, 0.0), (45.0, 3.0), (120.0, -12.5), (1.0, 400.0)])
def test_rotation_is_proper(tilt, roll):
    R = build_rotation(tilt, roll)
    assert R.orthonormality_residual() < 1e-12
    assert R.determinant() == pytest.approx(1.0, abs=1e-12)


def test_horizontal_camera_is_the_base_orientation():
    R = build_rotation(90.0, 0.0)
    np.testing.assert_allclose(R.matrix, np.array(R_OVERHEAD), atol=1e-15)


def test_optical_axis_follows_tilt():
    tilt = 70.0
    R = build_rotation(tilt, 0.0)
    t = math.radians(tilt)
    # Third row is the optical axis in world coordinates
    np.testing.assert_allclose(R.matrix[2], [0.0, math.sin(t), -math.cos(t)], atol=1e-12)


def test_roll_leaves_optical_axis_alone():
    np.testing.assert_allclose(build_rotation(70.0, 8.0).matrix[2], build_rotation(70.0, 0.0).matrix[2],
                               atol=1e-12)


def test_rotation_is_the_product_of_its_factors():
    pitch = math.radians(60.0 - 90.0)
    roll = math.radians(5.0)
    R_pitch = np.array([[1.0, 0.0, 0.0],
                        [0.0, math.cos(pitch), math.sin(pitch)],
                        [0.0, -math.sin(pitch), math.cos(pitch)]])
    R_roll = np.array([[math.cos(roll), math.sin(roll), 0.0],
                       [-math.sin(roll), math.cos(roll), 0.0],
                       [0.0, 0.0, 1.0]])
    expected = R_roll @ R_pitch @ np.array(R_OVERHEAD, dtype=float)
    np.testing.assert_allclose(build_rotation(60.0, 5.0).matrix, expected, atol=1e-15)


def test_full_turn_of_roll_is_no_roll():
    np.testing.assert_allclose(build_rotation(70.0, 360.0).matrix, build_rotation(70.0, 0.0).matrix,
                               atol=1e-15)


@pytest.mark.parametrize('tilt', [0.0, 180.0, -5.0, 200.0, float('nan')])
def test_tilt_outside_range_is_rejected(tilt):
    with pytest.raises(DomainError):
        build_rotation(tilt, 0.0)


def test_non_finite_roll_is_rejected():
    with pytest.raises(DomainError):
        build_rotation(70.0, float('inf'))


# =============================================================================
# PROJECTION MATRIX
# =============================================================================

def test_unit_camera_at_unit_height():
    K = CameraIntrinsics(1.0, (0.0, 0.0))
    P = compose_projection(K, RotationMatrix(np.eye(3)), 1.0)
    expected = np.hstack([np.eye(3), [[0.0], [0.0], [-1.0]]])
    np.testing.assert_array_equal(P.matrix, expected)


def test_coefficient_identities():
    K, P = make_camera(tilt=63.0, roll=2.0, height=11.0)
    a, b, c, d, e, f, g, h, i, j, k, l = P.coefficients()
    assert d == pytest.approx(-c, abs=1e-9)
    assert h == pytest.approx(-g, abs=1e-9)
    assert l == pytest.approx(-k, abs=1e-9)


def test_coefficients_do_not_depend_on_height():
    K = CameraIntrinsics.from_image_size(1200.0, 1280, 720)
    R = build_rotation(75.0, -1.0)
    base = projection_coefficients(K, R)
    np.testing.assert_allclose(compose_projection(K, R, 3.0).coefficients(), base, atol=1e-9)
    np.testing.assert_allclose(compose_projection(K, R, 25.0).coefficients(), base, atol=1e-9)


def test_non_positive_height_is_rejected():
    K = CameraIntrinsics.from_image_size(1500.0, 1920, 1080)
    with pytest.raises(DomainError):
        compose_projection(K, build_rotation(70.0, 0.0), 0.0)
    with pytest.raises(DomainError):
        compose_projection(K, build_rotation(70.0, 0.0), -2.0)


def test_camera_center_is_above_origin():
    _, P = make_camera(height=8.0, roll=5.0)
    center = camera_center(P)
    assert center.X == pytest.approx(0.0, abs=1e-9)
    assert center.Y == pytest.approx(0.0, abs=1e-9)
    assert center.Z == pytest.approx(8.0, abs=1e-9)


def test_decompose_recovers_factors():
    K, P = make_camera(tilt=72.0, roll=-3.0, height=6.5, focal=1800.0)
    R = build_rotation(72.0, -3.0)
    for scale in (1.0, -0.37, 4.2):
        K2, R2, t2 = decompose_projection(P.scaled(scale))
        assert K2.focal_length_px == pytest.approx(1800.0, rel=1e-9)
        assert K2.principal_point[0] == pytest.approx(960.0, abs=1e-6)
        assert K2.principal_point[1] == pytest.approx(540.0, abs=1e-6)
        np.testing.assert_allclose(R2.matrix, R.matrix, atol=1e-9)
        np.testing.assert_allclose(t2, -R.matrix @ np.array([0.0, 0.0, 6.5]), atol=1e-7)


def test_focal_from_fov():
    assert focal_from_fov(90.0, 1920) == pytest.approx(960.0)
    with pytest.raises(DomainError):
        focal_from_fov(0.0, 1920)


# =============================================================================
# FORWARD PROJECTION
# =============================================================================

def test_projection_ignores_positive_scale():
    _, P = make_camera(tilt=66.0, roll=-2.0, height=9.0)
    pt = WorldPoint(4.0, 27.0, 1.2)
    base = project(P, pt)
    for factor in (0.001, 3.5, 1e4):
        px = project(P.scaled(factor), pt)
        assert px.u == pytest.approx(base.u, rel=1e-12)
        assert px.v == pytest.approx(base.v, rel=1e-12)


def test_point_on_optical_axis_hits_principal_point():
    _, P = make_camera(tilt=70.0, roll=4.0)
    axis = build_rotation(70.0, 4.0).matrix[2]
    point = np.array([0.0, 0.0, 8.0]) + 30.0 * axis
    px = project(P, WorldPoint.from_array(point))
    assert px.u == pytest.approx(960.0, abs=1e-9)
    assert px.v == pytest.approx(540.0, abs=1e-9)


def test_farther_ground_points_rise_in_the_image():
    _, P = make_camera()
    near = project(P, WorldPoint(0.0, 15.0, 0.0))
    far = project(P, WorldPoint(0.0, 40.0, 0.0))
    assert far.v < near.v


def test_point_in_principal_plane_is_degenerate():
    _, P = make_camera(tilt=90.0)
    # Level with the camera and sideways: lambda is zero
    with pytest.raises(DegenerateProjectionError):
        project(P, WorldPoint(5.0, 0.0, 8.0))


def test_project_points_marks_degenerate_rows():
    _, P = make_camera(tilt=90.0)
    pixels, lam = project_points(P, np.array([[0.0, 20.0, 0.0], [5.0, 0.0, 8.0]]))
    assert np.all(np.isfinite(pixels[0]))
    assert np.all(np.isnan(pixels[1]))
    assert lam[0] > 0


# =============================================================================
# BACK-PROJECTION
# =============================================================================

def test_ground_point_survives_projection_and_back():
    _, P = make_camera(tilt=68.0, roll=1.5)
    point = WorldPoint(3.2, 27.5, 0.0)
    back = backproject_to_plane(P, project(P, point), 0.0)
    assert back.X == pytest.approx(3.2, abs=1e-9)
    assert back.Y == pytest.approx(27.5, abs=1e-9)
    assert back.Z == 0.0


def test_backprojection_onto_raised_plane():
    _, P = make_camera()
    head = WorldPoint(-2.0, 30.0, 1.7018)
    back = backproject_to_plane(P, project(P, head), 1.7018)
    assert (back.X, back.Y) == pytest.approx((-2.0, 30.0), abs=1e-9)


def test_pixel_above_horizon_is_degenerate():
    _, P = make_camera(tilt=70.0)
    with pytest.raises(HorizonDegenerateError):
        backproject_to_plane(P, PixelPoint(960.0, -200.0), 0.0)


def test_vectorized_backprojection_returns_nan_rows():
    _, P = make_camera(tilt=70.0)
    points = backproject_points(P, np.array([[960.0, 800.0], [960.0, -200.0]]), 0.0)
    assert np.all(np.isfinite(points[0]))
    assert np.all(np.isnan(points[1]))


# =============================================================================
# PLANE AND HORIZON HELPERS
# =============================================================================

def test_ground_homography_agrees_with_projection():
    _, P = make_camera(tilt=66.0, roll=2.0)
    H = ground_homography(P, 0.0)
    image = H @ np.array([4.0, 22.0, 1.0])
    px = project(P, WorldPoint(4.0, 22.0, 0.0))
    assert image[0] / image[2] == pytest.approx(px.u, abs=1e-9)
    assert image[1] / image[2] == pytest.approx(px.v, abs=1e-9)


def test_horizon_passes_through_horizontal_vanishing_points():
    _, P = make_camera(tilt=72.0, roll=6.0)
    line = horizon_line(P)
    assert math.hypot(line[0], line[1]) == pytest.approx(1.0)
    for direction in ([1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [-0.3, 1.0, 0.0]):
        vp = P.matrix[:, :3] @ np.array(direction)
        assert line @ vp / np.linalg.norm(vp) == pytest.approx(0.0, abs=1e-9)


def test_horizon_of_level_camera_is_principal_row():
    _, P = make_camera(tilt=90.0)
    line = horizon_line(P)
    # a*u + b*v + c = 0 for every u means the line v = v0
    assert abs(line[0]) < 1e-12
    assert -line[2] / line[1] == pytest.approx(540.0)


def test_vertical_vanishing_point_lines_up_heads_and_feet():
    _, P = make_camera(tilt=70.0, roll=3.0)
    vp = vertical_vanishing_point(P)
    assert vp is not None
    foot = project(P, WorldPoint(2.0, 25.0, 0.0)).as_array()
    head = project(P, WorldPoint(2.0, 25.0, 1.8)).as_array()
    cross = np.cross(np.append(head - foot, 0.0), np.append(vp.as_array() - foot, 0.0))
    assert abs(cross[2]) < 1e-6 * np.linalg.norm(vp.as_array() - foot)


def test_level_camera_has_no_vertical_vanishing_point():
    _, P = make_camera(tilt=90.0)
    assert vertical_vanishing_point(P) is None


def test_raw_matrix_height_comes_from_center():
    _, P = make_camera(height=9.5)
    anonymous = ProjectionMatrix(P.matrix * 2.0)
    np.testing.assert_allclose(anonymous.coefficients(), 2.0 * np.array(P.coefficients()), atol=1e-6)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
