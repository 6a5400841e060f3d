#!/usr/bin/env python3
"""
Vantage - Calibration Playtest
Linear system assembly, rank diagnostics and camera height recovery.
"""

import sys
import os
import logging

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from entities.camera import PixelPoint, WorldPoint
from entities.detection import HeightModel, PersonDetection
from errors import (
    DegenerateConfigurationError, DegenerateSystemError, ImplausibleGeometryError, InputError,
)
from systems.calibration import (
    Formulation, build_system_literal, build_system_vertical, calibrate, filter_detections,
    solve_system,
)
from systems.geometry import build_rotation, project, projection_coefficients
from systems.simulate import CameraSpec, NoiseSpec, PersonSpec, SceneSpec, generate

HEIGHTS = HeightModel(1.7018, 0.0)


def make_scene(seed=0, roll=1.0, count=20, height_std=0.0, pixel_std=0.0):
    spec = SceneSpec(
        camera=CameraSpec(focal_px=1500.0, tilt_deg=70.0, roll_deg=roll, camera_height_m=8.0),
        persons=PersonSpec(count=count, height_std_m=height_std),
        noise=NoiseSpec(pixel_std=pixel_std),
        rng_seed=seed,
    )
    return generate(spec)


def truth_feet(scene):
    return {p.record_id: p.foot for p in scene.truth.persons if p.visible}


def solve(scene, formulation=Formulation.VERTICAL_CONSTRAINED):
    camera = scene.spec.camera
    return calibrate(scene.detections, camera.intrinsics(), camera.pose(), HEIGHTS, formulation)


# =============================================================================
# SYSTEM ASSEMBLY
# =============================================================================

def test_system_shapes():
    scene = make_scene()
    dets = scene.detections
    n = len(dets)
    camera = scene.spec.camera
    coeffs = projection_coefficients(camera.intrinsics(), build_rotation(70.0, 1.0))

    A, b = build_system_literal(dets, coeffs, HEIGHTS)
    assert A.shape == (4 * n, 4 * n + 1)
    assert b.shape == (4 * n,)

    A, b = build_system_vertical(dets, coeffs, HEIGHTS)
    assert A.shape == (4 * n, 2 * n + 1)


def test_foot_rows_have_zero_rhs_on_ground_plane():
    scene = make_scene()
    camera = scene.spec.camera
    coeffs = projection_coefficients(camera.intrinsics(), build_rotation(70.0, 1.0))
    _, b = build_system_vertical(scene.detections, coeffs, HEIGHTS)
    assert np.all(b[0::4] == 0.0)
    assert np.all(b[1::4] == 0.0)


def test_literal_rows_rebuild_from_their_pixels():
    scene = make_scene(seed=6)
    dets = scene.detections[:3]
    heights = HeightModel(1.7018, 0.05)
    coeffs = projection_coefficients(scene.spec.camera.intrinsics(), build_rotation(70.0, 1.0))
    a, b, c, d, e, f, g, h, i, j, k, l = coeffs
    A, rhs = build_system_literal(dets, coeffs, heights)

    for person, det in enumerate(dets):
        foot_col = 1 + 4 * person
        for offset, (px, z, col) in enumerate([(det.foot_px, heights.foot_plane_m, foot_col),
                                               (det.head_px, heights.avg_height_m, foot_col + 2)]):
            u_row = A[4 * person + 2 * offset]
            v_row = A[4 * person + 2 * offset + 1]
            expected_u = np.zeros(A.shape[1])
            expected_u[0] = d - px.u * l
            expected_u[col:col + 2] = (a - px.u * i, b - px.u * j)
            expected_v = np.zeros(A.shape[1])
            expected_v[0] = h - px.v * l
            expected_v[col:col + 2] = (e - px.v * i, f - px.v * j)
            np.testing.assert_allclose(u_row, expected_u, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(v_row, expected_v, rtol=1e-12, atol=1e-12)
            assert rhs[4 * person + 2 * offset] == pytest.approx(z * (px.u * k - c), rel=1e-12)
            assert rhs[4 * person + 2 * offset + 1] == pytest.approx(z * (px.v * k - g), rel=1e-12)


def test_empty_detections_are_rejected():
    coeffs = projection_coefficients(CameraSpec().intrinsics(), build_rotation(70.0, 0.0))
    with pytest.raises(InputError):
        build_system_vertical([], coeffs, HEIGHTS)
    with pytest.raises(InputError):
        build_system_literal([], coeffs, HEIGHTS)


# =============================================================================
# SOLVER
# =============================================================================

def test_solve_full_rank_system():
    A = np.array([[2.0, 0.0], [0.0, 4.0], [1.0, 1.0]])
    x_true = np.array([1.5, -0.5])
    x, rms, rank = solve_system(A, A @ x_true)
    np.testing.assert_allclose(x, x_true, atol=1e-12)
    assert rms < 1e-12
    assert rank == 2


def test_solve_returns_minimum_norm_for_rank_deficient_system():
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    x, _, rank = solve_system(A, np.array([2.0, 4.0]))
    assert rank == 1
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-12)


def test_all_zero_system_is_degenerate():
    with pytest.raises(DegenerateSystemError):
        solve_system(np.zeros((4, 3)), np.ones(4))


def test_empty_system_is_rejected():
    with pytest.raises(InputError):
        solve_system(np.zeros((0, 3)), np.zeros(0))


# =============================================================================
# VERTICAL FORMULATION
# =============================================================================

@pytest.mark.parametrize('seed', [0, 1, 2, 3, 4])
def test_noiseless_scene_is_recovered_exactly(seed):
    scene = make_scene(seed)
    solution = solve(scene)
    assert abs(solution.camera_height_m - 8.0) / 8.0 < 1e-6
    assert solution.rank == solution.column_count
    assert solution.plausible

    feet = truth_feet(scene)
    for det, (foot, head) in zip(scene.detections, solution.person_positions):
        truth = feet[det.record_id]
        assert abs(foot.X - truth.X) < 1e-6
        assert abs(foot.Y - truth.Y) < 1e-6
        assert foot.Z == 0.0
        assert (head.X, head.Y) == (foot.X, foot.Y)
        assert head.Z == pytest.approx(1.7018)


def test_noiseless_residuals_vanish():
    solution = solve(make_scene(seed=7))
    assert solution.residual_rms_px < 1e-6
    assert solution.algebraic_rms < 1e-6
    assert np.isfinite(solution.condition_number)
    assert solution.detection_count == len(solution.person_positions)


def test_height_scales_with_average_height_prior():
    scene = make_scene(seed=3)
    camera = scene.spec.camera
    tall = calibrate(scene.detections, camera.intrinsics(), camera.pose(), HeightModel(1.8288, 0.0))
    assert tall.camera_height_m == pytest.approx(8.0 * 1.8288 / 1.7018, rel=1e-6)


def test_whole_solution_scales_with_height_prior():
    scene = make_scene(seed=9, height_std=0.05, pixel_std=0.5)
    camera = scene.spec.camera
    prior = HeightModel(1.7018, 0.04)
    base = calibrate(scene.detections, camera.intrinsics(), camera.pose(), prior)
    scaled = calibrate(scene.detections, camera.intrinsics(), camera.pose(), prior.scaled(1.5))
    assert scaled.camera_height_m == pytest.approx(1.5 * base.camera_height_m, rel=1e-9)
    for (foot, _), (scaled_foot, _) in zip(base.person_positions, scaled.person_positions):
        assert scaled_foot.X == pytest.approx(1.5 * foot.X, rel=1e-9, abs=1e-9)
        assert scaled_foot.Y == pytest.approx(1.5 * foot.Y, rel=1e-9, abs=1e-9)


def test_noisy_scene_stays_close():
    scene = make_scene(seed=11, height_std=0.05, pixel_std=0.5)
    solution = solve(scene)
    assert abs(solution.camera_height_m - 8.0) / 8.0 < 0.05
    assert solution.residual_rms_px > 0


def test_coincident_head_and_foot_pixels_are_degenerate():
    dets = [
        PersonDetection(0, (90.0 + 40 * i, 480.0, 110.0 + 40 * i, 520.0),
                        foot=PixelPoint(100.0 + 40 * i, 500.0), head=PixelPoint(100.0 + 40 * i, 500.0))
        for i in range(5)
    ]
    camera = CameraSpec()
    with pytest.raises(DegenerateConfigurationError) as info:
        calibrate(dets, camera.intrinsics(), camera.pose(), HEIGHTS)
    assert info.value.rank < info.value.column_count


def test_collinear_persons_are_reported():
    # Every person stands on the camera's ground track
    dets = []
    scene = make_scene(seed=5, roll=0.0)
    P = scene.projection
    for y in (18.0, 25.0, 33.0, 41.0):
        foot = project(P, WorldPoint(0.0, y, 0.0))
        head = project(P, WorldPoint(0.0, y, 1.7018))
        dets.append(PersonDetection(0, (foot.u - 10, head.v, foot.u + 10, foot.v), foot=foot, head=head))
    camera = scene.spec.camera
    try:
        solution = calibrate(dets, camera.intrinsics(), camera.pose(), HEIGHTS)
    except (DegenerateConfigurationError, ImplausibleGeometryError):
        return
    assert np.isfinite(solution.condition_number)
    assert solution.camera_height_m > 0


# =============================================================================
# LITERAL FORMULATION
# =============================================================================

def test_literal_system_has_one_dimensional_nullspace(caplog):
    scene = make_scene(seed=2)
    n = len(scene.detections)
    with caplog.at_level(logging.WARNING):
        solution = solve(scene, Formulation.PAPER_LITERAL)
    assert solution.rank == 4 * n
    assert solution.column_count == 4 * n + 1
    assert solution.nullspace_dim == 1
    assert any('rank' in r.getMessage() for r in caplog.records)


def test_literal_minimum_norm_height_is_not_a_camera_height(caplog):
    scene = make_scene(seed=4)
    with caplog.at_level(logging.WARNING):
        solution = solve(scene, Formulation.PAPER_LITERAL)
    assert 0.0 < solution.camera_height_m < HEIGHTS.avg_height_m
    assert not solution.plausible


def test_formulation_accepts_string_values():
    assert Formulation('paper_literal') is Formulation.PAPER_LITERAL
    assert Formulation('vertical_constrained') is Formulation.VERTICAL_CONSTRAINED


# =============================================================================
# DETECTION FILTERING
# =============================================================================

def test_short_boxes_are_dropped(caplog):
    dets = [
        PersonDetection(0, (0.0, 0.0, 4.0, 6.0)),
        PersonDetection(0, (10.0, 0.0, 20.0, 40.0)),
    ]
    with caplog.at_level(logging.WARNING):
        kept = filter_detections(dets, 8.0)
    assert kept == [dets[1]]
    assert any('Dropped 1' in r.getMessage() for r in caplog.records)


def test_everything_below_floor_is_an_input_error():
    camera = CameraSpec()
    dets = [PersonDetection(0, (0.0, 0.0, 4.0, 6.0))]
    with pytest.raises(InputError):
        calibrate(dets, camera.intrinsics(), camera.pose(), HEIGHTS)


def test_box_defaults_for_foot_and_head():
    det = PersonDetection(frame_id=0, bbox=(100.0, 40.0, 130.0, 120.0))
    assert det.foot_px == PixelPoint(115.0, 120.0)
    assert det.head_px == PixelPoint(115.0, 40.0)
    assert det.box_height_px == 80.0


def test_solution_report_fields():
    report = solve(make_scene(seed=1)).to_dict()
    for key in ('camera_height_m', 'projection_matrix', 'rank', 'column_count',
                'residual_rms_px', 'formulation', 'person_positions'):
        assert key in report
    assert report['formulation'] == 'vertical_constrained'
    assert len(report['projection_matrix']) == 3


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
