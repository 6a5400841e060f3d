#!/usr/bin/env python3
"""
Vantage - Consensus Playtest
Robust camera height estimation with gross outliers in the detections.
"""

import sys
import os

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from entities.camera import PixelPoint, WorldPoint
from entities.detection import HeightModel, PersonDetection
from errors import ConsensusError, DomainError, InputError
from systems import ransac as ransac_module
from systems.calibration import calibrate, keypoint_arrays
from systems.geometry import project
from systems.ransac import RansacConfig, head_errors, ransac_calibrate, reprojection_error
from systems.simulate import CameraSpec, NoiseSpec, PersonSpec, SceneSpec, generate

HEIGHTS = HeightModel(1.7018, 0.0)


def make_scene(seed=0, outliers=0.0, pixel_std=0.0, height_std=0.0):
    spec = SceneSpec(
        camera=CameraSpec(focal_px=1500.0, tilt_deg=70.0, roll_deg=1.0, camera_height_m=8.0),
        persons=PersonSpec(count=20, height_std_m=height_std),
        noise=NoiseSpec(pixel_std=pixel_std, outlier_fraction=outliers),
        rng_seed=seed,
    )
    return generate(spec)


def run(scene, cfg=None):
    camera = scene.spec.camera
    return ransac_calibrate(scene.detections, camera.intrinsics(), camera.pose(), HEIGHTS,
                            cfg or RansacConfig())


def outlier_flags(scene):
    kinds = {p.record_id: p.outlier for p in scene.truth.persons if p.visible}
    return np.array([kinds[d.record_id] is not None for d in scene.detections])


# =============================================================================
# CLEAN SCENES
# =============================================================================

def test_clean_scene_keeps_everyone():
    scene = make_scene(seed=1)
    result = run(scene)
    assert result.inlier_mask.all()
    assert result.converged
    assert abs(result.solution.camera_height_m - 8.0) / 8.0 < 1e-6
    assert np.all(result.per_detection_error_px < 1e-6)


def test_adaptive_stop_on_clean_scene():
    result = run(make_scene(seed=2), RansacConfig(adaptive=True))
    assert result.iterations_run < 500
    assert result.inlier_mask.all()


# =============================================================================
# OUTLIERS
# =============================================================================

@pytest.mark.parametrize('seed', [0, 3, 8])
def test_outliers_do_not_move_the_height(seed):
    scene = make_scene(seed=seed, outliers=0.2)
    result = run(scene)
    flags = outlier_flags(scene)
    assert result.inlier_mask[~flags].all()
    assert abs(result.solution.camera_height_m - 8.0) / 8.0 < 0.03


def test_mask_matches_threshold_under_final_projection():
    scene = make_scene(seed=5, outliers=0.2, pixel_std=1.0, height_std=0.03)
    cfg = RansacConfig(inlier_threshold_px=5.0)
    result = run(scene, cfg)
    feet, heads = keypoint_arrays(scene.detections)
    errors = head_errors(result.solution.projection, feet, heads, HEIGHTS)
    np.testing.assert_array_equal(result.inlier_mask, errors <= 5.0)
    np.testing.assert_allclose(result.per_detection_error_px, errors)


def test_same_seed_same_result():
    scene = make_scene(seed=4, outliers=0.2, pixel_std=1.0)
    first = run(scene, RansacConfig(rng_seed=9))
    second = run(scene, RansacConfig(rng_seed=9))
    assert first.solution.camera_height_m == second.solution.camera_height_m
    np.testing.assert_array_equal(first.inlier_mask, second.inlier_mask)
    assert first.iterations_run == second.iterations_run


def test_wider_threshold_never_loses_inliers():
    scene = make_scene(seed=5, outliers=0.2, pixel_std=1.0, height_std=0.03)
    counts = [run(scene, RansacConfig(inlier_threshold_px=t)).inlier_count for t in (3.0, 5.0, 8.0, 15.0, 40.0)]
    assert counts == sorted(counts)


def test_result_report_fields():
    report = run(make_scene(seed=6)).to_dict()
    assert report['inlier_count'] == len(report['inlier_mask'])
    assert report['solution']['camera_height_m'] == pytest.approx(8.0, rel=1e-6)


# =============================================================================
# FAILURES
# =============================================================================

def test_unreachable_min_inliers_is_a_consensus_error():
    scene = make_scene(seed=0)
    with pytest.raises(ConsensusError) as info:
        run(scene, RansacConfig(min_inliers=len(scene.detections) + 1))
    assert info.value.best_candidate is not None


def test_consensus_failure_reports_a_candidate_dict():
    scene = make_scene(seed=0)
    with pytest.raises(ConsensusError) as info:
        run(scene, RansacConfig(min_inliers=len(scene.detections) + 1))
    candidate = info.value.best_candidate
    assert set(candidate) == {'camera_height_m', 'inlier_count', 'inlier_rms_px', 'min_inliers'}
    assert candidate['inlier_count'] == len(scene.detections)


@pytest.mark.parametrize('refit_rounds', [1, 10])
def test_refit_that_sheds_inliers_is_a_consensus_error(monkeypatch, refit_rounds):
    # Refits solved against an inflated prior land far above the true camera
    real_calibrate = ransac_module.calibrate

    def inflated(dets, K, pose, heights, *args):
        return real_calibrate(dets, K, pose, heights.scaled(1.6), *args)

    monkeypatch.setattr(ransac_module, 'calibrate', inflated)
    monkeypatch.setattr(ransac_module, 'RANSAC_MAX_REFIT_ROUNDS', refit_rounds)
    with pytest.raises(ConsensusError) as info:
        run(make_scene(seed=1))
    candidate = info.value.best_candidate
    assert isinstance(candidate, dict)
    assert candidate['inlier_count'] < candidate['min_inliers']
    assert candidate['camera_height_m'] == pytest.approx(8.0 * 1.6, rel=1e-6)


def test_too_few_detections_is_an_input_error():
    det = PersonDetection(0, (100.0, 400.0, 120.0, 480.0))
    camera = CameraSpec()
    with pytest.raises(InputError):
        ransac_calibrate([det], camera.intrinsics(), camera.pose(), HEIGHTS, RansacConfig())


@pytest.mark.parametrize('kwargs', [
    {'inlier_threshold_px': 0.0},
    {'iterations': 0},
    {'sample_size': 0},
    {'min_inliers': 1, 'sample_size': 2},
    {'rng_seed': -1},
    {'confidence': 1.0},
])
def test_invalid_config_is_rejected(kwargs):
    with pytest.raises(DomainError):
        RansacConfig(**kwargs)


# =============================================================================
# HEAD REPROJECTION ERROR
# =============================================================================

def test_exact_person_has_no_error():
    scene = make_scene(seed=3)
    camera = scene.spec.camera
    solution = calibrate(scene.detections, camera.intrinsics(), camera.pose(), HEIGHTS)
    for det in scene.detections[:5]:
        assert reprojection_error(solution, det, HEIGHTS) < 1e-6


def test_taller_person_error_grows_with_pixel_height():
    scene = make_scene(seed=3)
    camera = scene.spec.camera
    solution = calibrate(scene.detections, camera.intrinsics(), camera.pose(), HEIGHTS)
    P = scene.projection
    pixel_heights, errors = [], []
    for y in (45.0, 32.0, 24.0, 18.0, 14.0):
        foot = project(P, WorldPoint(0.0, y, 0.0))
        head = project(P, WorldPoint(0.0, y, HEIGHTS.avg_height_m + 0.1))
        det = PersonDetection(0, (foot.u - 10, head.v, foot.u + 10, foot.v), foot=foot, head=head)
        pixel_heights.append(det.box_height_px)
        errors.append(reprojection_error(solution, det, HEIGHTS))
    assert pixel_heights == sorted(pixel_heights)
    assert all(e > 0 for e in errors)
    assert all(a < b for a, b in zip(errors, errors[1:]))


def test_foot_above_horizon_is_never_an_inlier():
    scene = make_scene(seed=3)
    det = PersonDetection(0, (950.0, -300.0, 970.0, -200.0),
                          foot=PixelPoint(960.0, -200.0), head=PixelPoint(960.0, -300.0))
    camera = scene.spec.camera
    solution = calibrate(scene.detections, camera.intrinsics(), camera.pose(), HEIGHTS)
    assert reprojection_error(solution, det, HEIGHTS) == float('inf')


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
