#!/usr/bin/env python3
"""
Vantage - Alignment Playtest
Rigid registration of estimated positions onto ground truth.
"""

import sys
import os
import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from entities.camera import RotationMatrix, WorldPoint
from entities.detection import PositionRecord
from errors import DegenerateFitError, InputError, ParseError
from systems.alignment import (
    RigidTransform, correspondence_errors, fit_rigid, fit_similarity, match_positions,
)


def random_motion(seed):
    rng = np.random.default_rng(seed)
    R = Rotation.from_rotvec(rng.uniform(-2.0, 2.0, 3)).as_matrix()
    t = rng.uniform(-20.0, 20.0, 3)
    return R, t


# =============================================================================
# RIGID FIT
# =============================================================================

@pytest.mark.parametrize('seed', range(5))
def test_recovers_rotation_and_translation(seed):
    R, t = random_motion(seed)
    points = np.random.default_rng(100 + seed).uniform(-30.0, 30.0, (50, 3))
    transform = fit_rigid(points, points @ R.T + t)
    np.testing.assert_allclose(transform.rotation.matrix, R, atol=1e-9)
    np.testing.assert_allclose(transform.translation, t, atol=1e-9)


def test_identical_sets_give_identity():
    points = [WorldPoint(0.0, 0.0, 0.0), WorldPoint(4.0, 1.0, 0.0), WorldPoint(1.0, 5.0, 0.0)]
    transform = fit_rigid(points, points)
    np.testing.assert_allclose(transform.rotation.matrix, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(transform.translation, np.zeros(3), atol=1e-12)


def test_planar_sets_recover_in_plane_motion():
    angle = math.radians(37.0)
    R = np.array([[math.cos(angle), -math.sin(angle), 0.0],
                  [math.sin(angle), math.cos(angle), 0.0],
                  [0.0, 0.0, 1.0]])
    rng = np.random.default_rng(3)
    points = np.column_stack([rng.uniform(-10, 10, (12, 2)), np.zeros(12)])
    transform = fit_rigid(points, points @ R.T + np.array([2.0, -1.0, 0.0]))
    np.testing.assert_allclose(transform.rotation.matrix, R, atol=1e-9)
    assert transform.rotation.determinant() == pytest.approx(1.0)


def test_mirrored_target_still_gives_a_rotation():
    rng = np.random.default_rng(8)
    points = np.column_stack([rng.uniform(-10, 10, (10, 2)), np.zeros(10)])
    mirrored = points * np.array([-1.0, 1.0, 1.0])
    transform = fit_rigid(points, mirrored)
    assert transform.rotation.determinant() == pytest.approx(1.0, abs=1e-12)
    assert transform.rotation.orthonormality_residual() < 1e-12


def test_fit_ignores_point_order():
    R, t = random_motion(11)
    rng = np.random.default_rng(12)
    points = rng.uniform(-30.0, 30.0, (40, 3))
    target = points @ R.T + t + rng.normal(0.0, 0.5, (40, 3))
    order = rng.permutation(40)
    first = fit_rigid(points, target)
    second = fit_rigid(points[order], target[order])
    np.testing.assert_allclose(second.rotation.matrix, first.rotation.matrix, atol=1e-9)
    np.testing.assert_allclose(second.translation, first.translation, atol=1e-9)


@pytest.mark.parametrize('seed', range(4))
def test_fit_is_never_worse_than_doing_nothing(seed):
    rng = np.random.default_rng(200 + seed)
    points = rng.uniform(-25.0, 25.0, (15, 3))
    target = rng.uniform(-25.0, 25.0, (15, 3))
    fitted = fit_rigid(points, target)
    fitted_sse = np.sum((fitted.apply(points) - target) ** 2)
    identity_sse = np.sum((RigidTransform.identity().apply(points) - target) ** 2)
    assert fitted_sse <= identity_sse + 1e-9


def test_too_few_points_is_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_rigid([[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [1, 0, 0]])


def test_collinear_points_are_degenerate():
    line = [[float(i), 2.0 * i, 0.0] for i in range(6)]
    with pytest.raises(DegenerateFitError):
        fit_rigid(line, line)


def test_mismatched_lengths_are_an_input_error():
    with pytest.raises(InputError):
        fit_rigid(np.zeros((4, 3)), np.zeros((5, 3)))


# =============================================================================
# TRANSFORMS
# =============================================================================

def test_inverse_undoes_transform():
    R, t = random_motion(11)
    transform = RigidTransform(RotationMatrix(R), t)
    round_trip = transform.inverse().compose(transform)
    np.testing.assert_allclose(round_trip.rotation.matrix, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(round_trip.translation, np.zeros(3), atol=1e-12)


def test_compose_applies_other_first():
    shift = RigidTransform(RotationMatrix(np.eye(3)), [1.0, 0.0, 0.0])
    quarter = RigidTransform(RotationMatrix([[0, -1, 0], [1, 0, 0], [0, 0, 1]]), np.zeros(3))
    point = quarter.compose(shift).apply_point(WorldPoint(0.0, 0.0, 0.0))
    assert (point.X, point.Y, point.Z) == pytest.approx((0.0, 1.0, 0.0))


def test_transform_dict_is_validated():
    transform = RigidTransform.identity()
    assert RigidTransform.from_dict(transform.to_dict()).to_dict() == transform.to_dict()
    with pytest.raises(ParseError):
        RigidTransform.from_dict({'rotation': [[1, 0], [0, 1]], 'translation': [0, 0, 0]})
    with pytest.raises(ParseError):
        RigidTransform.from_dict({'translation': [0, 0, 0]})


def test_similarity_recovers_scale():
    R, t = random_motion(4)
    points = np.random.default_rng(4).uniform(-5.0, 5.0, (20, 3))
    similarity = fit_similarity(points, 1.3 * points @ R.T + t)
    assert similarity.scale == pytest.approx(1.3, rel=1e-9)
    np.testing.assert_allclose(similarity.apply(points), 1.3 * points @ R.T + t, atol=1e-9)


# =============================================================================
# CORRESPONDENCE ERRORS
# =============================================================================

def test_error_statistics():
    source = np.zeros((3, 3))
    target = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    report = correspondence_errors(RigidTransform.identity(), source, target)
    assert report.mean_error_m == pytest.approx(2.0)
    assert report.std_error_m == pytest.approx(math.sqrt(2.0 / 3.0))
    assert report.max_error_m == pytest.approx(3.0)
    assert report.per_point_error_m == pytest.approx((1.0, 2.0, 3.0))


def test_aligned_sets_have_zero_error():
    R, t = random_motion(2)
    points = np.random.default_rng(2).uniform(-10.0, 10.0, (15, 3))
    target = points @ R.T + t
    report = correspondence_errors(fit_rigid(points, target), points, target)
    assert report.max_error_m < 1e-9


def test_empty_correspondences_are_an_input_error():
    with pytest.raises(InputError):
        correspondence_errors(RigidTransform.identity(), [], [])


# =============================================================================
# MATCHING RECORDS
# =============================================================================

def test_match_by_record_id():
    estimated = [
        PositionRecord(0, 0, 'person', 1.0, 2.0, 0.0),
        PositionRecord(1, 0, 'person', status='degenerate'),
        PositionRecord(2, 0, 'vehicle', 5.0, 6.0, 0.0),
        PositionRecord(9, 0, 'person', 7.0, 7.0, 0.0),
    ]
    truth = [
        PositionRecord(2, 0, 'vehicle', 5.5, 6.5, 0.0),
        PositionRecord(0, 0, 'person', 1.5, 2.5, 0.0),
        PositionRecord(1, 0, 'person', 3.0, 3.0, 0.0),
    ]
    ids, src, dst = match_positions(estimated, truth)
    assert ids == [0, 2]
    np.testing.assert_allclose(src, [[1.0, 2.0, 0.0], [5.0, 6.0, 0.0]])
    np.testing.assert_allclose(dst, [[1.5, 2.5, 0.0], [5.5, 6.5, 0.0]])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
