#!/usr/bin/env python3
"""
Vantage - Proximity Playtest
Error function, the P(near) predicate, ground distances and locating records.
"""

import sys
import os
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from entities.camera import CameraIntrinsics, PixelPoint, WorldPoint
from entities.detection import DetectionRecord, PositionRecord
from errors import DomainError
from systems.alignment import RigidTransform
from systems.geometry import backproject_to_plane, build_rotation, compose_projection, project
from systems.proximity import (
    NearPredicate, composite_probability, erf, ground_distance, locate_records, log_p_near,
    near_events, observe, p_near, proximity_pairs, truth_distances,
)

PI_60 = Decimal('3.14159265358979323846264338327950288419716939937510582097494459')


def erf_oracle(x: float) -> float:
    """Maclaurin series of erf in 80-digit decimal arithmetic."""
    getcontext().prec = 80
    z = Decimal(x)
    total = Decimal(0)
    term = z  # (-1)^n z^(2n+1) / n!
    n = 0
    while True:
        piece = term / (2 * n + 1)
        total += piece
        if abs(piece) < Decimal('1e-40'):
            break
        n += 1
        term = -term * z * z / n
    return float(2 * total / PI_60.sqrt())


def make_projection():
    K = CameraIntrinsics.from_image_size(1500.0, 1920, 1080)
    return compose_projection(K, build_rotation(70.0, 0.0), 8.0)


# =============================================================================
# ERROR FUNCTION
# =============================================================================

def test_erf_matches_high_precision_series():
    grid = np.linspace(-6.0, 6.0, 241)
    ours = erf(grid)
    for x, value in zip(grid, ours):
        assert abs(value - erf_oracle(float(x))) < 1.5e-7


def test_erf_matches_math_library():
    grid = np.linspace(-8.0, 8.0, 1001)
    expected = np.array([math.erf(x) for x in grid])
    np.testing.assert_allclose(erf(grid), expected, atol=1e-13)


def test_erf_is_odd_and_exact_at_zero():
    assert erf(0.0) == 0.0
    for x in (0.1, 0.7, 2.3, 5.9):
        assert erf(-x) == -erf(x)


def test_erf_saturates():
    assert erf(6.5) == 1.0
    assert erf(-40.0) == -1.0


def test_erf_rejects_non_finite():
    with pytest.raises(DomainError):
        erf(float('nan'))


# =============================================================================
# P(NEAR)
# =============================================================================

@pytest.mark.parametrize('tau, sigma', [(4.0, 1.0), (1.5, 0.2), (10.0, 3.0)])
def test_half_at_threshold(tau, sigma):
    assert p_near(NearPredicate(tau, sigma), tau) == pytest.approx(0.5, abs=1e-12)


def test_monotone_decreasing():
    pred = NearPredicate(4.0, 1.0)
    values = [p_near(pred, d) for d in np.linspace(0.0, 9.0, 500)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_known_values():
    pred = NearPredicate(4.0, 1.0)
    assert p_near(pred, 0.0) > 0.9999
    assert p_near(pred, 5.0) < 0.5
    assert p_near(pred, 5.0) == pytest.approx(0.5 * math.erfc(1.0 / math.sqrt(2.0)), abs=1e-12)
    assert p_near(pred, 1000.0) < 1e-12


def test_far_tail_keeps_decreasing():
    pred = NearPredicate(4.0, 1.0)
    distances = [12.0, 12.6, 13.0, 20.0]
    values = [p_near(pred, d) for d in distances]
    assert all(0.0 < v < 1.0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))
    assert p_near(pred, 20.0) == pytest.approx(0.5 * math.erfc(16.0 / math.sqrt(2.0)), rel=1e-12)


def test_log_probability_is_strictly_decreasing_everywhere():
    pred = NearPredicate(4.0, 1.0)
    logs = [log_p_near(pred, d) for d in (0.0, 4.0, 12.0, 13.0, 20.0, 50.0, 1000.0)]
    assert all(math.isfinite(v) for v in logs)
    assert all(a > b for a, b in zip(logs, logs[1:]))
    assert log_p_near(pred, 4.0) == pytest.approx(math.log(0.5), abs=1e-15)
    assert math.exp(log_p_near(pred, 13.0)) == pytest.approx(p_near(pred, 13.0), rel=1e-12)
    with pytest.raises(DomainError):
        log_p_near(pred, -1.0)


def test_negative_distance_is_rejected():
    with pytest.raises(DomainError):
        p_near(NearPredicate(), -0.1)


def test_predicate_parameters_are_validated():
    with pytest.raises(DomainError):
        NearPredicate(0.0, 1.0)
    with pytest.raises(DomainError):
        NearPredicate(4.0, -1.0)


def test_composite_probability():
    assert composite_probability([]) == 1.0
    assert composite_probability([0.5, 0.4]) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        composite_probability([0.5, 1.2])


def test_composite_probability_order_and_bounds():
    rng = np.random.default_rng(8)
    for _ in range(50):
        factors = list(rng.uniform(0.0, 1.0, int(rng.integers(1, 6))))
        value = composite_probability(factors)
        assert value <= min(factors)
        assert composite_probability(factors[::-1]) == pytest.approx(value, rel=1e-15)
        assert composite_probability(list(rng.permutation(factors))) == pytest.approx(value, rel=1e-15)
        assert composite_probability(factors + [0.0]) == 0.0


def test_far_pair_keeps_composite_above_zero():
    far = p_near(NearPredicate(4.0, 1.0), 15.0)
    assert composite_probability([0.9, far, 0.8]) > 0.0


# =============================================================================
# OBSERVATIONS
# =============================================================================

def test_distance_ignores_height():
    assert ground_distance(WorldPoint(0.0, 0.0, 0.0), WorldPoint(3.0, 4.0, 1.7)) == 5.0


def test_distance_agrees_across_viewpoints():
    wide = compose_projection(CameraIntrinsics.from_image_size(1500.0, 1920, 1080), build_rotation(70.0, 1.0), 8.0)
    steep = compose_projection(CameraIntrinsics.from_image_size(900.0, 1280, 720), build_rotation(45.0, -3.0), 14.0)
    person = WorldPoint(-2.5, 24.0, 0.0)
    vehicle = WorldPoint(3.0, 31.0, 0.0)
    measured = []
    for P in (wide, steep):
        p = backproject_to_plane(P, project(P, person))
        v = backproject_to_plane(P, project(P, vehicle))
        measured.append(ground_distance(p, v))
    assert measured[0] == pytest.approx(measured[1], abs=1e-8)
    assert measured[0] == pytest.approx(ground_distance(person, vehicle), abs=1e-8)


def test_observe_drops_points_to_ground():
    obs = observe(WorldPoint(0.0, 0.0, 1.7), WorldPoint(3.0, 4.0, 0.0))
    assert obs.distance_m == 5.0
    assert obs.person_ground.Z == 0.0
    assert p_near(NearPredicate(4.0, 1.0), obs.distance_m) < 0.5


def test_near_events_keep_pairs_at_or_above_half():
    pred = NearPredicate(4.0, 1.0)
    observations = [observe(WorldPoint(0, 0, 0), WorldPoint(d, 0, 0)) for d in (1.0, 4.0, 7.0)]
    events = near_events(observations, pred)
    assert [obs.distance_m for obs, _ in events] == [1.0, 4.0]


def test_pairs_are_formed_within_frames():
    positions = [
        PositionRecord(0, 0, 'person', 0.0, 0.0, 0.0),
        PositionRecord(1, 0, 'vehicle', 3.0, 4.0, 0.0),
        PositionRecord(2, 1, 'person', 1.0, 1.0, 0.0),
        PositionRecord(3, 1, 'vehicle', 1.0, 2.0, 0.0),
        PositionRecord(4, 1, 'vehicle', status='degenerate'),
        PositionRecord(5, 0, 'person', 6.0, 4.0, 0.0),
    ]
    pairs = proximity_pairs(positions)
    assert [(o.frame_id, o.person_id, o.vehicle_id) for o in pairs] == [(0, 0, 1), (0, 5, 1), (1, 2, 3)]
    assert [o.distance_m for o in pairs] == pytest.approx([5.0, 3.0, 1.0])


def test_no_vehicles_no_pairs():
    assert proximity_pairs([PositionRecord(0, 0, 'person', 0.0, 0.0, 0.0)]) == []


def test_pairs_use_transform():
    positions = [PositionRecord(0, 0, 'person', 0.0, 0.0, 0.0), PositionRecord(1, 0, 'vehicle', 3.0, 4.0, 0.0)]
    shifted = RigidTransform.identity().apply_point
    assert proximity_pairs(positions, shifted)[0].distance_m == pytest.approx(5.0)


def test_truth_distances_follow_record_ids():
    observations = [observe(WorldPoint(0, 0, 0), WorldPoint(1, 0, 0), 0, 0, 1),
                    observe(WorldPoint(0, 0, 0), WorldPoint(1, 0, 0), 0, 0, 7)]
    truth = [PositionRecord(0, 0, 'person', 0.0, 0.0, 0.0), PositionRecord(1, 0, 'vehicle', 0.0, 2.0, 0.0)]
    assert truth_distances(observations, truth) == [2.0, None]


def test_report_row_has_probability():
    row = observe(WorldPoint(0, 0, 0), WorldPoint(4, 0, 0), 3, 1, 2).to_dict(NearPredicate(4.0, 1.0))
    assert row['est_distance_m'] == 4.0
    assert row['p_near'] == pytest.approx(0.5, abs=1e-12)
    assert row['frame_id'] == 3


# =============================================================================
# LOCATING RECORDS
# =============================================================================

def test_locate_persons_by_foot_and_vehicles_by_center():
    P = make_projection()
    foot = project(P, WorldPoint(2.0, 20.0, 0.0))
    head = project(P, WorldPoint(2.0, 20.0, 1.7))
    center = project(P, WorldPoint(-3.0, 30.0, 0.0))
    records = [
        DetectionRecord(0, 0, 'person', (foot.u - 10, head.v, foot.u + 10, foot.v), foot, head),
        DetectionRecord(1, 0, 'vehicle', (center.u - 40, center.v - 15, center.u + 40, center.v + 15)),
    ]
    person, vehicle = locate_records(records, P)
    assert (person.X, person.Y, person.Z) == pytest.approx((2.0, 20.0, 0.0), abs=1e-9)
    assert (vehicle.X, vehicle.Y, vehicle.Z) == pytest.approx((-3.0, 30.0, 0.0), abs=1e-9)
    assert person.is_ok and vehicle.is_ok


def test_pixel_above_horizon_is_flagged_not_fatal():
    P = make_projection()
    records = [DetectionRecord(4, 2, 'person', (950.0, -300.0, 970.0, -200.0),
                               PixelPoint(960.0, -200.0), PixelPoint(960.0, -300.0))]
    (located,) = locate_records(records, P)
    assert located.status == 'degenerate'
    assert located.record_id == 4
    assert located.X is None


def test_locate_nothing():
    assert locate_records([], make_projection()) == []


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
