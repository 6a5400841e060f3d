#!/usr/bin/env python3
"""
Vantage - Simulation Playtest
Synthetic scenes, their ground truth, and the record files they are written to.
"""

import sys
import os

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from errors import ConfigError, DomainError, EmptySceneError, ParseError
from record_store import load_detections, load_positions
from systems.geometry import backproject_to_plane, project
from systems.simulate import (
    CameraSpec, NoiseSpec, PersonSpec, SceneSpec, VehicleSpec, export_scene, generate, load_truth,
)


def busy_spec(**kwargs):
    return SceneSpec(
        camera=CameraSpec(roll_deg=1.0),
        persons=PersonSpec(count=15, height_std_m=0.05),
        vehicles=VehicleSpec(placements=((-5.0, 25.0), (5.0, 35.0))),
        noise=NoiseSpec(pixel_std=0.5),
        rng_seed=kwargs.pop('rng_seed', 3),
        frame_count=3,
        **kwargs,
    )


# =============================================================================
# GENERATION
# =============================================================================

def test_same_spec_same_scene():
    first = generate(busy_spec())
    second = generate(busy_spec())
    assert [r.to_dict() for r in first.records] == [r.to_dict() for r in second.records]


def test_seed_changes_scene():
    first = generate(busy_spec(rng_seed=1))
    second = generate(busy_spec(rng_seed=2))
    assert [r.to_dict() for r in first.records] != [r.to_dict() for r in second.records]


def test_record_ids_are_sequential():
    scene = generate(busy_spec())
    assert [r.record_id for r in scene.records] == list(range(len(scene.records)))


def test_truth_positions_follow_records():
    scene = generate(busy_spec())
    positions = scene.truth.positions()
    assert [p.record_id for p in positions] == [r.record_id for r in scene.records]
    assert [p.object_class for p in positions] == [r.object_class for r in scene.records]


def test_vehicles_sit_at_their_placements_in_every_frame():
    scene = generate(busy_spec())
    assert len(scene.vehicle_records) == 6
    centroids = {(v.centroid.X, v.centroid.Y) for v in scene.truth.vehicles}
    assert centroids == {(-5.0, 25.0), (5.0, 35.0)}
    assert sorted({r.frame_id for r in scene.vehicle_records}) == [0, 1, 2]


def test_noiseless_keypoints_are_exact_projections():
    scene = generate(SceneSpec(persons=PersonSpec(count=10), rng_seed=4))
    P = scene.projection
    by_id = {p.record_id: p for p in scene.truth.persons if p.visible}
    for det in scene.detections:
        truth = by_id[det.record_id]
        foot = project(P, truth.foot)
        head = project(P, truth.head)
        assert det.foot_px.as_array() == pytest.approx(foot.as_array(), abs=1e-9)
        assert det.head_px.as_array() == pytest.approx(head.as_array(), abs=1e-9)


def test_height_draws_match_their_distribution():
    spec = SceneSpec(persons=PersonSpec(count=1000, height_mean_m=1.70, height_std_m=0.07), rng_seed=17)
    heights = np.array([p.height_m for p in generate(spec).truth.persons])
    assert len(heights) == 1000
    n = len(heights)
    assert abs(heights.mean() - 1.70) < 3.0 * 0.07 / np.sqrt(n)
    assert abs(heights.std(ddof=1) - 0.07) < 3.0 * 0.07 / np.sqrt(2.0 * (n - 1))


def test_noiseless_feet_backproject_onto_their_truth():
    scene = generate(SceneSpec(camera=CameraSpec(roll_deg=-2.0), persons=PersonSpec(count=25), rng_seed=6))
    P = scene.projection
    by_id = {p.record_id: p for p in scene.truth.persons if p.visible}
    for det in scene.detections:
        truth = by_id[det.record_id]
        ground = backproject_to_plane(P, det.foot_px)
        assert abs(ground.X - truth.foot.X) < 1e-9
        assert abs(ground.Y - truth.foot.Y) < 1e-9


def test_hull_boxes_carry_no_keypoints():
    scene = generate(SceneSpec(persons=PersonSpec(count=10), box_model='hull', rng_seed=5))
    for det in scene.detections:
        assert det.foot is None
        assert det.head is None
        left, top, right, bottom = det.bbox
        assert det.foot_px.v == bottom
        assert det.head_px.v == top


def test_persons_behind_the_camera_are_not_visible():
    spec = SceneSpec(persons=PersonSpec(count=5, region=((-5.0, 5.0), (-30.0, -10.0))))
    with pytest.raises(EmptySceneError):
        generate(spec)


def test_hidden_persons_have_no_record():
    spec = SceneSpec(persons=PersonSpec(count=40, region=((-40.0, 40.0), (15.0, 60.0))), rng_seed=2)
    scene = generate(spec)
    hidden = [p for p in scene.truth.persons if not p.visible]
    assert hidden
    assert all(p.record_id is None for p in hidden)
    assert len(scene.detections) == 40 - len(hidden)


def test_outlier_share_is_honoured():
    spec = SceneSpec(persons=PersonSpec(count=20), noise=NoiseSpec(outlier_fraction=0.2), rng_seed=6)
    kinds = [p.outlier for p in generate(spec).truth.persons]
    assert sum(k is not None for k in kinds) == 4
    assert set(kinds) <= {None, 'height', 'foot'}


# =============================================================================
# SPEC VALIDATION
# =============================================================================

@pytest.mark.parametrize('kwargs', [
    {'persons': PersonSpec(count=-1)},
    {'noise': NoiseSpec(pixel_std=-0.1)},
    {'noise': NoiseSpec(outlier_fraction=1.0)},
    {'rng_seed': -3},
    {'box_model': 'ellipse'},
    {'frame_count': 0},
    {'camera': CameraSpec(camera_height_m=1.5)},
    {'persons': PersonSpec(region=((5.0, -5.0), (10.0, 20.0)))},
])
def test_bad_spec_is_rejected(kwargs):
    with pytest.raises(DomainError):
        SceneSpec(**kwargs)


def test_spec_dict_survives_reload():
    spec = busy_spec()
    assert SceneSpec.from_dict(spec.to_dict()) == spec


def test_partial_dict_keeps_defaults():
    spec = SceneSpec.from_dict({'camera': {'tilt_deg': 65.0}, 'rng_seed': 9})
    assert spec.camera.tilt_deg == 65.0
    assert spec.camera.focal_px == 1500.0
    assert spec.rng_seed == 9


@pytest.mark.parametrize('data', [
    {'persons': {'region': [1, 2]}},
    {'noise': {'blur': 1.0}},
    {'camera': 'overhead'},
    {'persons': {'count': -4}},
    {'vehicles': {'placements': [[1.0]]}},
])
def test_bad_spec_dict_names_a_field(data):
    with pytest.raises(ConfigError):
        SceneSpec.from_dict(data)


def test_with_seed_keeps_everything_else():
    spec = busy_spec()
    reseeded = spec.with_seed(42)
    assert reseeded.rng_seed == 42
    assert reseeded.to_dict()['camera'] == spec.to_dict()['camera']


# =============================================================================
# FILES
# =============================================================================

def test_export_writes_three_files(tmp_path):
    scene = generate(busy_spec())
    paths = export_scene(scene, str(tmp_path / 'scenes' / 'busy'))
    assert all(os.path.exists(p) for p in paths.values())

    records = load_detections(paths['detections'])
    assert [r.record_id for r in records] == [r.record_id for r in scene.records]
    assert records[0].foot is not None

    truth = load_truth(paths['truth'])
    assert truth.camera_height_m == 8.0
    np.testing.assert_allclose(truth.projection.matrix, scene.projection.matrix)

    positions = load_positions(paths['truth_positions'])
    assert len(positions) == len(scene.records)


def test_bad_detection_line_is_reported_with_its_number(tmp_path):
    path = tmp_path / 'bad.detections.jsonl'
    path.write_text(
        '{"frame_id": 0, "object_class": "person", "left": 1, "top": 2, "right": 5, "bottom": 30}\n'
        '\n'
        '{"frame_id": 0, "object_class": "bicycle", "left": 1, "top": 2, "right": 5, "bottom": 30}\n'
    )
    with pytest.raises(ParseError) as info:
        load_detections(str(path))
    assert info.value.line == 3


@pytest.mark.parametrize('line', [
    '{"frame_id": 0, "object_class": "person", "left": 1, "top": 2, "right": 5}',
    '{"frame_id": 0, "object_class": "person", "left": 1, "top": 40, "right": 5, "bottom": 30}',
    '{"frame_id": "0", "object_class": "person", "left": 1, "top": 2, "right": 5, "bottom": 30}',
    '{"frame_id": 0, "object_class": "person", "left": 1, "top": 2, "right": 5, "bottom": 30, "foot": [1]}',
    '[1, 2, 3]',
    '{"frame_id": 0,',
])
def test_malformed_detection_lines(tmp_path, line):
    path = tmp_path / 'bad.detections.jsonl'
    path.write_text(line + '\n')
    with pytest.raises(ParseError):
        load_detections(str(path))


def test_duplicate_record_ids_are_rejected(tmp_path):
    path = tmp_path / 'dup.detections.jsonl'
    row = '{"record_id": 4, "frame_id": 0, "object_class": "vehicle", "left": 1, "top": 2, "right": 5, "bottom": 30}\n'
    path.write_text(row + row)
    with pytest.raises(ParseError):
        load_detections(str(path))


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_detections(str(tmp_path / 'nowhere.jsonl'))


def test_degenerate_positions_need_no_coordinates(tmp_path):
    path = tmp_path / 'positions.jsonl'
    path.write_text('{"record_id": 0, "frame_id": 1, "object_class": "person", "status": "degenerate"}\n')
    (record,) = load_positions(str(path))
    assert not record.is_ok
    with pytest.raises(DomainError):
        record.point


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
