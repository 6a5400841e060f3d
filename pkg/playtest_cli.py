#!/usr/bin/env python3
"""
Vantage - Command Line Playtest
Runs the whole pipeline through the command dispatcher, the way a user would.
"""

import sys
import os
import json

import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from commands import ALL_COMMANDS
from commands.base_command import BaseCommand
from command_manager import CommandManager
from constants import EXIT_OK, EXIT_INPUT_ERROR, EXIT_ALGORITHM_ERROR
from main import build_manager, main

SCENE = {
    'camera': {'focal_px': 1500.0, 'image_size': [1920, 1080], 'tilt_deg': 70.0,
               'roll_deg': 1.0, 'camera_height_m': 8.0},
    'persons': {'count': 10, 'height_std_m': 0.03, 'region': [[-10.0, 10.0], [20.0, 45.0]]},
    'vehicles': {'placements': [[-5.0, 25.0], [5.0, 35.0]]},
    'noise': {'pixel_std': 0.5},
    'frame_count': 5,
    'rng_seed': 0,
}

CONFIG = {
    'version': '1.0.0',
    'camera': {'focal_px': 1500.0, 'tilt_deg': 70.0, 'roll_deg': 1.0, 'image_size': [1920, 1080]},
    'ransac': {'threshold_px': 5.0, 'iterations': 300, 'seed': 0},
}


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def workspace(tmp_path):
    """A simulated scene on disk plus a matching run config."""
    spec = write_json(tmp_path / 'scene.json', SCENE)
    config = write_json(tmp_path / 'run.json', CONFIG)
    prefix = str(tmp_path / 'scene')
    assert main(['simulate', spec, '--prefix', prefix]) == EXIT_OK
    return {
        'dir': tmp_path,
        'config': config,
        'detections': prefix + '.detections.jsonl',
        'truth': prefix + '.truth.json',
        'truth_positions': prefix + '.truth_positions.jsonl',
    }


# =============================================================================
# REGISTRATION AND PARSING
# =============================================================================

def test_every_command_is_registered():
    manager = build_manager()
    assert sorted(manager.commands) == sorted(c.name for c in ALL_COMMANDS)
    assert len(manager.commands) == 8


def test_duplicate_registration_is_refused():
    manager = build_manager()
    with pytest.raises(ValueError):
        manager.register(ALL_COMMANDS[0](manager))


def test_version_and_help_exit_cleanly(capsys):
    assert main(['--version']) == EXIT_OK
    assert 'Vantage' in capsys.readouterr().out
    assert main(['calibrate', '--help']) == EXIT_OK


def test_usage_errors_exit_with_input_code():
    assert main([]) == EXIT_INPUT_ERROR
    assert main(['teleport']) == EXIT_INPUT_ERROR
    assert main(['locate', 'x.jsonl']) == EXIT_INPUT_ERROR  # --calibration is required


def test_base_command_must_be_overridden():
    with pytest.raises(NotImplementedError):
        BaseCommand(CommandManager()).run(None, None)


# =============================================================================
# FULL PIPELINE
# =============================================================================

def test_pipeline_end_to_end(workspace, capsys):
    d = workspace['dir']
    cfg = workspace['config']
    calibration = str(d / 'calibration.json')
    positions = str(d / 'positions.jsonl')
    alignment = str(d / 'alignment.json')
    proximity = str(d / 'proximity.json')
    roc_csv = str(d / 'roc.csv')

    assert main(['calibrate', workspace['detections'], '--config', cfg, '--output', calibration]) == EXIT_OK
    report = read_json(calibration)
    assert report['method'] == 'ransac'
    assert abs(report['camera_height_m'] - 8.0) / 8.0 < 0.05
    assert len(report['inlier_mask']) == len(report['record_ids'])

    assert main(['locate', workspace['detections'], '--calibration', calibration,
                 '--config', cfg, '--output', positions]) == EXIT_OK
    rows = [json.loads(line) for line in (d / 'positions.jsonl').read_text().splitlines()]
    assert all(row['status'] == 'ok' for row in rows)

    assert main(['align', positions, workspace['truth_positions'], '--output', alignment]) == EXIT_OK
    aligned = read_json(alignment)
    assert aligned['matched_count'] == len(rows)
    assert aligned['correspondence']['mean_error_m'] < 1.0

    assert main(['proximity', positions, '--truth', workspace['truth_positions'],
                 '--alignment', alignment, '--config', cfg, '--output', proximity]) == EXIT_OK
    scored = read_json(proximity)
    assert scored['aligned'] is True
    assert scored['pair_count'] == len(scored['pairs']) > 0
    assert all('gt_distance_m' in pair and 0.0 <= pair['p_near'] <= 1.0 for pair in scored['pairs'])

    capsys.readouterr()
    assert main(['roc', proximity, '--csv', roc_csv, '--config', cfg]) == EXIT_OK
    auc = float(capsys.readouterr().out.strip())
    assert 0.9 <= auc <= 1.0
    assert (d / 'roc.csv').read_text().splitlines()[0] == 'fpr,tpr'


def test_reports_go_to_stdout_without_output(workspace, capsys):
    capsys.readouterr()
    assert main(['calibrate', workspace['detections'], '--config', workspace['config'], '--quiet']) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report['camera_height_m'] > 0


def test_direct_calibration(workspace):
    out = str(workspace['dir'] / 'direct.json')
    assert main(['calibrate', workspace['detections'], '--direct',
                 '--config', workspace['config'], '--output', out]) == EXIT_OK
    report = read_json(out)
    assert report['method'] == 'direct'
    assert report['formulation'] == 'vertical_constrained'
    assert all(report['inlier_mask'])


def test_global_flags_before_or_after_the_command(workspace):
    before = str(workspace['dir'] / 'before.json')
    after = str(workspace['dir'] / 'after.json')
    assert main(['--config', workspace['config'], '--seed', '3', '--output', before,
                 'calibrate', workspace['detections']]) == EXIT_OK
    assert main(['calibrate', workspace['detections'],
                 '--config', workspace['config'], '--seed', '3', '--output', after]) == EXIT_OK
    assert (workspace['dir'] / 'before.json').read_text() == (workspace['dir'] / 'after.json').read_text()


def test_same_inputs_give_identical_bytes(workspace):
    outputs = []
    for name in ('first.json', 'second.json'):
        path = str(workspace['dir'] / name)
        assert main(['calibrate', workspace['detections'], '--config', workspace['config'],
                     '--output', path]) == EXIT_OK
        outputs.append((workspace['dir'] / name).read_bytes())
    assert outputs[0] == outputs[1]


def test_simulate_seed_flag_overrides_the_spec(tmp_path):
    spec = write_json(tmp_path / 'scene.json', SCENE)
    assert main(['simulate', spec, '--prefix', str(tmp_path / 'a'), '--seed', '5']) == EXIT_OK
    assert main(['simulate', spec, '--prefix', str(tmp_path / 'b'), '--seed', '6']) == EXIT_OK
    first = (tmp_path / 'a.detections.jsonl').read_text()
    second = (tmp_path / 'b.detections.jsonl').read_text()
    assert first != second


def test_sweep_reports_each_height(workspace):
    out = str(workspace['dir'] / 'sweep.json')
    assert main(['sweep', workspace['detections'], workspace['truth_positions'],
                 '--config', workspace['config'], '--output', out]) == EXIT_OK
    entries = read_json(out)['entries']
    assert [e['avg_height_m'] for e in entries] == [1.5748, 1.7018, 1.8288]
    heights = [e['camera_height_m'] for e in entries]
    assert heights == sorted(heights)


def test_prior_takes_the_mode(tmp_path, capsys):
    path = tmp_path / 'poses.jsonl'
    rows = [{'focal_px': 1503.0, 'tilt_deg': 70.1, 'roll_deg': 0.9}] * 5
    rows.append({'focal_px': 800.0, 'tilt_deg': 40.0, 'roll_deg': -5.0})
    path.write_text(''.join(json.dumps(r) + '\n' for r in rows))
    capsys.readouterr()
    assert main(['prior', str(path), '--quiet']) == EXIT_OK
    camera = json.loads(capsys.readouterr().out)['camera']
    assert camera['focal_px'] == pytest.approx(1505.0)
    assert camera['tilt_deg'] == pytest.approx(70.25)
    assert camera['roll_deg'] == pytest.approx(0.75)


# =============================================================================
# FAILURES
# =============================================================================

def test_empty_detections_exit_with_input_code(tmp_path):
    detections = tmp_path / 'empty.detections.jsonl'
    detections.write_text('')
    config = write_json(tmp_path / 'run.json', CONFIG)
    assert main(['calibrate', str(detections), '--config', config]) == EXIT_INPUT_ERROR


def test_missing_camera_section_exits_with_input_code(workspace):
    config = write_json(workspace['dir'] / 'nocamera.json', {'ransac': {'iterations': 50}})
    assert main(['calibrate', workspace['detections'], '--config', config]) == EXIT_INPUT_ERROR


def test_bad_config_value_exits_with_input_code(workspace):
    config = write_json(workspace['dir'] / 'bad.json', dict(CONFIG, ransac={'iterations': 'many'}))
    assert main(['calibrate', workspace['detections'], '--config', config]) == EXIT_INPUT_ERROR


def test_missing_file_exits_with_input_code(tmp_path):
    assert main(['align', str(tmp_path / 'a.jsonl'), str(tmp_path / 'b.jsonl')]) == EXIT_INPUT_ERROR


def test_single_class_roc_exits_with_algorithm_code(tmp_path):
    pairs = tmp_path / 'pairs.jsonl'
    pairs.write_text(''.join(json.dumps({'gt_distance_m': 10.0 + i, 'est_distance_m': 9.0 + i}) + '\n'
                             for i in range(4)))
    assert main(['roc', str(pairs)]) == EXIT_ALGORITHM_ERROR


def test_roc_without_csv_only_prints_the_auc(tmp_path, capsys):
    pairs = tmp_path / 'pairs.jsonl'
    rows = [(1.0, 1.5), (2.0, 2.5), (9.0, 8.0), (12.0, 11.0)]
    pairs.write_text(''.join(json.dumps({'gt_distance_m': g, 'est_distance_m': e}) + '\n' for g, e in rows))
    assert main(['roc', str(pairs)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == '1.0000'
    assert sorted(p.name for p in tmp_path.iterdir()) == ['pairs.jsonl']


def test_roc_help_says_when_the_curve_is_written():
    roc = next(c for c in ALL_COMMANDS if c.name == 'roc')
    assert '--csv' in roc.help and '--output' in roc.help


def test_no_vehicles_gives_an_empty_report(tmp_path):
    positions = tmp_path / 'positions.jsonl'
    positions.write_text(json.dumps({'record_id': 0, 'frame_id': 0, 'object_class': 'person',
                                     'X': 1.0, 'Y': 20.0, 'Z': 0.0, 'status': 'ok'}) + '\n')
    out = str(tmp_path / 'proximity.json')
    assert main(['proximity', str(positions), '--output', out]) == EXIT_OK
    report = read_json(out)
    assert report['pair_count'] == 0
    assert report['near_events'] == []


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
