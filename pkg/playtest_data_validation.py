#!/usr/bin/env python3
"""
Vantage - Data Validation Playtest
Validates the bundled run configs and scene specs: every file parses, every
value is in range, and every scene generates and calibrates.
"""

import sys
import os
import json
from typing import Any, List, Tuple

import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from config_manager import RunConfig, read_config_file
from constants import ALL_BOX_MODELS, ALL_FORMULATIONS
from entities.detection import HeightModel
from systems.ransac import ransac_calibrate
from systems.simulate import SceneSpec, generate

# Data directory paths
DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')
CONFIGS_DIR = os.path.join(DATA_DIR, 'configs')
SCENES_DIR = os.path.join(DATA_DIR, 'scenes')


def load_json_file(filepath: str) -> Tuple[Any, str]:
    """Load a JSON file, returning (data, error_message)."""
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            return json.load(f), ""
    except json.JSONDecodeError as e:
        return None, f"JSON parse error: {e}"
    except FileNotFoundError:
        return None, "File not found"


def get_files(directory: str, suffixes: Tuple[str, ...]) -> List[str]:
    """All files in a directory with one of the given suffixes, sorted."""
    if not os.path.exists(directory):
        return []
    return sorted(
        os.path.join(directory, f)
        for f in os.listdir(directory)
        if f.endswith(suffixes)
    )


CONFIG_FILES = get_files(CONFIGS_DIR, ('.json', '.toml'))
SCENE_FILES = get_files(SCENES_DIR, ('.json',))


# =============================================================================
# RUN CONFIGS
# =============================================================================

def test_configs_exist():
    assert CONFIG_FILES, f"No config files found in {CONFIGS_DIR}"
    assert any(path.endswith('.toml') for path in CONFIG_FILES)


@pytest.mark.parametrize('path', CONFIG_FILES, ids=os.path.basename)
def test_config_loads(path):
    config = RunConfig.from_dict(read_config_file(path))
    camera = config.require_camera()
    assert 0.0 < camera.tilt_deg < 180.0
    assert camera.focal_px > 0
    assert config.calibration.formulation in ALL_FORMULATIONS
    assert config.heights.avg_m > config.heights.foot_plane_m


@pytest.mark.parametrize('path', CONFIG_FILES, ids=os.path.basename)
def test_config_has_only_known_sections(path):
    known = set(RunConfig().to_dict()) | {'camera'}
    assert set(read_config_file(path)) <= known


# =============================================================================
# SCENE SPECS
# =============================================================================

def test_scenes_exist():
    assert SCENE_FILES, f"No scene files found in {SCENES_DIR}"


@pytest.mark.parametrize('path', SCENE_FILES, ids=os.path.basename)
def test_scene_parses(path):
    data, error = load_json_file(path)
    assert not error, error
    spec = SceneSpec.from_dict(data)
    assert spec.box_model in ALL_BOX_MODELS
    assert spec.camera.camera_height_m > spec.persons.height_mean_m


@pytest.mark.parametrize('path', SCENE_FILES, ids=os.path.basename)
def test_scene_generates_and_calibrates(path):
    data, _ = load_json_file(path)
    scene = generate(SceneSpec.from_dict(data))
    camera = scene.spec.camera
    assert len(scene.detections) >= 4

    heights = HeightModel(scene.spec.persons.height_mean_m)
    result = ransac_calibrate(scene.detections, camera.intrinsics(), camera.pose(), heights)
    assert abs(result.solution.camera_height_m - camera.camera_height_m) / camera.camera_height_m < 0.1


def test_vehicle_scene_pairs_with_simulated_config():
    data, _ = load_json_file(os.path.join(SCENES_DIR, 'parking_lot.json'))
    spec = SceneSpec.from_dict(data)
    camera = RunConfig.from_dict(read_config_file(os.path.join(CONFIGS_DIR, 'simulated.json'))).camera
    assert (camera.focal_px, camera.tilt_deg, camera.roll_deg) == \
        (spec.camera.focal_px, spec.camera.tilt_deg, spec.camera.roll_deg)
    assert tuple(camera.image_size) == tuple(spec.camera.image_size)
    assert spec.vehicles.placements


# =============================================================================
# SOURCE MODULES
# =============================================================================

SRC_DIR = os.path.join(os.path.dirname(__file__), 'src')


def source_files() -> List[str]:
    files = []
    for root, _, names in os.walk(SRC_DIR):
        files.extend(os.path.join(root, n) for n in names if n.endswith('.py'))
    return sorted(files)


@pytest.mark.parametrize('path', source_files(), ids=lambda p: os.path.relpath(p, SRC_DIR))
def test_modules_log_through_their_own_logger(path):
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    assert 'print(' not in text
    if 'logger.' in text:
        assert 'logger = logging.getLogger(__name__)' in text


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
