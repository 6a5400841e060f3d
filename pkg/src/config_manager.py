"""
Run Configuration for Vantage.
Loads camera, height, calibration, RANSAC, proximity and evaluation settings
from a JSON or TOML file, merged over the defaults in constants.py.
"""

import copy
import json
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Tuple

from constants import VERSION, DEFAULT_SETTINGS, DEFAULT_IMAGE_SIZE, ALL_FORMULATIONS
from entities.camera import CameraIntrinsics, CameraPose
from entities.detection import HeightModel
from errors import ConfigError, DomainError, ParseError
from systems.proximity import NearPredicate
from systems.ransac import RansacConfig

logger = logging.getLogger(__name__)

REQUIRED_CAMERA_FIELDS = ('focal_px', 'tilt_deg', 'roll_deg')
OPTIONAL_CAMERA_FIELDS = ('principal_point', 'image_size')


# =============================================================================
# CONFIG SECTIONS
# =============================================================================

@dataclass
class CameraConfig:
    """Trusted camera parameters (focal length in pixels, angles in degrees)."""
    focal_px: float
    tilt_deg: float
    roll_deg: float
    principal_point: Optional[Tuple[float, float]] = None
    image_size: Optional[Tuple[int, int]] = None

    def intrinsics(self) -> CameraIntrinsics:
        """Principal point defaults to the image center; image size defaults to 1920x1080."""
        if self.image_size is not None:
            return CameraIntrinsics.from_image_size(self.focal_px, self.image_size[0], self.image_size[1],
                                                    self.principal_point)
        if self.principal_point is not None:
            return CameraIntrinsics(self.focal_px, tuple(self.principal_point))
        return CameraIntrinsics.from_image_size(self.focal_px, *DEFAULT_IMAGE_SIZE)

    def pose(self) -> CameraPose:
        return CameraPose(self.tilt_deg, self.roll_deg)


@dataclass
class HeightsConfig:
    avg_m: float = DEFAULT_SETTINGS['heights']['avg_m']
    foot_plane_m: float = DEFAULT_SETTINGS['heights']['foot_plane_m']

    def height_model(self) -> HeightModel:
        return HeightModel(self.avg_m, self.foot_plane_m)


@dataclass
class CalibrationConfig:
    formulation: str = DEFAULT_SETTINGS['calibration']['formulation']
    min_box_height_px: float = DEFAULT_SETTINGS['calibration']['min_box_height_px']


@dataclass
class RansacSection:
    threshold_px: float = DEFAULT_SETTINGS['ransac']['threshold_px']
    iterations: int = DEFAULT_SETTINGS['ransac']['iterations']
    seed: int = DEFAULT_SETTINGS['ransac']['seed']
    sample_size: int = DEFAULT_SETTINGS['ransac']['sample_size']
    min_inliers: int = DEFAULT_SETTINGS['ransac']['min_inliers']
    adaptive: bool = DEFAULT_SETTINGS['ransac']['adaptive']
    confidence: float = DEFAULT_SETTINGS['ransac']['confidence']


@dataclass
class ProximityConfig:
    tau_m: float = DEFAULT_SETTINGS['proximity']['tau_m']
    sharpness_m: float = DEFAULT_SETTINGS['proximity']['sharpness_m']


@dataclass
class EvalConfig:
    gt_threshold_m: float = DEFAULT_SETTINGS['eval']['gt_threshold_m']


@dataclass
class RunConfig:
    """
    Complete run configuration.

    The camera section has no defaults; commands that need it call
    require_camera() and get a ConfigError naming the missing field.
    """
    camera: Optional[CameraConfig] = None
    heights: HeightsConfig = field(default_factory=HeightsConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    ransac: RansacSection = field(default_factory=RansacSection)
    proximity: ProximityConfig = field(default_factory=ProximityConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    version: str = VERSION

    def require_camera(self) -> CameraConfig:
        if self.camera is None:
            raise ConfigError('camera', "missing required section")
        return self.camera

    def ransac_config(self) -> RansacConfig:
        """The RANSAC section as the solver's config type."""
        section = self.ransac
        try:
            return RansacConfig(
                inlier_threshold_px=section.threshold_px,
                iterations=section.iterations,
                sample_size=section.sample_size,
                min_inliers=section.min_inliers,
                rng_seed=section.seed,
                adaptive=section.adaptive,
                confidence=section.confidence,
            )
        except DomainError as e:
            raise ConfigError('ransac', str(e)) from e

    def near_predicate(self) -> NearPredicate:
        try:
            return NearPredicate(self.proximity.tau_m, self.proximity.sharpness_m)
        except DomainError as e:
            raise ConfigError('proximity', str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        """Convert the config to a dictionary for JSON serialization."""
        data = asdict(self)
        if data['camera'] is None:
            del data['camera']
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """
        Build a config from a raw mapping, merged over the defaults.

        Raises:
            ConfigError: For missing camera fields or badly typed values
        """
        merged = _merge_over_defaults(data)

        camera = None
        if 'camera' in data:
            camera = _camera_from_dict(data['camera'])

        config = cls(
            camera=camera,
            heights=HeightsConfig(**merged['heights']),
            calibration=CalibrationConfig(**merged['calibration']),
            ransac=RansacSection(**merged['ransac']),
            proximity=ProximityConfig(**merged['proximity']),
            eval=EvalConfig(**merged['eval']),
            version=str(data.get('version', VERSION)),
        )
        _validate(config)
        return config


# =============================================================================
# PARSING HELPERS
# =============================================================================

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _merge_over_defaults(data: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    """Overlay loaded keys onto a copy of DEFAULT_SETTINGS, warning about unknown keys."""
    merged = copy.deepcopy(DEFAULT_SETTINGS)
    for section, values in data.items():
        if section in ('camera', 'version'):
            continue
        if section not in merged:
            logger.warning("Ignoring unknown config section '%s'", section)
            continue
        if not isinstance(values, dict):
            raise ConfigError(section, "must be a table")
        for key, value in values.items():
            if key not in merged[section]:
                logger.warning("Ignoring unknown config key '%s.%s'", section, key)
                continue
            default = merged[section][key]
            path = f"{section}.{key}"
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise ConfigError(path, f"must be true or false, got {value!r}")
            elif isinstance(default, int):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(path, f"must be an integer, got {value!r}")
            elif isinstance(default, float):
                if not _is_number(value):
                    raise ConfigError(path, f"must be a finite number, got {value!r}")
                value = float(value)
            elif isinstance(default, str) and not isinstance(value, str):
                raise ConfigError(path, f"must be a string, got {value!r}")
            merged[section][key] = value
    return merged


def _pair(value: Any, path: str, integer: bool = False) -> Tuple:
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(_is_number(v) for v in value)):
        raise ConfigError(path, f"must be a pair of numbers, got {value!r}")
    if integer:
        return int(value[0]), int(value[1])
    return float(value[0]), float(value[1])


def _camera_from_dict(section: Any) -> CameraConfig:
    if not isinstance(section, dict):
        raise ConfigError('camera', "must be a table")
    for key in section:
        if key not in REQUIRED_CAMERA_FIELDS and key not in OPTIONAL_CAMERA_FIELDS:
            logger.warning("Ignoring unknown config key 'camera.%s'", key)
    for key in REQUIRED_CAMERA_FIELDS:
        if key not in section:
            raise ConfigError(f"camera.{key}", "missing required field")
        if not _is_number(section[key]):
            raise ConfigError(f"camera.{key}", f"must be a finite number, got {section[key]!r}")

    principal_point = None
    if section.get('principal_point') is not None:
        principal_point = _pair(section['principal_point'], 'camera.principal_point')
    image_size = None
    if section.get('image_size') is not None:
        image_size = _pair(section['image_size'], 'camera.image_size', integer=True)

    camera = CameraConfig(float(section['focal_px']), float(section['tilt_deg']),
                          float(section['roll_deg']), principal_point, image_size)
    try:
        camera.intrinsics()
        camera.pose()
    except DomainError as e:
        raise ConfigError('camera', str(e)) from e
    return camera


def _validate(config: RunConfig):
    if config.calibration.formulation not in ALL_FORMULATIONS:
        raise ConfigError('calibration.formulation',
                          f"must be one of {ALL_FORMULATIONS}, got {config.calibration.formulation!r}")
    try:
        config.heights.height_model()
    except DomainError as e:
        raise ConfigError('heights', str(e)) from e
    if not config.eval.gt_threshold_m > 0:
        raise ConfigError('eval.gt_threshold_m', "must be positive")
    config.ransac_config()
    config.near_predicate()


def read_config_file(path: str) -> Dict[str, Any]:
    """Read a JSON or (by .toml suffix) TOML config file into a mapping."""
    if not os.path.exists(path):
        raise ParseError(path, None, "Config file not found")
    try:
        if path.endswith('.toml'):
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        else:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"Invalid JSON: {e.msg}") from e
    except tomllib.TOMLDecodeError as e:
        raise ParseError(path, None, f"Invalid TOML: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(path, None, "Config must be a table")
    return data


# =============================================================================
# CONFIG MANAGER
# =============================================================================

class ConfigManager:
    """
    Holds the active run configuration.

    Usage:
        configs = get_config_manager()
        configs.load("data/configs/simulated.json")
        configs.override_seed(7)
        config = configs.config
    """

    def __init__(self):
        self.config = RunConfig()
        self.source_path: Optional[str] = None

    def reset(self):
        """Return to the default config."""
        self.config = RunConfig()
        self.source_path = None

    def load(self, path: str) -> RunConfig:
        """
        Load a config file over the defaults.

        Returns:
            The loaded RunConfig, also kept as the active config
        """
        data = read_config_file(path)
        saved_version = str(data.get('version', VERSION))
        if not self._check_version_compatible(saved_version):
            logger.warning("Config version %s may not be compatible with %s", saved_version, VERSION)

        self.config = RunConfig.from_dict(data)
        self.source_path = path
        logger.info("Loaded config from %s", path)
        return self.config

    def _check_version_compatible(self, saved_version: str) -> bool:
        """Major versions must match."""
        try:
            saved_major = int(saved_version.split('.')[0])
            current_major = int(VERSION.split('.')[0])
            return saved_major == current_major
        except (ValueError, IndexError):
            return False

    def override_seed(self, seed: Optional[int]):
        if seed is None:
            return
        if seed < 0:
            raise ConfigError('ransac.seed', f"must be non-negative, got {seed}")
        self.config.ransac.seed = seed


# =============================================================================
# SINGLETON ACCESS
# =============================================================================

_config_manager = None


def get_config_manager() -> ConfigManager:
    """Get the global config manager instance."""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def reset_config_manager():
    """Drop the global config manager (tests start from defaults)."""
    global _config_manager
    _config_manager = None
