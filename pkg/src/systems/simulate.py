"""
Synthetic Scenes for Vantage.
Generates cameras, pedestrians and vehicles with known geometry so every
stage of the pipeline can be checked against exact ground truth.

Box models:
    centers - the box is built around the projected foot and head, and the
              exact (noisy) keypoints are attached to the detection
    hull    - only the axis-aligned box of the projected person is emitted,
              so the foot and head fall back to the box bottom/top centers
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from constants import (
    BOX_MODEL_CENTERS, ALL_BOX_MODELS, BOX_WIDTH_RATIO,
    OUTLIER_HEIGHT_RANGE_M, OUTLIER_FOOT_OFFSET_M, VEHICLE_LENGTH_M, VEHICLE_HEIGHT_M,
    DEFAULT_IMAGE_SIZE, DEFAULT_AVG_HEIGHT_M,
    OBJECT_CLASS_PERSON, OBJECT_CLASS_VEHICLE, STATUS_OK,
    DETECTIONS_SUFFIX, TRUTH_SUFFIX, TRUTH_POSITIONS_SUFFIX,
)
from entities.camera import (
    CameraIntrinsics, CameraPose, PixelPoint, ProjectionMatrix, WorldPoint,
)
from entities.detection import DetectionRecord, PersonDetection, PositionRecord
from errors import ConfigError, DomainError, EmptySceneError, ParseError
from record_store import load_json, save_json, save_detections, save_positions
from systems.geometry import build_rotation, compose_projection, project_points

logger = logging.getLogger(__name__)

Region = Tuple[Tuple[float, float], Tuple[float, float]]


# =============================================================================
# SCENE SPECIFICATION
# =============================================================================

def _check_region(region: Region, name: str):
    (x_min, x_max), (y_min, y_max) = region
    if not (x_min < x_max and y_min < y_max):
        raise DomainError(f"{name} must be ((x_min, x_max), (y_min, y_max)) with min < max, got {region}")


@dataclass(frozen=True)
class CameraSpec:
    """True camera of a synthetic scene."""
    focal_px: float = 1500.0
    image_size: Tuple[int, int] = DEFAULT_IMAGE_SIZE
    tilt_deg: float = 70.0
    roll_deg: float = 0.0
    camera_height_m: float = 8.0
    principal_point: Optional[Tuple[float, float]] = None

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics.from_image_size(self.focal_px, self.image_size[0], self.image_size[1],
                                                self.principal_point)

    def pose(self) -> CameraPose:
        return CameraPose(self.tilt_deg, self.roll_deg, self.camera_height_m)


@dataclass(frozen=True)
class PersonSpec:
    count: int = 20
    height_mean_m: float = DEFAULT_AVG_HEIGHT_M
    height_std_m: float = 0.0
    region: Region = ((-10.0, 10.0), (15.0, 60.0))


@dataclass(frozen=True)
class VehicleSpec:
    """Vehicles are placed uniformly in `region` unless explicit placements are given."""
    count: int = 0
    region: Region = ((-10.0, 10.0), (15.0, 60.0))
    placements: Optional[Tuple[Tuple[float, float], ...]] = None


@dataclass(frozen=True)
class NoiseSpec:
    pixel_std: float = 0.0
    outlier_fraction: float = 0.0


@dataclass(frozen=True)
class SceneSpec:
    """
    Everything needed to generate a scene; identical specs give identical scenes.

    Usage:
        spec = SceneSpec(camera=CameraSpec(roll_deg=1.0), persons=PersonSpec(count=30))
        scene = generate(spec)
    """
    camera: CameraSpec = field(default_factory=CameraSpec)
    persons: PersonSpec = field(default_factory=PersonSpec)
    vehicles: VehicleSpec = field(default_factory=VehicleSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    rng_seed: int = 0
    box_model: str = BOX_MODEL_CENTERS
    frame_count: int = 1

    def __post_init__(self):
        persons = self.persons
        if persons.count < 0 or self.vehicles.count < 0:
            raise DomainError("Person and vehicle counts must be non-negative")
        if not persons.height_mean_m > 0:
            raise DomainError(f"Mean person height must be positive, got {persons.height_mean_m}")
        if persons.height_std_m < 0:
            raise DomainError(f"Height std must be non-negative, got {persons.height_std_m}")
        tallest = max(persons.height_mean_m + 6.0 * persons.height_std_m, OUTLIER_HEIGHT_RANGE_M[1]
                      if self.noise.outlier_fraction > 0 else 0.0)
        if not self.camera.camera_height_m > tallest:
            raise DomainError(
                f"Camera height {self.camera.camera_height_m} m must exceed the tallest person ({tallest} m)"
            )
        if self.noise.pixel_std < 0:
            raise DomainError(f"Pixel noise std must be non-negative, got {self.noise.pixel_std}")
        if not 0.0 <= self.noise.outlier_fraction < 1.0:
            raise DomainError(f"Outlier fraction must lie in [0, 1), got {self.noise.outlier_fraction}")
        if self.rng_seed < 0:
            raise DomainError(f"Seed must be non-negative, got {self.rng_seed}")
        if self.box_model not in ALL_BOX_MODELS:
            raise DomainError(f"Box model must be one of {ALL_BOX_MODELS}, got {self.box_model!r}")
        if self.frame_count < 1:
            raise DomainError(f"Frame count must be positive, got {self.frame_count}")
        _check_region(persons.region, "persons.region")
        _check_region(self.vehicles.region, "vehicles.region")

    def with_seed(self, rng_seed: int) -> 'SceneSpec':
        return SceneSpec(self.camera, self.persons, self.vehicles, self.noise,
                         rng_seed, self.box_model, self.frame_count)

    def to_dict(self) -> Dict[str, Any]:
        camera = self.camera
        vehicles = self.vehicles
        return {
            'camera': {
                'focal_px': camera.focal_px,
                'image_size': list(camera.image_size),
                'principal_point': list(camera.principal_point) if camera.principal_point else None,
                'tilt_deg': camera.tilt_deg,
                'roll_deg': camera.roll_deg,
                'camera_height_m': camera.camera_height_m,
            },
            'persons': {
                'count': self.persons.count,
                'height_mean_m': self.persons.height_mean_m,
                'height_std_m': self.persons.height_std_m,
                'region': [list(r) for r in self.persons.region],
            },
            'vehicles': {
                'count': vehicles.count,
                'region': [list(r) for r in vehicles.region],
                'placements': [list(p) for p in vehicles.placements] if vehicles.placements else None,
            },
            'noise': {
                'pixel_std': self.noise.pixel_std,
                'outlier_fraction': self.noise.outlier_fraction,
            },
            'rng_seed': self.rng_seed,
            'box_model': self.box_model,
            'frame_count': self.frame_count,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SceneSpec':
        """
        Build a spec from nested dictionaries; missing keys keep their defaults.

        Raises:
            ConfigError: Naming the offending field
        """
        def section(name: str) -> Dict[str, Any]:
            value = data.get(name, {}) or {}
            if not isinstance(value, dict):
                raise ConfigError(name, "must be a table")
            return value

        def region(value, path: str) -> Region:
            try:
                (x_min, x_max), (y_min, y_max) = value
                return (float(x_min), float(x_max)), (float(y_min), float(y_max))
            except (TypeError, ValueError) as e:
                raise ConfigError(path, f"must be [[x_min, x_max], [y_min, y_max]] ({e})") from e

        def build(path: str, factory, **kwargs):
            try:
                return factory(**kwargs)
            except TypeError as e:
                raise ConfigError(path, str(e)) from e

        try:
            cam = section('camera')
            camera_kwargs = {k: cam[k] for k in ('focal_px', 'tilt_deg', 'roll_deg', 'camera_height_m')
                             if k in cam}
            if cam.get('image_size') is not None:
                camera_kwargs['image_size'] = tuple(int(v) for v in cam['image_size'])
            if cam.get('principal_point') is not None:
                camera_kwargs['principal_point'] = tuple(float(v) for v in cam['principal_point'])
            camera = build('camera', CameraSpec, **camera_kwargs)

            per = section('persons')
            person_kwargs = {k: per[k] for k in ('count', 'height_mean_m', 'height_std_m') if k in per}
            if 'region' in per:
                person_kwargs['region'] = region(per['region'], 'persons.region')
            persons = build('persons', PersonSpec, **person_kwargs)

            veh = section('vehicles')
            vehicle_kwargs = {k: veh[k] for k in ('count',) if k in veh}
            if 'region' in veh:
                vehicle_kwargs['region'] = region(veh['region'], 'vehicles.region')
            if veh.get('placements') is not None:
                try:
                    vehicle_kwargs['placements'] = tuple((float(x), float(y)) for x, y in veh['placements'])
                except (TypeError, ValueError) as e:
                    raise ConfigError('vehicles.placements', f"must be a list of [X, Y] ({e})") from e
            vehicles = build('vehicles', VehicleSpec, **vehicle_kwargs)

            noise = build('noise', NoiseSpec, **section('noise'))

            return cls(
                camera=camera,
                persons=persons,
                vehicles=vehicles,
                noise=noise,
                rng_seed=int(data.get('rng_seed', 0)),
                box_model=data.get('box_model', BOX_MODEL_CENTERS),
                frame_count=int(data.get('frame_count', 1)),
            )
        except DomainError as e:
            raise ConfigError('scene', str(e)) from e
        except (TypeError, ValueError) as e:
            raise ConfigError('scene', f"invalid value ({e})") from e


# =============================================================================
# GROUND TRUTH
# =============================================================================

@dataclass(frozen=True)
class PersonTruth:
    """A generated person; record_id is None when the person is not visible."""
    frame_id: int
    foot: WorldPoint
    height_m: float
    visible: bool
    record_id: Optional[int] = None
    outlier: Optional[str] = None  # 'height' or 'foot' for off-model persons

    @property
    def head(self) -> WorldPoint:
        return WorldPoint(self.foot.X, self.foot.Y, self.foot.Z + self.height_m)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'record_id': self.record_id,
            'frame_id': self.frame_id,
            'foot': [self.foot.X, self.foot.Y, self.foot.Z],
            'height_m': self.height_m,
            'visible': self.visible,
            'outlier': self.outlier,
        }


@dataclass(frozen=True)
class VehicleTruth:
    frame_id: int
    centroid: WorldPoint
    visible: bool
    record_id: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'record_id': self.record_id,
            'frame_id': self.frame_id,
            'centroid': [self.centroid.X, self.centroid.Y, self.centroid.Z],
            'visible': self.visible,
        }


@dataclass(frozen=True, eq=False)
class SceneTruth:
    """True camera and object placements of a scene."""
    intrinsics: CameraIntrinsics
    pose: CameraPose
    projection: ProjectionMatrix = field(repr=False)
    persons: Tuple[PersonTruth, ...] = ()
    vehicles: Tuple[VehicleTruth, ...] = ()

    @property
    def camera_height_m(self) -> float:
        return self.pose.camera_height_m

    def positions(self) -> List[PositionRecord]:
        """Truth positions of every visible object, in record order."""
        records = []
        for person in self.persons:
            if person.visible:
                records.append(PositionRecord(person.record_id, person.frame_id, OBJECT_CLASS_PERSON,
                                              person.foot.X, person.foot.Y, person.foot.Z, STATUS_OK))
        for vehicle in self.vehicles:
            if vehicle.visible:
                records.append(PositionRecord(vehicle.record_id, vehicle.frame_id, OBJECT_CLASS_VEHICLE,
                                              vehicle.centroid.X, vehicle.centroid.Y,
                                              vehicle.centroid.Z, STATUS_OK))
        records.sort(key=lambda r: r.record_id)
        return records

    def to_dict(self) -> Dict[str, Any]:
        K = self.intrinsics
        return {
            'camera': {
                'focal_px': K.focal_length_px,
                'principal_point': list(K.principal_point),
                'image_size': list(K.image_size) if K.image_size else None,
                'tilt_deg': self.pose.tilt_deg,
                'roll_deg': self.pose.roll_deg,
                'camera_height_m': self.pose.camera_height_m,
            },
            'projection_matrix': self.projection.to_list(),
            'persons': [p.to_dict() for p in self.persons],
            'vehicles': [v.to_dict() for v in self.vehicles],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SceneTruth':
        cam = data['camera']
        image_size = tuple(cam['image_size']) if cam.get('image_size') else None
        K = CameraIntrinsics(float(cam['focal_px']), tuple(cam['principal_point']), image_size)
        pose = CameraPose(cam['tilt_deg'], cam['roll_deg'], cam['camera_height_m'])
        persons = tuple(
            PersonTruth(p['frame_id'], WorldPoint(*p['foot']), p['height_m'], p['visible'],
                        p.get('record_id'), p.get('outlier'))
            for p in data.get('persons', [])
        )
        vehicles = tuple(
            VehicleTruth(v['frame_id'], WorldPoint(*v['centroid']), v['visible'], v.get('record_id'))
            for v in data.get('vehicles', [])
        )
        P = ProjectionMatrix(np.array(data['projection_matrix']), pose.camera_height_m)
        return cls(K, pose, P, persons, vehicles)


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """Generated detection records plus the truth they came from."""
    spec: SceneSpec
    records: Tuple[DetectionRecord, ...]
    truth: SceneTruth

    @property
    def detections(self) -> List[PersonDetection]:
        return [r.to_person_detection() for r in self.records if r.is_person]

    @property
    def vehicle_records(self) -> List[DetectionRecord]:
        return [r for r in self.records if not r.is_person]

    @property
    def vehicle_pixels(self) -> List[PixelPoint]:
        return [r.center_px for r in self.vehicle_records]

    @property
    def projection(self) -> ProjectionMatrix:
        return self.truth.projection


# =============================================================================
# GENERATION
# =============================================================================

def _inside(pixels: np.ndarray, lam: np.ndarray, width: int, height: int) -> np.ndarray:
    with np.errstate(invalid='ignore'):
        return ((lam > 0) & np.all(np.isfinite(pixels), axis=1) &
                (pixels[:, 0] >= 0) & (pixels[:, 0] <= width) &
                (pixels[:, 1] >= 0) & (pixels[:, 1] <= height))


def _person_box(foot: np.ndarray, head: np.ndarray) -> Tuple[float, float, float, float]:
    """Box spanning the projected person, widened by the cosmetic width ratio."""
    half_width = BOX_WIDTH_RATIO * abs(foot[1] - head[1]) / 2.0
    left = min(foot[0], head[0]) - half_width
    right = max(foot[0], head[0]) + half_width
    top = min(foot[1], head[1])
    bottom = max(foot[1], head[1])
    return float(left), float(top), float(right), float(bottom)


def _valid_box(bbox: Tuple[float, float, float, float]) -> bool:
    left, top, right, bottom = bbox
    return right > left and bottom > top


def _draw_persons(spec: SceneSpec, rng: np.random.Generator):
    """Foot points, heights and outlier kinds for one frame."""
    persons = spec.persons
    n = persons.count
    (x_min, x_max), (y_min, y_max) = persons.region
    xy = np.column_stack([rng.uniform(x_min, x_max, n), rng.uniform(y_min, y_max, n)])
    if persons.height_std_m > 0:
        heights = rng.normal(persons.height_mean_m, persons.height_std_m, n)
    else:
        heights = np.full(n, persons.height_mean_m)
    foot_z = np.zeros(n)
    kinds: List[Optional[str]] = [None] * n

    n_outliers = int(round(spec.noise.outlier_fraction * n))
    if n_outliers:
        for index in rng.choice(n, size=n_outliers, replace=False):
            if rng.random() < 0.5:
                heights[index] = rng.uniform(*OUTLIER_HEIGHT_RANGE_M)
                kinds[index] = 'height'
            else:
                foot_z[index] = OUTLIER_FOOT_OFFSET_M * (1.0 if rng.random() < 0.5 else -1.0)
                kinds[index] = 'foot'
    return np.column_stack([xy, foot_z]), heights, kinds


def _draw_vehicles(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    vehicles = spec.vehicles
    if vehicles.placements:
        xy = np.array(vehicles.placements, dtype=np.float64)
    else:
        (x_min, x_max), (y_min, y_max) = vehicles.region
        xy = np.column_stack([rng.uniform(x_min, x_max, vehicles.count),
                              rng.uniform(y_min, y_max, vehicles.count)])
    return np.column_stack([xy.reshape(-1, 2), np.zeros(len(xy))])


def generate(spec: SceneSpec) -> SyntheticScene:
    """
    Generate a scene from its spec.

    Args:
        spec: Scene specification

    Returns:
        SyntheticScene with one record per visible person and vehicle

    Raises:
        EmptySceneError: If no person is visible
    """
    rng = np.random.default_rng(spec.rng_seed)
    camera = spec.camera
    K = camera.intrinsics()
    R = build_rotation(camera.tilt_deg, camera.roll_deg)
    P = compose_projection(K, R, camera.camera_height_m)
    width, height = camera.image_size
    pixel_std = spec.noise.pixel_std

    records: List[DetectionRecord] = []
    person_truths: List[PersonTruth] = []
    vehicle_truths: List[VehicleTruth] = []

    for frame_id in range(spec.frame_count):
        feet_world, heights, kinds = _draw_persons(spec, rng)
        heads_world = feet_world.copy()
        heads_world[:, 2] += heights
        feet_px, foot_lam = project_points(P, feet_world)
        heads_px, head_lam = project_points(P, heads_world)
        visible = (_inside(feet_px, foot_lam, width, height) &
                   _inside(heads_px, head_lam, width, height))

        for index in range(len(feet_world)):
            record_id = None
            if visible[index]:
                foot = feet_px[index]
                head = heads_px[index]
                if spec.box_model == BOX_MODEL_CENTERS:
                    if pixel_std > 0:
                        foot = foot + rng.normal(0.0, pixel_std, 2)
                        head = head + rng.normal(0.0, pixel_std, 2)
                    bbox = _person_box(foot, head)
                    keypoints = (PixelPoint.from_array(foot), PixelPoint.from_array(head))
                else:
                    bbox = _person_box(foot, head)
                    if pixel_std > 0:
                        bbox = tuple(float(v) for v in np.array(bbox) + rng.normal(0.0, pixel_std, 4))
                    keypoints = (None, None)

                if _valid_box(bbox):
                    record_id = len(records)
                    records.append(DetectionRecord(record_id, frame_id, OBJECT_CLASS_PERSON,
                                                   bbox, *keypoints))
            person_truths.append(PersonTruth(
                frame_id=frame_id,
                foot=WorldPoint.from_array(feet_world[index]),
                height_m=float(heights[index]),
                visible=record_id is not None,
                record_id=record_id,
                outlier=kinds[index],
            ))

        centroids = _draw_vehicles(spec, rng)
        centers_px, lam = project_points(P, centroids)
        vehicle_visible = _inside(centers_px, lam, width, height)
        for index in range(len(centroids)):
            record_id = None
            if vehicle_visible[index]:
                center = centers_px[index]
                if pixel_std > 0:
                    center = center + rng.normal(0.0, pixel_std, 2)
                # Pixels per meter at the vehicle's depth
                scale = camera.focal_px / lam[index]
                half_w = scale * VEHICLE_LENGTH_M / 2.0
                half_h = scale * VEHICLE_HEIGHT_M / 2.0
                bbox = (float(center[0] - half_w), float(center[1] - half_h),
                        float(center[0] + half_w), float(center[1] + half_h))
                record_id = len(records)
                records.append(DetectionRecord(record_id, frame_id, OBJECT_CLASS_VEHICLE, bbox))
            vehicle_truths.append(VehicleTruth(frame_id, WorldPoint.from_array(centroids[index]),
                                               record_id is not None, record_id))

    visible_persons = sum(1 for p in person_truths if p.visible)
    if visible_persons == 0:
        raise EmptySceneError("No generated person is visible from the camera")
    hidden = len(person_truths) - visible_persons
    if hidden:
        logger.info("%d of %d generated persons fall outside the image", hidden, len(person_truths))

    truth = SceneTruth(K, camera.pose(), P, tuple(person_truths), tuple(vehicle_truths))
    return SyntheticScene(spec, tuple(records), truth)


# =============================================================================
# EXPORT
# =============================================================================

def export_scene(scene: SyntheticScene, prefix: str) -> Dict[str, str]:
    """
    Write the detections file, truth sidecar and truth positions for a scene.

    Returns:
        Mapping of 'detections', 'truth' and 'truth_positions' to the written paths
    """
    paths = {
        'detections': prefix + DETECTIONS_SUFFIX,
        'truth': prefix + TRUTH_SUFFIX,
        'truth_positions': prefix + TRUTH_POSITIONS_SUFFIX,
    }
    save_detections(scene.records, paths['detections'])
    truth = scene.truth.to_dict()
    truth['spec'] = scene.spec.to_dict()
    save_json(truth, paths['truth'])
    save_positions(scene.truth.positions(), paths['truth_positions'])
    logger.info("Exported %d records to %s", len(scene.records), paths['detections'])
    return paths


def load_truth(path: str) -> SceneTruth:
    """Read a truth sidecar written by export_scene."""
    data = load_json(path)
    try:
        return SceneTruth.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(path, None, f"Invalid truth sidecar: {e}") from e
