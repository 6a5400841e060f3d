"""
Proximity Predicate for Vantage.
Ground-plane distances between people and vehicles, the error-function
P(near) predicate, and product-form composite activity probabilities.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from constants import (
    NEAR_THRESHOLD_M, NEAR_SHARPNESS_M,
    OBJECT_CLASS_PERSON, STATUS_OK, STATUS_DEGENERATE,
)
from entities.camera import ProjectionMatrix, WorldPoint
from entities.detection import DetectionRecord, PositionRecord
from errors import DomainError
from systems.geometry import backproject_points

logger = logging.getLogger(__name__)


# =============================================================================
# ERROR FUNCTION
# =============================================================================

def erf(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Error function, exactly odd and exactly 0 at 0.

    Raises:
        DomainError: If any argument is not finite
    """
    values = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DomainError("erf argument must be finite")
    result = np.copysign(special.erf(np.abs(values)), values)
    if np.ndim(x) == 0:
        return float(result)
    return result


# =============================================================================
# PREDICATES
# =============================================================================

@dataclass(frozen=True)
class NearPredicate:
    """
    Soft "near" test: 1 well inside tau, 0.5 at tau, 0 well beyond it.

    Usage:
        near = NearPredicate(threshold_m=4.0, sharpness_m=1.0)
        p_near(near, 2.5)
    """
    threshold_m: float = NEAR_THRESHOLD_M
    sharpness_m: float = NEAR_SHARPNESS_M

    def __post_init__(self):
        if not (math.isfinite(self.threshold_m) and self.threshold_m > 0):
            raise DomainError(f"Near threshold must be positive, got {self.threshold_m}")
        if not (math.isfinite(self.sharpness_m) and self.sharpness_m > 0):
            raise DomainError(f"Near sharpness must be positive, got {self.sharpness_m}")


def ground_distance(a: WorldPoint, b: WorldPoint) -> float:
    """Planar distance; Z is ignored."""
    return math.hypot(a.X - b.X, a.Y - b.Y)


def _check_distance(distance_m: float):
    if not (math.isfinite(distance_m) and distance_m >= 0):
        raise DomainError(f"Distance must be a non-negative number, got {distance_m}")


def p_near(pred: NearPredicate, distance_m: float) -> float:
    """
    P(near) = 0.5 * erfc((d - tau) / (sigma * sqrt(2))).

    Evaluated through erfc, so the far tail keeps its relative precision
    down to the smallest double (d - tau beyond about 37 sigma gives 0.0).

    Raises:
        DomainError: If the distance is negative or not finite
    """
    _check_distance(distance_m)
    z = (distance_m - pred.threshold_m) / (pred.sharpness_m * math.sqrt(2.0))
    return float(0.5 * special.erfc(z))


def log_p_near(pred: NearPredicate, distance_m: float) -> float:
    """
    Natural log of P(near); finite and strictly decreasing for every distance.

    Use it to rank pairs by P(near) when distances reach the far tail.
    """
    _check_distance(distance_m)
    return float(special.log_ndtr((pred.threshold_m - distance_m) / pred.sharpness_m))


def composite_probability(factors: Sequence[float]) -> float:
    """Product of independent factor probabilities; 1.0 for no factors."""
    for factor in factors:
        if not (math.isfinite(factor) and 0.0 <= factor <= 1.0):
            raise DomainError(f"Probability factor must lie in [0, 1], got {factor}")
    return math.prod(factors)


# =============================================================================
# OBSERVATIONS
# =============================================================================

@dataclass(frozen=True)
class ProximityObservation:
    """A person and a vehicle dropped to the ground plane, with their distance."""
    person_ground: WorldPoint
    vehicle_centroid_ground: WorldPoint
    distance_m: float
    frame_id: Optional[int] = None
    person_id: Optional[int] = None
    vehicle_id: Optional[int] = None

    def to_dict(self, pred: Optional[NearPredicate] = None) -> Dict[str, Any]:
        data = {
            'frame_id': self.frame_id,
            'person_id': self.person_id,
            'vehicle_id': self.vehicle_id,
            'person_xy': [self.person_ground.X, self.person_ground.Y],
            'vehicle_xy': [self.vehicle_centroid_ground.X, self.vehicle_centroid_ground.Y],
            'est_distance_m': self.distance_m,
        }
        if pred is not None:
            data['p_near'] = p_near(pred, self.distance_m)
        return data


def observe(person: WorldPoint, vehicle: WorldPoint, frame_id: Optional[int] = None,
            person_id: Optional[int] = None, vehicle_id: Optional[int] = None) -> ProximityObservation:
    """Project both points to Z = 0 and measure their distance."""
    person_ground = WorldPoint(person.X, person.Y, 0.0)
    vehicle_ground = WorldPoint(vehicle.X, vehicle.Y, 0.0)
    return ProximityObservation(person_ground, vehicle_ground,
                                ground_distance(person_ground, vehicle_ground),
                                frame_id, person_id, vehicle_id)


def near_events(observations: Sequence[ProximityObservation],
                pred: NearPredicate) -> List[Tuple[ProximityObservation, float]]:
    """Observations whose P(near) is at least 0.5, with that probability."""
    events = []
    for obs in observations:
        probability = p_near(pred, obs.distance_m)
        if probability >= 0.5:
            events.append((obs, probability))
    logger.info("%d of %d person-vehicle pairs are near", len(events), len(observations))
    return events


# =============================================================================
# LOCATING RECORDS
# =============================================================================

def locate_records(records: Sequence[DetectionRecord], P: ProjectionMatrix,
                   foot_plane_m: float = 0.0) -> List[PositionRecord]:
    """
    Drop every detection record onto the ground.

    Persons use their foot pixel on the foot plane; vehicles use their box
    center on Z = 0. Pixels whose ray misses the plane are marked degenerate.
    """
    if not records:
        return []
    pixels = np.array([[r.ground_px.u, r.ground_px.v] for r in records])
    planes = np.array([foot_plane_m if r.is_person else 0.0 for r in records])

    points = np.full((len(records), 3), np.nan)
    for plane in np.unique(planes):
        rows = planes == plane
        points[rows] = backproject_points(P, pixels[rows], float(plane))

    located = []
    for record, point in zip(records, points):
        if np.all(np.isfinite(point)):
            located.append(PositionRecord(record.record_id, record.frame_id, record.object_class,
                                          float(point[0]), float(point[1]), float(point[2]), STATUS_OK))
        else:
            logger.warning("Record %d: pixel ray misses the ground plane", record.record_id)
            located.append(PositionRecord(record.record_id, record.frame_id, record.object_class,
                                          status=STATUS_DEGENERATE))
    return located


def proximity_pairs(positions: Sequence[PositionRecord],
                    transform: Optional[Callable[[WorldPoint], WorldPoint]] = None) -> List[ProximityObservation]:
    """
    Every person-vehicle pair sharing a frame, both located.

    Args:
        positions: Located records
        transform: Optional map applied to each point first (e.g. an alignment)
    """
    by_frame: Dict[int, Tuple[List[PositionRecord], List[PositionRecord]]] = {}
    for record in positions:
        if not record.is_ok:
            continue
        persons, vehicles = by_frame.setdefault(record.frame_id, ([], []))
        (persons if record.object_class == OBJECT_CLASS_PERSON else vehicles).append(record)

    observations = []
    for frame_id in sorted(by_frame):
        persons, vehicles = by_frame[frame_id]
        for person in persons:
            for vehicle in vehicles:
                p, v = person.point, vehicle.point
                if transform is not None:
                    p, v = transform(p), transform(v)
                observations.append(observe(p, v, frame_id, person.record_id, vehicle.record_id))
    return observations


def truth_distances(observations: Sequence[ProximityObservation],
                    truth: Sequence[PositionRecord]) -> List[Optional[float]]:
    """Ground-truth distance of each observed pair, None when either record lacks truth."""
    by_id = {r.record_id: r for r in truth if r.is_ok}
    distances = []
    for obs in observations:
        person = by_id.get(obs.person_id)
        vehicle = by_id.get(obs.vehicle_id)
        if person is None or vehicle is None:
            distances.append(None)
        else:
            distances.append(ground_distance(person.point, vehicle.point))
    return distances
