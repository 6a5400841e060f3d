"""
Detection value types for Vantage.
Person boxes, their foot/head keypoints, the height prior, and file records.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from constants import (
    DEFAULT_AVG_HEIGHT_M, DEFAULT_FOOT_PLANE_M,
    ALL_OBJECT_CLASSES, OBJECT_CLASS_PERSON, STATUS_OK,
)
from entities.camera import PixelPoint, WorldPoint
from errors import DomainError


@dataclass(frozen=True)
class PersonDetection:
    """
    An axis-aligned person box reduced to foot and head pixels.

    Foot and head default to the bottom-center and top-center of the box.
    Explicit keypoints override them (the simulator attaches exact ones).

    Usage:
        det = PersonDetection(frame_id=0, bbox=(100, 40, 130, 120))
        det.foot_px  # PixelPoint(115.0, 120.0)
    """
    frame_id: int
    bbox: Tuple[float, float, float, float]  # left, top, right, bottom
    foot: Optional[PixelPoint] = None
    head: Optional[PixelPoint] = None
    record_id: Optional[int] = None

    def __post_init__(self):
        left, top, right, bottom = self.bbox
        if not all(math.isfinite(x) for x in self.bbox):
            raise DomainError(f"Box coordinates must be finite, got {self.bbox}")
        if not right > left:
            raise DomainError(f"Box right {right} must exceed left {left}")
        if not bottom > top:
            raise DomainError(f"Box bottom {bottom} must exceed top {top}")

    @property
    def foot_px(self) -> PixelPoint:
        if self.foot is not None:
            return self.foot
        left, _, right, bottom = self.bbox
        return PixelPoint((left + right) / 2.0, bottom)

    @property
    def head_px(self) -> PixelPoint:
        if self.head is not None:
            return self.head
        left, top, right, _ = self.bbox
        return PixelPoint((left + right) / 2.0, top)

    @property
    def box_height_px(self) -> float:
        return self.bbox[3] - self.bbox[1]


@dataclass(frozen=True)
class HeightModel:
    """Average head height and foot plane, both in meters."""
    avg_height_m: float = DEFAULT_AVG_HEIGHT_M
    foot_plane_m: float = DEFAULT_FOOT_PLANE_M

    def __post_init__(self):
        if not (math.isfinite(self.avg_height_m) and math.isfinite(self.foot_plane_m)):
            raise DomainError("Height model values must be finite")
        if not self.avg_height_m > 0:
            raise DomainError(f"Average height must be positive, got {self.avg_height_m}")
        if not self.avg_height_m > self.foot_plane_m:
            raise DomainError(
                f"Average height {self.avg_height_m} must exceed foot plane {self.foot_plane_m}"
            )

    def scaled(self, factor: float) -> 'HeightModel':
        return HeightModel(self.avg_height_m * factor, self.foot_plane_m * factor)


# =============================================================================
# FILE RECORDS
# =============================================================================

@dataclass(frozen=True)
class DetectionRecord:
    """
    One line of a detections file: a person or vehicle box in one frame.

    Persons may carry explicit foot/head keypoints; vehicles never do.
    """
    record_id: int
    frame_id: int
    object_class: str
    bbox: Tuple[float, float, float, float]
    foot: Optional[PixelPoint] = None
    head: Optional[PixelPoint] = None

    def __post_init__(self):
        if self.object_class not in ALL_OBJECT_CLASSES:
            raise DomainError(
                f"Object class must be one of {ALL_OBJECT_CLASSES}, got {self.object_class!r}"
            )
        left, top, right, bottom = self.bbox
        if not all(math.isfinite(x) for x in self.bbox):
            raise DomainError(f"Box coordinates must be finite, got {self.bbox}")
        if not (right > left and bottom > top):
            raise DomainError(f"Box {self.bbox} must have right > left and bottom > top")

    @property
    def is_person(self) -> bool:
        return self.object_class == OBJECT_CLASS_PERSON

    @property
    def center_px(self) -> PixelPoint:
        left, top, right, bottom = self.bbox
        return PixelPoint((left + right) / 2.0, (top + bottom) / 2.0)

    @property
    def ground_px(self) -> PixelPoint:
        """Pixel that touches the ground: the foot for persons, the box center for vehicles."""
        if self.is_person:
            return self.to_person_detection().foot_px
        return self.center_px

    def to_person_detection(self) -> PersonDetection:
        return PersonDetection(self.frame_id, self.bbox, self.foot, self.head, self.record_id)

    def to_dict(self) -> Dict[str, Any]:
        left, top, right, bottom = self.bbox
        data = {
            'record_id': self.record_id,
            'frame_id': self.frame_id,
            'object_class': self.object_class,
            'left': left,
            'top': top,
            'right': right,
            'bottom': bottom,
        }
        if self.foot is not None:
            data['foot'] = [self.foot.u, self.foot.v]
        if self.head is not None:
            data['head'] = [self.head.u, self.head.v]
        return data


@dataclass(frozen=True)
class PositionRecord:
    """One line of a positions file: a located object on the ground, or a degenerate marker."""
    record_id: int
    frame_id: int
    object_class: str
    X: Optional[float] = None
    Y: Optional[float] = None
    Z: Optional[float] = None
    status: str = STATUS_OK

    @property
    def is_ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def point(self) -> WorldPoint:
        if not self.is_ok:
            raise DomainError(f"Record {self.record_id} has no position (status {self.status})")
        return WorldPoint(self.X, self.Y, self.Z)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'record_id': self.record_id,
            'frame_id': self.frame_id,
            'object_class': self.object_class,
            'X': self.X,
            'Y': self.Y,
            'Z': self.Z,
            'status': self.status,
        }
