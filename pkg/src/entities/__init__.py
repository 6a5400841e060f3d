# Domain value types package
from entities.camera import (
    WorldPoint, PixelPoint, CameraIntrinsics, CameraPose,
    RotationMatrix, ProjectionCoefficients, ProjectionMatrix,
)
from entities.detection import PersonDetection, HeightModel, DetectionRecord, PositionRecord
