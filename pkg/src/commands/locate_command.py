"""
Locate command for Vantage.
Back-projects every detection record to the ground with a calibrated camera.
"""

import logging
from typing import Optional, Tuple

from commands.base_command import BaseCommand
from entities.camera import ProjectionMatrix
from errors import DomainError, ParseError
from record_store import load_detections, load_json
from systems.proximity import locate_records

logger = logging.getLogger(__name__)


def load_calibration(path: str) -> Tuple[ProjectionMatrix, Optional[float]]:
    """
    Read the projection matrix and foot plane from a calibration report.

    Returns:
        (projection, foot_plane_m); the foot plane is None when the report has none
    """
    report = load_json(path)
    if 'projection_matrix' not in report:
        raise ParseError(path, None, "Calibration report has no 'projection_matrix'")
    try:
        P = ProjectionMatrix(report['projection_matrix'], report.get('camera_height_m'))
    except (TypeError, ValueError, DomainError) as e:
        raise ParseError(path, None, f"Invalid projection matrix: {e}") from e
    foot_plane = report.get('heights', {}).get('foot_plane_m')
    return P, foot_plane


class LocateCommand(BaseCommand):
    """vantage locate DETECTIONS --calibration REPORT"""

    name = 'locate'
    help = 'back-project detections to world positions'

    def add_arguments(self, parser):
        parser.add_argument('detections', help='detections file (JSON lines)')
        parser.add_argument('--calibration', required=True, help='report written by calibrate')

    def run(self, args, config) -> int:
        records = load_detections(args.detections)
        P, foot_plane = load_calibration(args.calibration)
        if foot_plane is None:
            foot_plane = config.heights.foot_plane_m

        positions = locate_records(records, P, foot_plane)
        degenerate = sum(1 for p in positions if not p.is_ok)
        if degenerate:
            logger.warning("%d of %d records could not be located", degenerate, len(positions))
        self.write_records([p.to_dict() for p in positions], args.output)
        return 0
