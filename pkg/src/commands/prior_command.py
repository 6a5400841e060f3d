"""
Prior command for Vantage.
Aggregates per-frame pose predictions into one trusted camera section.
"""

import logging

from constants import POSE_FOCAL_BIN_PX, POSE_ANGLE_BIN_DEG
from commands.base_command import BaseCommand
from errors import ParseError
from record_store import iter_json_lines
from systems.pose_prior import PosePrediction, pose_mode

logger = logging.getLogger(__name__)

PREDICTION_FIELDS = ('focal_px', 'tilt_deg', 'roll_deg')


def load_predictions(path: str):
    """Read {focal_px, tilt_deg, roll_deg} JSON lines."""
    predictions = []
    for line, data in iter_json_lines(path):
        try:
            predictions.append(PosePrediction(*(float(data[key]) for key in PREDICTION_FIELDS)))
        except KeyError as e:
            raise ParseError(path, line, f"Missing field {e}") from None
        except (TypeError, ValueError) as e:
            raise ParseError(path, line, str(e)) from e
    return predictions


class PriorCommand(BaseCommand):
    """
    vantage prior PREDICTIONS [--focal-bin PX] [--angle-bin DEG]

    Prints (or writes) a camera section with the mode of each parameter,
    ready to paste into a run config.
    """

    name = 'prior'
    help = 'mode of per-frame focal length, tilt and roll predictions'

    def add_arguments(self, parser):
        parser.add_argument('predictions', help='pose predictions (JSON lines)')
        parser.add_argument('--focal-bin', type=float, default=POSE_FOCAL_BIN_PX,
                            help='focal length bin width in pixels')
        parser.add_argument('--angle-bin', type=float, default=POSE_ANGLE_BIN_DEG,
                            help='tilt and roll bin width in degrees')

    def run(self, args, config) -> int:
        predictions = load_predictions(args.predictions)
        mode = pose_mode(predictions, args.focal_bin, args.angle_bin)
        report = {
            'camera': mode.to_dict(),
            'prediction_count': len(predictions),
            'focal_bin_px': args.focal_bin,
            'angle_bin_deg': args.angle_bin,
        }
        self.write_report(report, args.output)
        return 0
