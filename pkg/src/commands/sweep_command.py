"""
Sweep command for Vantage.
Repeats calibration and evaluation for several assumed average heights.
"""

import logging

from constants import HEIGHT_SWEEP_M
from commands.base_command import BaseCommand
from errors import InputError
from record_store import load_detections, load_positions
from systems.height_sweep import run_height_sweep

logger = logging.getLogger(__name__)


class SweepCommand(BaseCommand):
    """vantage sweep DETECTIONS TRUTH [--heights H ...]"""

    name = 'sweep'
    help = 'calibrate, align and score the ranking once per average height'

    def add_arguments(self, parser):
        parser.add_argument('detections', help='person and vehicle detections (JSON lines)')
        parser.add_argument('truth', help='truth positions keyed by the same record ids')
        parser.add_argument('--heights', type=float, nargs='+', default=list(HEIGHT_SWEEP_M),
                            metavar='METRES', help='average heights to try')

    def run(self, args, config) -> int:
        camera = config.require_camera()
        records = load_detections(args.detections)
        if not any(r.is_person for r in records):
            raise InputError(f"{args.detections}: no person detections to calibrate with")
        truth = load_positions(args.truth)

        entries = run_height_sweep(
            records, truth, camera.intrinsics(), camera.pose(),
            heights_m=args.heights,
            foot_plane_m=config.heights.foot_plane_m,
            cfg=config.ransac_config(),
            gt_threshold_m=config.eval.gt_threshold_m,
            min_box_height_px=config.calibration.min_box_height_px,
        )
        report = {
            'gt_threshold_m': config.eval.gt_threshold_m,
            'entries': [entry.to_dict() for entry in entries],
        }
        self.write_report(report, args.output)
        return 0
