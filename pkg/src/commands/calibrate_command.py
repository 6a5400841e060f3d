"""
Calibrate command for Vantage.
Recovers the camera height and projection matrix from person detections.
"""

import logging
from dataclasses import asdict

import numpy as np

from constants import VERSION, FORMULATION_PAPER_LITERAL
from commands.base_command import BaseCommand
from errors import InputError
from record_store import load_detections
from systems.calibration import Formulation, calibrate, keypoint_arrays
from systems.ransac import head_errors, ransac_calibrate

logger = logging.getLogger(__name__)


class CalibrateCommand(BaseCommand):
    """
    vantage calibrate DETECTIONS [--direct]

    Runs consensus calibration by default. With --direct, or when the
    configured formulation is the literal system, every detection above the
    box floor goes into one least-squares solve.
    """

    name = 'calibrate'
    help = 'estimate camera height and projection matrix from person detections'

    def add_arguments(self, parser):
        parser.add_argument('detections', help='detections file (JSON lines)')
        parser.add_argument('--direct', action='store_true',
                            help='skip consensus and solve with every detection')

    def run(self, args, config) -> int:
        camera = config.require_camera()
        K = camera.intrinsics()
        pose = camera.pose()
        heights = config.heights.height_model()

        records = load_detections(args.detections)
        persons = [r for r in records if r.is_person]
        if not persons:
            raise InputError(f"{args.detections}: no person detections to calibrate with")
        detections = [r.to_person_detection() for r in persons]

        formulation = Formulation(config.calibration.formulation)
        direct = args.direct or config.calibration.formulation == FORMULATION_PAPER_LITERAL
        min_box = config.calibration.min_box_height_px

        report = {
            'version': VERSION,
            'method': 'direct' if direct else 'ransac',
            'camera': asdict(camera),
            'heights': asdict(config.heights),
            'record_ids': [r.record_id for r in persons],
        }

        if direct:
            solution = calibrate(detections, K, pose, heights, formulation, min_box)
            feet, heads = keypoint_arrays(detections)
            errors = head_errors(solution.projection, feet, heads, heights)
            eligible = np.array([d.box_height_px >= min_box for d in detections], dtype=bool)
            report.update(solution.to_dict())
            report['inlier_mask'] = eligible.tolist()
            report['inlier_count'] = int(np.count_nonzero(eligible))
            report['per_detection_error_px'] = errors.tolist()
        else:
            result = ransac_calibrate(detections, K, pose, heights, config.ransac_config(), min_box)
            ransac = result.to_dict()
            report.update(ransac.pop('solution'))
            report.update(ransac)

        logger.info("Camera height %.4f m from %d person detections",
                    report['camera_height_m'], len(persons))
        self.write_report(report, args.output)
        return 0
