"""
Height Prior Sweep for Vantage.
Runs the whole pipeline (calibrate, locate, align, pair, ROC) once per
candidate average person height to show how the metric prior affects
localisation error and the proximity ranking.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

from constants import HEIGHT_SWEEP_M, GT_THRESHOLD_M, DEFAULT_FOOT_PLANE_M, MIN_BOX_HEIGHT_PX
from entities.camera import CameraIntrinsics, CameraPose, ProjectionMatrix
from entities.detection import DetectionRecord, HeightModel, PositionRecord
from errors import InputError
from systems.alignment import (
    CorrespondenceReport, RigidTransform, correspondence_errors, fit_rigid, match_positions,
)
from systems.evaluation import LabeledPair, RocCurve, label_pairs, roc_auc
from systems.proximity import locate_records, proximity_pairs, truth_distances
from systems.ransac import RansacConfig, ransac_calibrate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeightSweepEntry:
    """Pipeline outcome for one assumed average height."""
    avg_height_m: float
    camera_height_m: float
    inlier_count: int
    correspondence: CorrespondenceReport
    roc: RocCurve

    def to_dict(self) -> Dict[str, Any]:
        return {
            'avg_height_m': self.avg_height_m,
            'camera_height_m': self.camera_height_m,
            'inlier_count': self.inlier_count,
            'correspondence': {
                'mean_error_m': self.correspondence.mean_error_m,
                'std_error_m': self.correspondence.std_error_m,
                'max_error_m': self.correspondence.max_error_m,
            },
            'auc': self.roc.auc,
            'positive_count': self.roc.positive_count,
            'negative_count': self.roc.negative_count,
        }


def evaluate_projection(records: Sequence[DetectionRecord], truth: Sequence[PositionRecord],
                        P: ProjectionMatrix, foot_plane_m: float = DEFAULT_FOOT_PLANE_M,
                        gt_threshold_m: float = GT_THRESHOLD_M
                        ) -> Tuple[RigidTransform, CorrespondenceReport, RocCurve]:
    """
    Locate every record under P, align to truth and score the proximity ranking.

    Raises:
        DegenerateFitError: Fewer than 3 usable correspondences
        SingleClassError: Pairs are all near or all far
    """
    located = locate_records(records, P, foot_plane_m)
    _, estimated, target = match_positions(located, truth)
    transform = fit_rigid(estimated, target)
    report = correspondence_errors(transform, estimated, target)

    observations = proximity_pairs(located, transform.apply_point)
    pairs = [LabeledPair(gt, obs.distance_m)
             for obs, gt in zip(observations, truth_distances(observations, truth)) if gt is not None]
    if not pairs:
        raise InputError("No person-vehicle pairs with ground truth to evaluate")
    roc = roc_auc(label_pairs(pairs, gt_threshold_m))
    return transform, report, roc


def run_height_sweep(records: Sequence[DetectionRecord], truth: Sequence[PositionRecord],
                     K: CameraIntrinsics, pose: CameraPose,
                     heights_m: Sequence[float] = HEIGHT_SWEEP_M,
                     foot_plane_m: float = DEFAULT_FOOT_PLANE_M,
                     cfg: RansacConfig = RansacConfig(),
                     gt_threshold_m: float = GT_THRESHOLD_M,
                     min_box_height_px: float = MIN_BOX_HEIGHT_PX) -> List[HeightSweepEntry]:
    """
    Calibrate and evaluate once per candidate average height.

    Args:
        records: Person and vehicle detection records
        truth: Truth positions keyed by the same record ids
        K: Trusted intrinsics
        pose: Trusted tilt and roll
        heights_m: Average heights to try
        foot_plane_m: Foot plane height
        cfg: Consensus parameters shared by every run
        gt_threshold_m: Ground-truth near threshold for labelling
        min_box_height_px: Detection box floor

    Returns:
        One entry per height, in the order given
    """
    persons = [r.to_person_detection() for r in records if r.is_person]
    entries = []
    for avg_height in heights_m:
        heights = HeightModel(avg_height, foot_plane_m)
        result = ransac_calibrate(persons, K, pose, heights, cfg, min_box_height_px)
        _, report, roc = evaluate_projection(records, truth, result.solution.projection,
                                             foot_plane_m, gt_threshold_m)
        entry = HeightSweepEntry(
            avg_height_m=avg_height,
            camera_height_m=result.solution.camera_height_m,
            inlier_count=result.inlier_count,
            correspondence=report,
            roc=roc,
        )
        logger.info("Height %.4f m: C_Z = %.4f m, mean error %.4f m, AUC %.4f",
                    avg_height, entry.camera_height_m, report.mean_error_m, roc.auc)
        entries.append(entry)
    return entries
