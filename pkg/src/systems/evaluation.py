"""
ROC Evaluation for Vantage.
Labels person-vehicle pairs by their ground-truth distance and measures how
well the estimated distances rank them.
"""

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from constants import GT_THRESHOLD_M, ROC_CSV_HEADER
from errors import InputError, DomainError, SingleClassError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledPair:
    """Ground-truth and estimated ground distance of one person-vehicle pair."""
    gt_distance_m: float
    est_distance_m: float

    def __post_init__(self):
        for name in ('gt_distance_m', 'est_distance_m'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be a non-negative number, got {value}")


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """
    Binary labels with ranking scores.

    A pair is positive when its ground-truth distance is strictly below the
    threshold; its score is the negated estimated distance.
    """
    labels: np.ndarray = field(repr=False)
    scores: np.ndarray = field(repr=False)
    gt_threshold_m: float = GT_THRESHOLD_M

    @property
    def positive_count(self) -> int:
        return int(np.count_nonzero(self.labels))

    @property
    def negative_count(self) -> int:
        return int(len(self.labels) - np.count_nonzero(self.labels))


@dataclass(frozen=True)
class RocCurve:
    """Sweep points from (0, 0) to (1, 1) and their trapezoidal area."""
    points: Tuple[Tuple[float, float], ...]
    auc: float
    positive_count: int
    negative_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'auc': self.auc,
            'positive_count': self.positive_count,
            'negative_count': self.negative_count,
            'points': [list(p) for p in self.points],
        }

    def to_csv(self, path: str) -> None:
        """Write `fpr,tpr` rows with a header line."""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(ROC_CSV_HEADER)
            for fpr, tpr in self.points:
                writer.writerow([repr(fpr), repr(tpr)])


# =============================================================================
# LABELLING
# =============================================================================

def label_pairs(pairs: Sequence[LabeledPair], gt_threshold_m: float = GT_THRESHOLD_M) -> LabeledSet:
    """
    Label pairs as near (positive) or far by ground truth.

    Raises:
        InputError: If there are no pairs
        DomainError: If the threshold is not positive
    """
    if not (math.isfinite(gt_threshold_m) and gt_threshold_m > 0):
        raise DomainError(f"Ground-truth threshold must be positive, got {gt_threshold_m}")
    if not pairs:
        raise InputError("No pairs to label")

    gt = np.array([p.gt_distance_m for p in pairs], dtype=np.float64)
    est = np.array([p.est_distance_m for p in pairs], dtype=np.float64)
    return LabeledSet(labels=gt < gt_threshold_m, scores=-est, gt_threshold_m=gt_threshold_m)


def labeled_set_from_scores(labels: Sequence[bool], scores: Sequence[float],
                            gt_threshold_m: Optional[float] = None) -> LabeledSet:
    """Build a labeled set from raw labels and any higher-is-nearer score."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=np.float64)
    if len(labels) != len(scores):
        raise InputError(f"Got {len(labels)} labels but {len(scores)} scores")
    if len(labels) == 0:
        raise InputError("No pairs to label")
    threshold = GT_THRESHOLD_M if gt_threshold_m is None else gt_threshold_m
    return LabeledSet(labels=labels, scores=scores, gt_threshold_m=threshold)


# =============================================================================
# ROC
# =============================================================================

def roc_auc(labeled: LabeledSet) -> RocCurve:
    """
    Sweep a threshold over the distinct scores, highest first.

    Tied scores enter the curve together as one diagonal step, so the area
    gives half credit to tied positive/negative pairs.

    Raises:
        SingleClassError: If the set has no positives or no negatives
    """
    positives = labeled.positive_count
    negatives = labeled.negative_count
    if positives == 0 or negatives == 0:
        raise SingleClassError(
            f"ROC needs both classes; got {positives} positives and {negatives} negatives")

    order = np.argsort(-labeled.scores, kind='stable')
    scores = labeled.scores[order]
    labels = labeled.labels[order]

    # Index of the last member of every tie group
    group_ends = np.append(np.flatnonzero(np.diff(scores) != 0), len(scores) - 1)
    tps = np.cumsum(labels)[group_ends]
    fps = np.cumsum(~labels)[group_ends]

    tpr = np.concatenate([[0.0], tps / positives])
    fpr = np.concatenate([[0.0], fps / negatives])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))

    logger.info("ROC over %d positives and %d negatives: AUC %.4f", positives, negatives, auc)
    return RocCurve(
        points=tuple((float(x), float(y)) for x, y in zip(fpr, tpr)),
        auc=auc,
        positive_count=positives,
        negative_count=negatives,
    )
