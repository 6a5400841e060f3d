#!/usr/bin/env python3
"""
Vantage - Evaluation Playtest
ROC sweeps, AUC against a brute-force rank statistic, and the pose prior mode.
"""

import sys
import os
import csv

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from errors import DomainError, InputError, SingleClassError
from systems.evaluation import LabeledPair, label_pairs, labeled_set_from_scores, roc_auc
from systems.pose_prior import PosePrediction, parameter_mode, pose_mode
from systems.proximity import NearPredicate, log_p_near, p_near


def brute_force_auc(labels, scores):
    """Share of positive/negative pairs ranked correctly, ties counted half."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=np.float64)
    pos = scores[labels]
    neg = scores[~labels]
    wins = np.sign(pos[:, None] - neg[None, :])
    return float(np.mean((wins + 1.0) / 2.0))


# =============================================================================
# LABELLING
# =============================================================================

def test_positive_means_strictly_below_threshold():
    labeled = label_pairs([LabeledPair(3.99, 1.0), LabeledPair(4.0, 2.0), LabeledPair(7.0, 3.0)], 4.0)
    assert labeled.labels.tolist() == [True, False, False]
    assert labeled.scores.tolist() == [-1.0, -2.0, -3.0]
    assert labeled.positive_count == 1
    assert labeled.negative_count == 2


def test_labelling_rejects_bad_input():
    with pytest.raises(InputError):
        label_pairs([])
    with pytest.raises(DomainError):
        label_pairs([LabeledPair(1.0, 1.0)], 0.0)
    with pytest.raises(DomainError):
        LabeledPair(-1.0, 2.0)


def test_scores_and_labels_must_line_up():
    with pytest.raises(InputError):
        labeled_set_from_scores([True, False], [0.3])


# =============================================================================
# ROC AND AUC
# =============================================================================

def test_perfect_ranking():
    roc = roc_auc(labeled_set_from_scores([True, True, False, False], [0.9, 0.8, 0.3, 0.1]))
    assert roc.auc == 1.0
    assert roc.points[0] == (0.0, 0.0)
    assert roc.points[-1] == (1.0, 1.0)


def test_reversed_ranking():
    roc = roc_auc(labeled_set_from_scores([False, False, True, True], [0.9, 0.8, 0.3, 0.1]))
    assert roc.auc == 0.0


def test_all_tied_scores_give_half():
    roc = roc_auc(labeled_set_from_scores([True, False, True, False], [0.5] * 4))
    assert roc.auc == pytest.approx(0.5)
    assert roc.points == ((0.0, 0.0), (1.0, 1.0))


@pytest.mark.parametrize('seed', range(6))
def test_auc_matches_pairwise_count(seed):
    rng = np.random.default_rng(seed)
    labels = rng.random(60) < 0.4
    labels[:2] = [True, False]
    # Coarse scores force plenty of ties
    scores = np.round(rng.normal(labels * 0.8, 1.0), 1)
    roc = roc_auc(labeled_set_from_scores(labels, scores))
    assert roc.auc == pytest.approx(brute_force_auc(labels, scores), abs=1e-12)


def test_curve_is_monotone():
    rng = np.random.default_rng(12)
    labels = rng.random(80) < 0.5
    labels[:2] = [True, False]
    roc = roc_auc(labeled_set_from_scores(labels, rng.normal(size=80)))
    fpr = [p[0] for p in roc.points]
    tpr = [p[1] for p in roc.points]
    assert fpr == sorted(fpr)
    assert tpr == sorted(tpr)


def test_distances_rank_nearer_pairs_higher():
    pairs = [LabeledPair(1.0, 1.5), LabeledPair(2.0, 2.2), LabeledPair(6.0, 5.0), LabeledPair(9.0, 10.0)]
    assert roc_auc(label_pairs(pairs, 4.0)).auc == 1.0


def test_shuffled_estimates_score_near_half():
    rng = np.random.default_rng(21)
    gt = rng.uniform(0.0, 20.0, 5000)
    est = rng.permutation(gt)
    roc = roc_auc(label_pairs([LabeledPair(g, e) for g, e in zip(gt, est)], 4.0))
    assert abs(roc.auc - 0.5) < 0.05


@pytest.mark.parametrize('transform', [
    lambda s: 5.0 * s + 2.0,
    np.exp,
    lambda s: s ** 3,
    np.arctan,
])
def test_auc_ignores_monotone_rescoring(transform):
    rng = np.random.default_rng(4)
    labels = rng.random(300) < 0.3
    labels[:2] = [True, False]
    scores = np.round(rng.normal(labels * 0.7, 1.0), 2)
    base = roc_auc(labeled_set_from_scores(labels, scores)).auc
    assert roc_auc(labeled_set_from_scores(labels, transform(scores))).auc == pytest.approx(base, abs=1e-15)


def test_p_near_ranks_like_distance():
    pred = NearPredicate(4.0, 1.0)
    pairs = [LabeledPair(3.0, 15.0), LabeledPair(30.0, 25.0)]
    labeled = label_pairs(pairs, 4.0)
    by_probability = labeled_set_from_scores(labeled.labels, [p_near(pred, p.est_distance_m) for p in pairs])
    assert roc_auc(labeled).auc == 1.0
    assert roc_auc(by_probability).auc == 1.0


def test_p_near_ranking_matches_distance_ranking_on_random_pairs():
    pred = NearPredicate(4.0, 1.0)
    rng = np.random.default_rng(30)
    gt = rng.uniform(0.0, 25.0, 400)
    est = np.abs(gt + rng.normal(0.0, 3.0, 400))
    labeled = label_pairs([LabeledPair(g, e) for g, e in zip(gt, est)], 4.0)
    expected = roc_auc(labeled).auc
    probability = [p_near(pred, e) for e in est]
    assert roc_auc(labeled_set_from_scores(labeled.labels, probability)).auc == pytest.approx(expected, abs=1e-15)

    # Far-tail distances only rank correctly in log space
    far = est * 8.0
    labeled_far = label_pairs([LabeledPair(g, e) for g, e in zip(gt, far)], 4.0)
    logs = [log_p_near(pred, e) for e in far]
    assert roc_auc(labeled_set_from_scores(labeled_far.labels, logs)).auc == \
        pytest.approx(roc_auc(labeled_far).auc, abs=1e-15)


def test_single_class_is_an_error():
    with pytest.raises(SingleClassError):
        roc_auc(labeled_set_from_scores([True, True], [0.1, 0.2]))
    with pytest.raises(SingleClassError):
        roc_auc(label_pairs([LabeledPair(9.0, 1.0), LabeledPair(8.0, 2.0)], 4.0))


def test_csv_has_header_and_every_point(tmp_path):
    roc = roc_auc(labeled_set_from_scores([True, False, True], [0.9, 0.5, 0.1]))
    path = tmp_path / 'out' / 'roc.csv'
    roc.to_csv(str(path))
    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['fpr', 'tpr']
    assert [(float(a), float(b)) for a, b in rows[1:]] == list(roc.points)


def test_report_fields():
    report = roc_auc(labeled_set_from_scores([True, False], [1.0, 0.0])).to_dict()
    assert report['auc'] == 1.0
    assert report['positive_count'] == 1
    assert report['negative_count'] == 1


# =============================================================================
# POSE PRIOR
# =============================================================================

def test_mode_returns_bin_center():
    assert parameter_mode([70.1, 70.2, 70.4, 71.3], 0.5) == pytest.approx(70.25)


def test_mode_ties_go_to_lowest_bin():
    assert parameter_mode([12.0, 12.1, 3.0, 3.2], 1.0) == pytest.approx(3.5)


def test_mode_handles_negative_values():
    assert parameter_mode([-0.3, -0.2, 0.6], 0.5) == pytest.approx(-0.25)


def test_mode_rejects_bad_input():
    with pytest.raises(InputError):
        parameter_mode([], 1.0)
    with pytest.raises(DomainError):
        parameter_mode([1.0], 0.0)
    with pytest.raises(DomainError):
        parameter_mode([float('nan')], 1.0)


def test_pose_mode_ignores_stray_frames():
    predictions = [PosePrediction(1502.0, 70.1, 1.1) for _ in range(8)]
    predictions += [PosePrediction(900.0, 45.0, -8.0), PosePrediction(2400.0, 88.0, 6.0)]
    mode = pose_mode(predictions, focal_bin_px=10.0, angle_bin_deg=0.5)
    assert mode.focal_px == pytest.approx(1505.0)
    assert mode.tilt_deg == pytest.approx(70.25)
    assert mode.roll_deg == pytest.approx(1.25)


def test_pose_mode_needs_predictions():
    with pytest.raises(InputError):
        pose_mode([])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
