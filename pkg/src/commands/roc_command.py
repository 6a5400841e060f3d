"""
ROC command for Vantage.
Labels person-vehicle pairs by ground truth and ranks them by estimated distance.
"""

import logging
import sys
from typing import Any, Dict, Iterator, List, Tuple

from commands.base_command import BaseCommand
from errors import DomainError, ParseError
from record_store import iter_json_lines, load_json
from systems.evaluation import LabeledPair, label_pairs, roc_auc

logger = logging.getLogger(__name__)


def _pair_rows(path: str) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Rows of a pairs file: JSON lines, or a proximity report's 'pairs' list."""
    try:
        data = load_json(path)
    except ParseError:
        # Several JSON objects, one per line
        yield from iter_json_lines(path)
        return
    if isinstance(data.get('pairs'), list):
        for index, row in enumerate(data['pairs']):
            if not isinstance(row, dict):
                raise ParseError(path, None, f"pairs[{index}] is not an object")
            yield index, row
    else:
        yield 1, data


def load_pairs(path: str) -> List[LabeledPair]:
    """
    Read labelled pairs; rows without a ground-truth distance are skipped.

    Raises:
        ParseError: For a missing or invalid est_distance_m, or a bad gt_distance_m
    """
    pairs = []
    skipped = 0
    for where, row in _pair_rows(path):
        gt = row.get('gt_distance_m')
        if gt is None:
            skipped += 1
            continue
        try:
            pairs.append(LabeledPair(float(gt), float(row['est_distance_m'])))
        except KeyError:
            raise ParseError(path, where, "Missing field 'est_distance_m'") from None
        except (TypeError, ValueError, DomainError) as e:
            raise ParseError(path, where, str(e)) from e
    if skipped:
        logger.warning("Skipped %d pairs without gt_distance_m", skipped)
    return pairs


class RocCommand(BaseCommand):
    """
    vantage roc PAIRS [--csv PATH]

    The curve is written only to --csv, or --output when --csv is absent;
    with neither no file is written. The AUC is always printed to stdout
    with four decimals.
    """

    name = 'roc'
    help = ('AUC of estimated distances against ground truth; the ROC curve is '
            'written only when --csv or --output is given')

    def add_arguments(self, parser):
        parser.add_argument('pairs', help='pairs as JSON lines, or a proximity report with truth')
        parser.add_argument('--csv', help='write the fpr,tpr curve here (falls back to --output; '
                                          'with neither, no curve file is written)')

    def run(self, args, config) -> int:
        pairs = load_pairs(args.pairs)
        roc = roc_auc(label_pairs(pairs, config.eval.gt_threshold_m))

        path = args.csv or args.output
        if path:
            roc.to_csv(path)
            logger.info("Wrote ROC curve (%d points) to %s", len(roc.points), path)
        else:
            logger.info("No --csv or --output given; curve not written")

        sys.stdout.write(f"{roc.auc:.4f}\n")
        return 0
