"""
Align command for Vantage.
Rigidly registers estimated positions onto truth and reports the residual errors.
"""

import logging

from commands.base_command import BaseCommand
from record_store import load_positions
from systems.alignment import correspondence_errors, fit_rigid, fit_similarity, match_positions

logger = logging.getLogger(__name__)


class AlignCommand(BaseCommand):
    """vantage align ESTIMATED TRUTH [--similarity]"""

    name = 'align'
    help = 'rigid fit of estimated positions onto truth positions'

    def add_arguments(self, parser):
        parser.add_argument('estimated', help='positions file written by locate')
        parser.add_argument('truth', help='truth positions file')
        parser.add_argument('--similarity', action='store_true',
                            help='also report the best uniform scale between the sets')

    def run(self, args, config) -> int:
        ids, estimated, truth = match_positions(load_positions(args.estimated), load_positions(args.truth))
        transform = fit_rigid(estimated, truth)
        correspondence = correspondence_errors(transform, estimated, truth)

        report = {
            'matched_count': len(ids),
            'record_ids': ids,
            'transform': transform.to_dict(),
            'correspondence': correspondence.to_dict(),
        }
        if args.similarity:
            similarity = fit_similarity(estimated, truth)
            report['similarity_scale'] = similarity.scale
            logger.info("Similarity scale %.6f", similarity.scale)

        self.write_report(report, args.output)
        return 0
