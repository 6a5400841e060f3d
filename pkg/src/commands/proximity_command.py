"""
Proximity command for Vantage.
Scores every person-vehicle pair in each frame with the P(near) predicate.
"""

import logging

from commands.base_command import BaseCommand
from record_store import load_json, load_positions
from systems.alignment import RigidTransform
from systems.proximity import near_events, proximity_pairs, truth_distances

logger = logging.getLogger(__name__)


class ProximityCommand(BaseCommand):
    """vantage proximity POSITIONS [--truth POSITIONS] [--alignment REPORT]"""

    name = 'proximity'
    help = 'ground distances and P(near) for person-vehicle pairs'

    def add_arguments(self, parser):
        parser.add_argument('positions', help='positions file written by locate')
        parser.add_argument('--truth', help='truth positions; adds gt_distance_m to each pair')
        parser.add_argument('--alignment', help='align report; maps positions into the truth frame first')

    def run(self, args, config) -> int:
        pred = config.near_predicate()
        positions = load_positions(args.positions)

        transform = None
        if args.alignment:
            transform = RigidTransform.from_dict(load_json(args.alignment).get('transform', {}),
                                                 args.alignment)

        observations = proximity_pairs(positions, transform.apply_point if transform else None)
        pairs = [obs.to_dict(pred) for obs in observations]
        if args.truth:
            for pair, gt in zip(pairs, truth_distances(observations, load_positions(args.truth))):
                pair['gt_distance_m'] = gt

        events = [
            {'frame_id': obs.frame_id, 'person_id': obs.person_id,
             'vehicle_id': obs.vehicle_id, 'p_near': probability}
            for obs, probability in near_events(observations, pred)
        ]
        report = {
            'tau_m': pred.threshold_m,
            'sharpness_m': pred.sharpness_m,
            'aligned': transform is not None,
            'pair_count': len(pairs),
            'pairs': pairs,
            'near_events': events,
        }
        self.write_report(report, args.output)
        return 0
