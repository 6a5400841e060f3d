"""
Simulate command for Vantage.
Generates a synthetic scene and exports its detections with the truth sidecars.
"""

import logging

from commands.base_command import BaseCommand
from errors import InputError
from record_store import load_json
from systems.simulate import SceneSpec, export_scene, generate

logger = logging.getLogger(__name__)


class SimulateCommand(BaseCommand):
    """
    vantage simulate SCENE_SPEC --prefix PREFIX

    Writes PREFIX.detections.jsonl, PREFIX.truth.json and
    PREFIX.truth_positions.jsonl. The global --seed replaces the spec's seed.
    """

    name = 'simulate'
    help = 'generate a synthetic scene with known camera and positions'

    def add_arguments(self, parser):
        parser.add_argument('spec', help='scene spec (JSON)')
        parser.add_argument('--prefix', help='output path prefix (defaults to --output)')

    def run(self, args, config) -> int:
        prefix = args.prefix or args.output
        if not prefix:
            raise InputError("simulate needs --prefix or --output")

        spec = SceneSpec.from_dict(load_json(args.spec))
        if args.seed is not None:
            spec = spec.with_seed(args.seed)

        scene = generate(spec)
        paths = export_scene(scene, prefix)
        logger.info("Scene seed %d: %d records, camera height %.4f m",
                    spec.rng_seed, len(scene.records), scene.truth.camera_height_m)
        for kind, path in sorted(paths.items()):
            logger.info("  %s: %s", kind, path)
        return 0
