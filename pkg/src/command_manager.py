"""
Command Manager for Vantage.
Handles registration of subcommands, argument parsing and dispatch.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from constants import TITLE, VERSION, EXIT_OK, EXIT_INPUT_ERROR
from config_manager import get_config_manager
from errors import VantageError

logger = logging.getLogger(__name__)


def configure_logging(quiet: bool = False):
    """Send log records to stderr at INFO, or WARNING when quiet."""
    level = logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


def _global_flags(parser: argparse.ArgumentParser, default):
    parser.add_argument('--config', default=default, help='run config (JSON or TOML)')
    parser.add_argument('--seed', type=int, default=default, help='overrides ransac.seed and scene seeds')
    parser.add_argument('--output', default=default, help='output path (stdout when omitted)')
    parser.add_argument('--quiet', action='store_true', default=default, help='only log warnings and errors')


class CommandManager:
    """
    Registry of subcommands and the entry point that runs one.

    Global flags are accepted before or after the subcommand name.

    Usage:
        manager = CommandManager()
        manager.register(CalibrateCommand(manager))
        exit_code = manager.dispatch(['calibrate', 'scene.detections.jsonl', '--config', 'run.json'])
    """

    def __init__(self):
        self.commands: Dict[str, object] = {}  # name -> command instance

    def register(self, command):
        """
        Register a command under its name.

        Args:
            command: BaseCommand instance
        """
        if command.name in self.commands:
            raise ValueError(f"Command '{command.name}' already registered")
        self.commands[command.name] = command

    def get_command(self, name: str):
        return self.commands.get(name)

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog=TITLE.lower(),
            description='Camera height calibration, ground localisation and proximity scoring.',
        )
        parser.add_argument('--version', action='version', version=f"{TITLE} {VERSION}")
        _global_flags(parser, None)
        parser.set_defaults(quiet=False)

        # Subcommand copies suppress their defaults so flags given before the name survive
        shared = argparse.ArgumentParser(add_help=False)
        _global_flags(shared, argparse.SUPPRESS)

        subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
        subparsers.required = True
        for name, command in self.commands.items():
            sub = subparsers.add_parser(name, help=command.help, parents=[shared])
            command.add_arguments(sub)
        return parser

    def dispatch(self, argv: Optional[List[str]] = None) -> int:
        """
        Parse arguments, load the config and run one command.

        Returns:
            Exit code: 0 success, 2 input or parse error, 3 algorithmic failure
        """
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_INPUT_ERROR

        configure_logging(args.quiet)
        command = self.commands[args.command]

        try:
            configs = get_config_manager()
            configs.reset()
            if args.config:
                configs.load(args.config)
            configs.override_seed(args.seed)
            return command.run(args, configs.config)
        except VantageError as e:
            logger.error("%s failed: %s", command.name, e)
            return e.exit_code
        except OSError as e:
            logger.error("%s failed: %s", command.name, e)
            return EXIT_INPUT_ERROR
