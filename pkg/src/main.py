"""
Vantage - Main Entry Point
Camera height calibration from pedestrians, ground localisation and
person-vehicle proximity scoring.
"""

import sys

from command_manager import CommandManager
from commands import ALL_COMMANDS


def build_manager() -> CommandManager:
    """Create the command manager with every subcommand registered."""
    manager = CommandManager()
    for command_class in ALL_COMMANDS:
        manager.register(command_class(manager))
    return manager


def main(argv=None) -> int:
    """Main entry point for Vantage."""
    return build_manager().dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
