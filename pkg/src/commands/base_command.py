"""
Base command class for Vantage.
Provides the foundation for every command-line subcommand.
"""

import argparse
import logging
import sys
from typing import Any, Dict, Optional, Sequence

from config_manager import RunConfig
from record_store import format_json, format_json_lines, save_json, write_json_lines

logger = logging.getLogger(__name__)


class BaseCommand:
    """
    Base class for all subcommands.

    A command declares its arguments, then runs against the parsed
    arguments and the active run configuration. Override add_arguments()
    and run() to implement a subcommand.
    """

    name = ''
    help = ''

    def __init__(self, manager=None):
        """
        Initialize the command.

        Args:
            manager: The CommandManager this command is registered with
        """
        self.manager = manager

    def add_arguments(self, parser: argparse.ArgumentParser):
        """
        Declare subcommand arguments.

        Args:
            parser: The subcommand's parser
        """
        pass

    def run(self, args: argparse.Namespace, config: RunConfig) -> int:
        """
        Execute the command.

        Args:
            args: Parsed command-line arguments
            config: Active run configuration

        Returns:
            Process exit code
        """
        raise NotImplementedError

    def write_report(self, report: Dict[str, Any], output: Optional[str]):
        """Save a JSON report to `output`, or print it to stdout when no path is given."""
        if output:
            save_json(report, output)
            logger.info("Wrote %s report to %s", self.name, output)
        else:
            sys.stdout.write(format_json(report) + '\n')

    def write_records(self, rows: Sequence[Dict[str, Any]], output: Optional[str]):
        """Save JSON lines to `output`, or print them to stdout."""
        if output:
            write_json_lines(rows, output)
            logger.info("Wrote %d records to %s", len(rows), output)
        else:
            sys.stdout.write(format_json_lines(rows))
