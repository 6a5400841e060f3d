# Command-line subcommands package
from commands.base_command import BaseCommand
from commands.calibrate_command import CalibrateCommand
from commands.locate_command import LocateCommand, load_calibration
from commands.proximity_command import ProximityCommand
from commands.align_command import AlignCommand
from commands.roc_command import RocCommand, load_pairs
from commands.simulate_command import SimulateCommand
from commands.sweep_command import SweepCommand
from commands.prior_command import PriorCommand, load_predictions

ALL_COMMANDS = [
    CalibrateCommand,
    LocateCommand,
    ProximityCommand,
    AlignCommand,
    RocCommand,
    SimulateCommand,
    SweepCommand,
    PriorCommand,
]
