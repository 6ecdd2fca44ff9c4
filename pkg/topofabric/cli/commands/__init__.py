from topofabric.cli.commands.bound import Command as BoundCommand
from topofabric.cli.commands.delay_sweep import Command as DelaySweepCommand
from topofabric.cli.commands.graph import Command as GraphCommand
from topofabric.cli.commands.ph_decay import Command as PhDecayCommand
from topofabric.cli.commands.run import Command as RunCommand
from topofabric.cli.commands.surgery import Command as SurgeryCommand

COMMANDS = {
    "run": RunCommand,
    "ph-decay": PhDecayCommand,
    "delay-sweep": DelaySweepCommand,
    "surgery": SurgeryCommand,
    "bound": BoundCommand,
    "graph": GraphCommand,
}

__all__ = ["COMMANDS"]
