import argparse
import os
import sys
from typing import TextIO

import numpy as np
from pydantic import ValidationError

from topofabric.exceptions import FabricError, InputError, NumericalError
from topofabric.logger.logging import add_logging_to_step
from topofabric.models.experiment import ExperimentConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class CommandError(FabricError):
    """A command failed; ``returncode`` is the process exit code to use."""

    def __init__(self, message: str, returncode: int = EXIT_INPUT):
        self.returncode = returncode
        super().__init__(message)


class BaseCommand:
    """
    One ``fabric`` sub-command.

    Subclasses set ``help`` and ``mode``, may add arguments, and implement ``handle``, which
    returns the paths it wrote.
    """

    help = ""
    mode: str | None = None

    def __init__(self, stdout: TextIO | None = None, stderr: TextIO | None = None):
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    def handle(self, config: ExperimentConfig, **options) -> list[str]:
        raise NotImplementedError("subclasses of BaseCommand must provide a handle() method")

    def load_config(self, options: dict) -> ExperimentConfig:
        """Config file (or defaults) with ``--out``, ``--seed`` and ``--input`` applied on top."""
        path = options.get("config")
        if path and not os.path.isfile(path):
            raise InputError(f"config file {path} does not exist")
        config = ExperimentConfig.from_file(path) if path else ExperimentConfig()
        overrides = {
            key: options[key]
            for key in ("out", "seed", "input")
            if options.get(key) is not None
        }
        if self.mode is not None:
            overrides["mode"] = self.mode
        return config.model_copy(update=overrides)

    def execute(self, **options) -> int:
        """Run the command and translate failures into exit codes."""
        name = options.get("command") or type(self).__module__.rsplit(".", 1)[-1]
        try:
            config = self.load_config(options)
            # the raw --config path is consumed by load_config; handle() gets the loaded config
            forwarded = {key: value for key, value in options.items() if key != "config"}
            written = add_logging_to_step(f"command:{name}")(self.handle)(config, **forwarded)
        except CommandError as e:
            self.stderr.write(f"error: {e}\n")
            return e.returncode
        except (InputError, ValidationError) as e:
            self.stderr.write(f"input error: {e}\n")
            return EXIT_INPUT
        except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as e:
            self.stderr.write(f"numerical failure: {e}\n")
            return EXIT_NUMERIC
        for path in written:
            self.stdout.write(f"wrote {path}\n")
        return EXIT_OK
