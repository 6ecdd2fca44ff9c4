"""
Error hierarchy for topofabric.

Input problems derive from ``InputError`` (also a ``ValueError``) and map to CLI exit code 2.
Internal numeric failures derive from ``NumericalError`` and map to exit code 3.
"""


class FabricError(Exception):
    """Base class for every error raised by topofabric."""


class InputError(FabricError, ValueError):
    """Invalid user data or parameters."""


class DisconnectedGraphError(InputError):
    """An operation that needs a connected graph received several components."""

    def __init__(self, components: list[list[int]], message: str | None = None):
        self.components = components
        super().__init__(message or f"graph is disconnected; components: {components}")


class SchemaError(InputError):
    """One or more schema violations, each located by a JSON pointer."""

    def __init__(self, problems: list[tuple[str, str]], source: str | None = None):
        self.problems = problems
        self.source = source
        lines = [f"{pointer}: {message}" for pointer, message in problems]
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{len(problems)} schema problem(s)\n  " + "\n  ".join(lines))


class NumericalError(FabricError, ArithmeticError):
    """An internal numeric routine failed."""


class ConvergenceError(NumericalError):
    """An iterative solver exhausted its budget."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")


class SingularSystemError(NumericalError):
    """A linear system could not be factored."""


class InfeasibleConstraintError(NumericalError):
    """A projection was requested onto an empty affine set."""
