"""
Error hierarchy shared by the solver, the pipeline and the management commands.

Each family maps to one command exit code: input errors exit with 1, solver
failures with 2 and theorem violations with 3.
"""


class EfficiencyError(Exception):
    """Base class for every error raised by the efficiency app."""
    exit_code = 1


class InputError(EfficiencyError, ValueError):
    """The caller supplied data or options that cannot be used."""
    exit_code = 1


class DatasetError(InputError):
    """A dataset could not be loaded; carries the offending location."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} at {', '.join(location)}"
        super().__init__(message)


class InvalidTolerances(InputError):
    """A tolerance is outside the open interval (0, 1)."""


class UnknownDmu(InputError, KeyError):
    """A DMU id or index does not exist in the dataset."""

    def __str__(self):
        return str(self.args[0]) if self.args else super().__str__()


class DimensionMismatch(InputError):
    """Linear program dimensions are inconsistent."""


class OracleSizeExceeded(InputError):
    """The exhaustive oracle refuses instances beyond its size guard."""


class SolverFailure(EfficiencyError):
    """The simplex engine broke down numerically or hit an iteration limit."""
    exit_code = 2


class NodeLimitExceeded(SolverFailure):
    """Branch-and-bound explored more nodes than allowed."""


class TheoremViolation(EfficiencyError):
    """A property guaranteed by the theory does not hold numerically."""
    exit_code = 3


class NotInOmega(TheoremViolation):
    """An intensity vector expected to lie in the optimal set does not."""
