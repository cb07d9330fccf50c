"""Exception hierarchy shared across the simulator."""


class UnravelError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(UnravelError):
    """Invalid parameters or flag combinations (CLI exit code 2)."""


class StateCorruptionError(UnravelError):
    """A numerical invariant of the evolving state was violated."""


class SingularFrameError(StateCorruptionError):
    """The (U, V) frame lost rank and cannot be renormalized."""


class NotGenericGaussianError(UnravelError):
    """U block is singular, so the pairing form Z does not exist."""


class MissingColumnError(UnravelError):
    """A CSV input lacks a column required by the consumer."""

    def __init__(self, column, path=""):
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing required column '{column}'{where}")
