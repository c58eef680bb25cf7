"""Exception types shared across the estimator packages."""


class CzdcError(Exception):
    """Base class for every error raised by this project."""


class DimensionMismatchError(CzdcError, ValueError):
    """Operands have incompatible shapes."""


class EmptySetError(CzdcError):
    """A set that must be nonempty turned out empty."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class VertexBudgetError(CzdcError):
    """Vertex enumeration would exceed the configured dimension cap."""


class SolverError(CzdcError):
    """The LP solver broke down where an optimum was required."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class ConfigError(CzdcError, ValueError):
    pass


class SetFormatError(CzdcError, ValueError):
    """Malformed record in the set-exchange text format."""
