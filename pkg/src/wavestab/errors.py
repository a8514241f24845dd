"""Exception types raised across the package."""


class WavestabError(Exception):
    """Base class for all package errors."""


class SpecificationError(WavestabError, ValueError):
    """A problem, grid or call is malformed (wrong shapes, wrong variant)."""


class DataError(WavestabError, ValueError):
    """Sample arrays contain non-finite values."""


class StabilityError(WavestabError, ArithmeticError):
    """The nodal 2x2 system of the characteristic step is singular."""


class SolverOverflowError(WavestabError, ArithmeticError):
    """A step produced non-finite values."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class CoverageError(WavestabError, ValueError):
    """A characteristic leaves the lattice the oracle was given."""


class InsufficientDataError(WavestabError, ValueError):
    """Too few usable samples for a fit or a stencil."""


class ResolutionError(WavestabError, ValueError):
    """The grid is too coarse to resolve a mollifier kernel."""


class ConfigError(WavestabError, ValueError):
    """A scenario file failed validation."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
