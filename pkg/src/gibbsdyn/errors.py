"""Exception hierarchy shared by every gibbsdyn module."""
from typing import List, Tuple


class GibbsDynError(Exception):
    """Base class for all errors raised by gibbsdyn."""


class StaleCellList(GibbsDynError):
    """A cell list was queried against a configuration that changed since it was built."""


class CutoffExceeded(GibbsDynError):
    """A neighbor query asked for a radius beyond the cell-list cutoff."""


class QuadratureFailure(GibbsDynError):
    """A quadrature produced a non-finite value or did not converge."""


class MajorantViolation(GibbsDynError):
    """A thinning acceptance probability exceeded one: the rate bound is invalid."""


class VacuumState(GibbsDynError):
    """The configuration is empty and the engine has no event to fire."""


class NotSmooth(GibbsDynError):
    """A derivative was requested from a potential or functional that has none."""


class BlowUp(GibbsDynError):
    """An integrator step changed an energy by more than the configured guard."""


class InsufficientSamples(GibbsDynError):
    """Too few snapshots or replicas for a statistical estimate."""


class InvariantViolation(GibbsDynError):
    """A hard runtime invariant (conservation, hard core, event size) was broken."""


class UsageError(GibbsDynError):
    """The command line could not be parsed."""


class SchemaError(GibbsDynError):
    """An experiment config failed validation.

    Attributes:
        violations: list of (field_path, message) pairs, one per problem found
    """

    def __init__(self, violations: List[Tuple[str, str]]):
        self.violations = list(violations)
        lines = [f"{path}: {message}" for path, message in self.violations]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))
