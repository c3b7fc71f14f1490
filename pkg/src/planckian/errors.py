"""Exception hierarchy for the planckian package."""


class PlanckianError(Exception):
    """Base class for all errors raised by this package."""


class InvalidOperator(PlanckianError, ValueError):
    """Input matrix is not Hermitian (or not a valid density matrix)."""


class DimError(PlanckianError, ValueError):
    """Dimensions of the inputs do not match."""


class ScheduleError(PlanckianError, ValueError):
    """Requested time lies outside a Hamiltonian schedule."""


class UnsupportedLimit(PlanckianError, ValueError):
    pass


class UnsupportedDimension(PlanckianError, ValueError):
    pass


class NumericalInstability(PlanckianError, ArithmeticError):
    """A numerical estimate failed its internal convergence check."""


class QuadratureError(NumericalInstability):
    pass


class DegeneratePair(PlanckianError, ValueError):
    """Two Hamiltonians differ only by a multiple of the identity."""


class DegenerateTask(PlanckianError, ValueError):
    pass


class NotAThermalizer(PlanckianError, ValueError):
    """A fixed-state preparation device was asked to thermalize several Hamiltonians."""


class PoleError(PlanckianError, ValueError):
    pass


class BoundViolation(PlanckianError, AssertionError):
    """A simulated machine entered the region the speed limit forbids."""
