"""Exception hierarchy shared by every spvqe module."""


class SpvqeError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(SpvqeError, ValueError):
    """Shapes, lengths or qubit counts do not line up."""


class CapacityError(SpvqeError):
    """Requested dense object exceeds the configured qubit limit."""


class NonHermitianError(SpvqeError, ValueError):
    """An expectation value was requested for a non-Hermitian operator."""


class FcidumpError(SpvqeError, ValueError):
    """Malformed FCIDUMP input."""


class SymmetryViolationError(SpvqeError):
    """Operator acts with X or Y on a qubit that the reduction removes."""


class OptimizationError(SpvqeError):
    """Raised on non-finite objective values.

    ``last_params``/``last_value`` hold the last finite iterate, ``partial``
    carries any results completed before the failure (e.g. SPVQE steps).
    """

    def __init__(self, message, last_params=None, last_value=None, partial=None):
        super().__init__(message)
        self.last_params = last_params
        self.last_value = last_value
        self.partial = partial


class InfeasibleSectorError(SpvqeError):
    """No eigenstate satisfies the requested constraints."""


class DegenerateConstraintError(SpvqeError, ZeroDivisionError):
    """The ground state already satisfies the constraint, so any mu_max >= 0 works."""
