"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NumericError(ArithmeticError):
    """A numerical routine (root finder, quadrature, search) failed to converge.

    ``diagnostics`` carries whatever the routine knew when it gave up
    (bracket, residual, iteration count).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class AssumptionError(RuntimeError):
    """A structural assumption needed by a solver does not hold."""

    def __init__(self, message, assumption=None):
        super().__init__(message)
        self.assumption = assumption


class Nonexistence(RuntimeError):
    """The optimization problem has no minimizer (the infimum is not attained
    or equals minus infinity)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
