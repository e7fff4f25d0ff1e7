"""Exception and warning types shared across the package."""


class NhsenseError(Exception):
    """Base class for all package errors."""


class InvalidInput(NhsenseError):
    pass


class InvalidParam(NhsenseError):
    pass


class InvalidState(NhsenseError):
    pass


class NotHermitian(NhsenseError):
    pass


class NotPositive(NhsenseError):
    pass


class NotPseudoHermitian(NhsenseError):
    pass


class AmplificationOverflow(NhsenseError):
    """Rescaling the initial metric would require a factor beyond 1e12."""


class SingularEta(NhsenseError):
    pass


class DegenerateState(NhsenseError):
    pass


class PostSelectionSingular(NhsenseError):
    pass


class NumericalInconsistency(NhsenseError):
    pass


class ConstructionDrift(NhsenseError):
    """Raised when the raw dilated-Hamiltonian blocks drift from (anti-)Hermiticity."""

    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(f"hermiticity drift {residual:.3e} exceeds {tol:.3e}")


class OverflowRiskWarning(UserWarning):
    """Matrix exponential argument outside the guaranteed-accuracy range."""


class SymmetrizedInputWarning(UserWarning):
    """A nominally Hermitian input was symmetrized before use."""
