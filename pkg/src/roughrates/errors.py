"""Exception types shared across the package."""


class ContractError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class SingularElementError(ContractError):
    """Raised when inverting a tensor whose scalar part is zero."""


class NumericalError(RuntimeError):
    """Raised when a factorization or quadrature cannot be completed."""


class DivergenceError(RuntimeError):
    """Raised when an ODE solve blows up.

    The offending segment index is stored in ``segment``.
    """

    def __init__(self, message: str, segment: int | None = None):
        super().__init__(message)
        self.segment = segment
