"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class CapabilityError(ValueError):
    """The request exceeds a configured implementation limit."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed or produced an inconsistent result."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
