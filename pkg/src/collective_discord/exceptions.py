"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented invariant (bad parameters, non-physical state)."""


class NonXFormError(ValidationError):
    """Pairwise state has nonzero x+/x- coherences and cannot be cast in X form."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its stated accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
