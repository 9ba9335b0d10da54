"""Exception types shared by the solvers and analysis code."""


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class SolverError(RuntimeError):
    """Iterative solver failed; ``diagnostics`` carries the last state."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
