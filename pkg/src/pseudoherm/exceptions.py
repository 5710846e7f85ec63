class ConvergenceError(RuntimeError):
    """A numerical limit (extrapolation, grid refinement, implicit solve) did not settle."""


class DomainError(ValueError):
    """Arguments fall outside the region where a formula is defined."""
