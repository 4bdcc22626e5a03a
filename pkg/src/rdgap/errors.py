"""Shared exception types."""


class SolverError(RuntimeError):
    """A numerical solver failed to bracket or converge."""


class KinkError(ValueError):
    """A gradient was requested at a point where the curve is not differentiable."""
