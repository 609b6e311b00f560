class PipeSlipError(Exception):
    """Base class for errors raised by this package."""


class DiscretizationError(PipeSlipError, ValueError):
    pass


class ResolutionError(PipeSlipError):
    """The grid cannot resolve the structure being constructed or fitted."""


class SolverError(PipeSlipError):
    """A linear solve failed; carries the parameters that produced it."""

    def __init__(self, message, *, phi=None, xi=None, alpha=None, n_points=None, cond=None):
        super().__init__(message)
        self.phi = phi
        self.xi = xi
        self.alpha = alpha
        self.n_points = n_points
        self.cond = cond

    def __str__(self):
        base = super().__str__()
        return (
            f"{base} (phi={self.phi}, xi={self.xi}, alpha={self.alpha}, "
            f"n={self.n_points}, cond~{self.cond:.3e})"
            if self.cond is not None
            else f"{base} (phi={self.phi}, xi={self.xi}, alpha={self.alpha}, n={self.n_points})"
        )


class ConfigError(PipeSlipError, ValueError):
    pass
