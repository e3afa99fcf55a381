"""Exception classes shared across the solvers."""


class KmfgError(Exception):
    """Base class for all library errors."""


class ConfigError(KmfgError):
    """Invalid run configuration (bad parameter ranges, unknown names)."""


class DegenerateAlignment(KmfgError):
    """Order parameter is numerically zero; the aligning rotation is undefined."""


class NonConvergence(KmfgError):
    """Newton iteration for the stationary HJB equation failed to converge."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Newton solver stalled after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class StepRejected(KmfgError):
    """A parabolic time step kept failing after the maximum number of halvings."""


class CflViolation(KmfgError):
    """Density positivity could not be restored by sub-stepping the transport step."""


class PicardStagnation(KmfgError):
    """Damped Picard iteration on the mean-field forcing stopped making progress."""

    def __init__(self, residual_history):
        self.residual_history = list(residual_history)
        tail = ", ".join(f"{r:.3e}" for r in self.residual_history[-5:])
        super().__init__(
            f"Picard residual stagnated after {len(self.residual_history)} "
            f"iterations (last residuals: {tail})"
        )


class WindowDegenerate(KmfgError):
    """Distance to uniform vanishes on the requested fitting window."""


class LambdaTooLarge(KmfgError):
    """Exponential weight exceeds the contraction range of the linearized map."""


class HorizonTooShort(KmfgError):
    """Discounted tail beyond the simulated horizon exceeds the requested tolerance."""
