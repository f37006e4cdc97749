"""Exception types shared by the decoherence models."""


class DecoherenceError(Exception):
    """Base class for every error raised by the simulation models."""


class ParameterError(DecoherenceError, ValueError):
    """A physical or numerical parameter is outside its domain."""


class ConfigError(DecoherenceError):
    """A scenario configuration could not be parsed or is inconsistent."""


class SolverStabilityError(DecoherenceError):
    """The amplitude left the unit disc while stepping the memory equation."""

    def __init__(self, step, time, abs_u, dt):
        self.step = step
        self.time = time
        self.abs_u = abs_u
        self.dt = dt
        super().__init__(
            f"|u| = {abs_u:.10f} exceeds 1 at step {step} (t = {time:.6g}); "
            f"dt = {dt:.3g} is too coarse for this kernel, try dt <= {dt / 4:.3g}"
        )


class QuadratureConvergenceError(DecoherenceError):
    """Two successive quadrature refinements disagree beyond tolerance."""

    def __init__(self, coarse, fine, rel_tol):
        self.coarse = coarse
        self.fine = fine
        self.rel_tol = rel_tol
        super().__init__(
            f"quadrature refinements differ: {coarse!r} vs {fine!r} "
            f"(relative tolerance {rel_tol:g})"
        )


class BathRecurrenceError(DecoherenceError):
    """A discretized bath would revive before the simulation horizon."""

    def __init__(self, recurrence_time, horizon, required_count):
        self.recurrence_time = recurrence_time
        self.horizon = horizon
        self.required_count = required_count
        super().__init__(
            f"bath recurrence time {recurrence_time:.4g} does not exceed the horizon "
            f"{horizon:.4g}; use at least {required_count} modes"
        )


class OracleError(DecoherenceError):
    """A brute-force oracle lost its conservation law or hit invalid input."""


class QuadratureToleranceWarning(UserWarning):
    """Quadrature settings are below the floor that guarantees the tolerance."""
