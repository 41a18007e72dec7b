"""Exception hierarchy shared by all solitonforge modules."""


class SolitonForgeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SolitonForgeError):
    """Bad experiment configuration (schema violation, unknown key, ...)."""


class QuadratureError(SolitonForgeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class AdmissibilityError(SolitonForgeError):
    """A theorem-side admissibility requirement is violated.

    The CLI maps this family to exit code 2.
    """


class R1OutOfRange(AdmissibilityError):
    """Integrability exponent r1 outside the open window (d*alpha/2, alpha+2)."""


class DivergentSeries(AdmissibilityError):
    """Frequency series has a nonpositive exponent and cannot converge."""


class ExponentInfeasible(AdmissibilityError):
    """No (r1, r2) pair exists for the requested (beta1, beta2, d)."""

    def __init__(self, message, violated=None):
        super().__init__(message)
        self.violated = violated


class NoGroundState(SolitonForgeError):
    """Shooting could not bracket a decaying positive even solution."""


class UnderResolved(SolitonForgeError):
    """Profile tail has not decayed below tolerance at the grid edge."""


class NoSignChange(SolitonForgeError):
    """Kink-frequency system has no root inside the supplied bracket."""


class SideConditionFailed(SolitonForgeError):
    """A kink-frequency side condition is violated; message names it."""


class RadicandNegative(SolitonForgeError):
    """First-integral radicand negative beyond tolerance (wrong frequency)."""


class NonMonotone(SolitonForgeError):
    """Kink profile lost monotonicity during integration."""


class WindowTooNoisy(SolitonForgeError):
    """Tail-decay fit window gave R^2 below the acceptance threshold."""


class WindowEmpty(SolitonForgeError):
    """No samples fall inside the requested fit window."""


class VelocityNotQuantized(SolitonForgeError):
    """Velocity is not a multiple of the box phase quantum 4*pi/L."""


class NonFinite(SolitonForgeError):
    """Overflow/NaN detected during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NoContraction(SolitonForgeError):
    """Fixed-point iteration expanded for several consecutive sweeps.

    Carries the partial report so callers can inspect the factors.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class TailTooLarge(AdmissibilityError):
    """Truncated-train tail exceeds the configured threshold."""
