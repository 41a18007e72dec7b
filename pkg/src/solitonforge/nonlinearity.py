"""Nonlinearities f(u) = g(|u|^2) u and their primitives and derivatives.

Supported kinds:

* ``power``: g(s) = s**(alpha/2), i.e. f(u) = |u|**alpha * u
* ``combined``: g(s) = s**alpha1 - s**alpha2 (focusing-defocusing)
* ``gross_pitaevskii``: g(s) = 1 - s (admitted for kink/evolution work only,
  since g(0) != 0 breaks the envelope bounds the soliton theory assumes)
* ``custom``: tabulated g on a grid, monotone-cubic interpolated

Everything is vectorised over numpy arrays; the evolution kernels call
``spec.g`` on whole fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import QuadratureError

__all__ = [
    "alpha_max",
    "NonlinearitySpec",
    "power",
    "combined",
    "gross_pitaevskii",
    "custom",
    "eval_f",
    "eval_primitives",
    "eval_wirtinger",
    "validate_bounds",
    "PrimitiveValues",
    "WirtingerPair",
    "BoundsReport",
    "FocusingScan",
]


def alpha_max(d: int) -> float:
    """Energy-subcritical exponent ceiling: +inf for d <= 2, 4/(d-2) above."""
    return math.inf if d <= 2 else 4.0 / (d - 2)


@dataclass(eq=False)
class NonlinearitySpec:
    kind: str
    alpha: float | None = None
    alpha1: float | None = None
    alpha2: float | None = None
    d: int = 1
    s_nodes: tuple = ()
    g_nodes: tuple = ()
    _interp: object = field(default=None, repr=False)

    def __post_init__(self):
        amax = alpha_max(self.d)
        if self.d not in (1, 2):
            raise ValueError("simulation dimension must be 1 or 2")
        if self.kind == "power":
            if self.alpha is None or not 0 < self.alpha < amax:
                raise ValueError(f"power exponent must satisfy 0 < alpha < {amax}")
        elif self.kind == "combined":
            if self.alpha1 is None or self.alpha2 is None:
                raise ValueError("combined kind needs alpha1 and alpha2")
            if not (0 < self.alpha1 <= self.alpha2 < amax / 2):
                raise ValueError(
                    f"combined exponents must satisfy 0 < alpha1 <= alpha2 < {amax / 2}"
                )
        elif self.kind == "gross_pitaevskii":
            pass
        elif self.kind == "custom":
            if len(self.s_nodes) < 4:
                raise ValueError("custom kind needs at least 4 table nodes")
            if self.alpha1 is None or self.alpha2 is None:
                raise ValueError("custom kind needs nominal alpha1/alpha2 exponents")
            s = np.asarray(self.s_nodes, dtype=float)
            if s[0] != 0.0 or np.any(np.diff(s) <= 0):
                raise ValueError("custom s table must start at 0 and increase")
            self._interp = PchipInterpolator(s, np.asarray(self.g_nodes, dtype=float))
        else:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")

    # -- classification -------------------------------------------------

    @property
    def envelope_compliant(self) -> bool:
        """True when g(0) = 0 so the power-envelope bounds can hold."""
        return self.kind != "gross_pitaevskii"

    @property
    def holder_exponents(self) -> tuple[float, float] | None:
        """(alpha1, alpha2) pair in the s = |u|^2 variable, if defined."""
        if self.kind == "power":
            return (self.alpha / 2.0, self.alpha / 2.0)
        if self.kind in ("combined", "custom"):
            return (self.alpha1, self.alpha2)
        return None

    @property
    def lebesgue_exponent(self) -> float:
        """Exponent p of the L^p norm used in the weighted fixed-point ball."""
        if self.kind == "power":
            return self.alpha + 2.0
        if self.kind in ("combined", "custom"):
            return 2.0 * self.alpha2 + 2.0
        return 4.0  # gross_pitaevskii behaves like a cubic defocusing term

    # -- pointwise values ------------------------------------------------

    def g(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            out = s ** (self.alpha / 2.0)
        elif self.kind == "combined":
            out = s**self.alpha1 - s**self.alpha2
        elif self.kind == "gross_pitaevskii":
            out = 1.0 - s
        else:
            out = self._interp(s)
        return out if out.ndim else float(out)

    def g_prime(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            a = self.alpha / 2.0
            out = a * s ** (a - 1.0)
        elif self.kind == "combined":
            out = self.alpha1 * s ** (self.alpha1 - 1.0) - self.alpha2 * s ** (
                self.alpha2 - 1.0
            )
        elif self.kind == "gross_pitaevskii":
            out = -np.ones_like(s)
        else:
            out = self._interp.derivative(1)(s)
        return out if out.ndim else float(out)

    def g_second(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            a = self.alpha / 2.0
            out = a * (a - 1.0) * s ** (a - 2.0)
        elif self.kind == "combined":
            a1, a2 = self.alpha1, self.alpha2
            out = a1 * (a1 - 1.0) * s ** (a1 - 2.0) - a2 * (a2 - 1.0) * s ** (a2 - 2.0)
        elif self.kind == "gross_pitaevskii":
            out = np.zeros_like(s)
        else:
            out = self._interp.derivative(2)(s)
        return out if out.ndim else float(out)

    def big_g(self, s):
        """G(s) = integral of g from 0 to s."""
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            a = self.alpha / 2.0
            out = s ** (a + 1.0) / (a + 1.0)
        elif self.kind == "combined":
            out = s ** (self.alpha1 + 1.0) / (self.alpha1 + 1.0) - s ** (
                self.alpha2 + 1.0
            ) / (self.alpha2 + 1.0)
        elif self.kind == "gross_pitaevskii":
            out = s - s**2 / 2.0
        else:
            out = self._quad_big_g(s)
        return out if np.ndim(out) else float(out)

    def big_f(self, phi):
        """F(phi) = integral of f over real arguments; equals G(phi^2)/2."""
        phi = np.asarray(phi, dtype=float)
        return self.big_g(phi * phi) / 2.0

    def f(self, z):
        """f(z) = g(|z|^2) z, total on the complex plane."""
        z = np.asarray(z)
        s = np.abs(z) ** 2
        if self.kind == "power":
            out = s ** (self.alpha / 2.0) * z  # avoids g_prime singularities at 0
        else:
            out = self.g(s) * z
        return out if out.ndim else complex(out)

    def f_prime_real(self, phi):
        """d/dphi [g(phi^2) phi] for real phi, with the continuous limit at 0."""
        phi = np.asarray(phi, dtype=float)
        s = phi * phi
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > 0.0, 2.0 * s * self.g_prime(np.maximum(s, 1e-300)), 0.0)
        out = out + self.g(s)
        return out if out.ndim else float(out)

    def _quad_big_g(self, s):
        flat = np.atleast_1d(s).ravel()
        vals = np.empty_like(flat)
        for i, si in enumerate(flat):
            v, err = integrate.quad(self._interp, 0.0, si, epsrel=1e-10, limit=200)
            if err > max(1e-10 * abs(v), 1e-12):
                raise QuadratureError(
                    f"primitive quadrature stalled at rel err {err / max(abs(v), 1e-300):.2e}",
                    achieved=err,
                )
            vals[i] = v
        return vals.reshape(np.shape(s)) if np.ndim(s) else vals[0]


def power(alpha: float, d: int = 1) -> NonlinearitySpec:
    return NonlinearitySpec("power", alpha=alpha, d=d)


def combined(alpha1: float, alpha2: float, d: int = 1) -> NonlinearitySpec:
    return NonlinearitySpec("combined", alpha1=alpha1, alpha2=alpha2, d=d)


def gross_pitaevskii(d: int = 1) -> NonlinearitySpec:
    return NonlinearitySpec("gross_pitaevskii", d=d)


def custom(s_nodes, g_nodes, alpha1: float, alpha2: float, d: int = 1) -> NonlinearitySpec:
    return NonlinearitySpec(
        "custom",
        alpha1=alpha1,
        alpha2=alpha2,
        d=d,
        s_nodes=tuple(float(v) for v in s_nodes),
        g_nodes=tuple(float(v) for v in g_nodes),
    )


# -- module-level operations ---------------------------------------------


@dataclass
class PrimitiveValues:
    g: float
    big_g: float
    big_f: float


@dataclass
class WirtingerPair:
    f_z: complex
    f_zbar: complex
    singular_origin: bool = False


def eval_f(spec: NonlinearitySpec, z) -> complex:
    return spec.f(z)


def eval_primitives(spec: NonlinearitySpec, s: float) -> PrimitiveValues:
    """g(s), G(s) and F(s) at a nonnegative argument (F reads s as phi)."""
    if np.any(np.asarray(s) < 0):
        raise ValueError("primitive argument must be nonnegative")
    return PrimitiveValues(g=spec.g(s), big_g=spec.big_g(s), big_f=spec.big_f(s))


def eval_wirtinger(spec: NonlinearitySpec, z) -> WirtingerPair:
    """Complex derivatives f_z = g'(|z|^2)|z|^2 + g(|z|^2), f_zbar = g'(|z|^2) z^2.

    At z = 0 both expressions are replaced by their continuous limits
    (g(0) and 0).  The ``singular_origin`` flag is set when z = 0 was
    requested and the derivative is merely Hoelder there (smallest f-exponent
    below 1), mirroring the power case alpha < 1.
    """
    z = np.asarray(z, dtype=complex)
    s = np.abs(z) ** 2
    scalar = z.ndim == 0
    s_safe = np.maximum(s, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        gp = spec.g_prime(s_safe)
    fz = np.where(s > 0.0, gp * s_safe, 0.0) + spec.g(s)
    fzbar = np.where(s > 0.0, gp * z * z, 0.0)

    if spec.kind == "power":
        min_exp = spec.alpha
    elif spec.kind in ("combined", "custom"):
        min_exp = 2.0 * spec.alpha1
    else:
        min_exp = 2.0
    singular = bool(np.any(s == 0.0)) and min_exp < 1.0

    if scalar:
        return WirtingerPair(complex(fz), complex(fzbar), singular)
    return WirtingerPair(fz, fzbar, singular)


@dataclass
class FocusingScan:
    omega0: float
    found: bool
    s0: float | None
    margin: float


@dataclass
class BoundsReport:
    passed: bool
    c_empirical: float
    g_zero: float
    exponents: tuple | None
    s_grid: np.ndarray
    violations: list
    reason: str = ""
    focusing: FocusingScan | None = None


def _focusing_scan(spec, omega0, s_grid):
    vals = spec.big_g(s_grid) - omega0 * s_grid
    i = int(np.argmax(vals))
    if vals[i] > 0.0:
        return FocusingScan(omega0, True, float(s_grid[i]), float(vals[i]))
    return FocusingScan(omega0, False, None, float(vals[i]))


def validate_bounds(spec, s_grid=None, omega0=None) -> BoundsReport:
    """Sampled check of |s g'(s)| + |s^2 g''(s)| <= C (s^a1 + s^a2) and g(0)=0.

    Returns the smallest empirical constant C over the grid.  When ``omega0``
    is given, also scans for s0 with G(s0) > omega0*s0 (the focusing
    condition needed for bound states to exist).
    """
    if s_grid is None:
        s_grid = np.logspace(-8, 4, 481)
    s_grid = np.asarray(s_grid, dtype=float)
    focusing = _focusing_scan(spec, omega0, s_grid) if omega0 is not None else None
    g_zero = float(spec.g(0.0))

    exps = spec.holder_exponents
    if exps is None:
        return BoundsReport(
            passed=False,
            c_empirical=math.nan,
            g_zero=g_zero,
            exponents=None,
            s_grid=s_grid,
            violations=[],
            reason=f"g(0) = {g_zero} != 0: envelope bounds do not apply",
            focusing=focusing,
        )

    a1, a2 = exps
    num = np.abs(s_grid * spec.g_prime(s_grid)) + np.abs(
        s_grid**2 * spec.g_second(s_grid)
    )
    den = s_grid**a1 + s_grid**a2
    ratio = num / den
    bad = ~np.isfinite(ratio)
    violations = [float(s) for s in s_grid[bad]]
    passed = (g_zero == 0.0) and not violations
    reason = "" if passed else "non-finite envelope ratio" if violations else "g(0) != 0"
    return BoundsReport(
        passed=passed,
        c_empirical=float(np.max(ratio[~bad])) if np.any(~bad) else math.nan,
        g_zero=g_zero,
        exponents=(a1, a2),
        s_grid=s_grid,
        violations=violations,
        reason=reason,
        focusing=focusing,
    )
