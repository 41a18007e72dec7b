"""Stationary profiles: bound states and half-kinks of -phi'' + w phi = f(phi).

Bound states come either from the closed form (power nonlinearity, d=1) or
from a bisection shooting solver.  Half-kinks are integrated through the
first-integral identity  (phi')^2 = w phi^2 - 2 F(phi), which is monotone and
free of turning points once the kink frequency satisfies both root
conditions F(z) = w z^2 / 2 and f(z) = w z at the plateau z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    NoGroundState,
    NonMonotone,
    NoSignChange,
    RadicandNegative,
    SideConditionFailed,
    UnderResolved,
)
from .fitting import fit_log_slope, fit_tail_decay
from .nonlinearity import NonlinearitySpec

__all__ = [
    "BoundStateProfile",
    "KinkProfile",
    "KinkFrequency",
    "ground_state_closed_form",
    "shoot_bound_state",
    "potential_root",
    "find_kink_frequency",
    "kink_profile",
    "fit_tail_decay",
    "action",
    "ode_residual",
    "first_integral_residual",
]

_IVP_OPTS = dict(method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)


def _symmetric_grid(extent: float, dx: float):
    n = int(round(extent / dx))
    return np.arange(-n, n + 1) * dx, n * dx


@dataclass(eq=False)
class BoundStateProfile:
    """Even positive solution of -phi'' + omega*phi - f(phi) = 0 on a grid."""

    omega: float
    x: np.ndarray
    samples: np.ndarray
    phi_prime: np.ndarray
    fitted_decay: float
    residual: float
    method: str
    dx: float
    extent: float
    closed_form: object = field(default=None, repr=False)
    closed_form_prime: object = field(default=None, repr=False)
    _spline: object = field(default=None, repr=False)

    def eval(self, y):
        """Profile value at arbitrary points; exponential tails beyond the grid."""
        y = np.asarray(y, dtype=float)
        if self.closed_form is not None:
            return self.closed_form(y)
        if self._spline is None:
            self._spline = CubicSpline(self.x, self.samples)
        r = np.abs(y)
        inside = r <= self.extent
        out = np.empty_like(y)
        out[inside] = self._spline(r[inside])
        edge = self.samples[-1]
        out[~inside] = edge * np.exp(-self.fitted_decay * (r[~inside] - self.extent))
        return out

    def eval_prime(self, y):
        y = np.asarray(y, dtype=float)
        if self.closed_form_prime is not None:
            return self.closed_form_prime(y)
        if self._spline is None:
            self._spline = CubicSpline(self.x, self.samples)
        sgn = np.sign(y)
        r = np.abs(y)
        inside = r <= self.extent
        out = np.empty_like(y)
        out[inside] = self._spline(r[inside], 1) * sgn[inside]
        edge = self.samples[-1]
        out[~inside] = (
            -self.fitted_decay
            * edge
            * np.exp(-self.fitted_decay * (r[~inside] - self.extent))
            * sgn[~inside]
        )
        return out


@dataclass(eq=False)
class KinkProfile:
    """Monotone half-kink connecting 0 (left) to the plateau zeta1 (right).

    The Gross-Pitaevskii case is stored through the same container but holds
    the full tanh kink (-1 -> +1 in modulus units); ``is_gp`` marks it and
    ``first_integral_constant`` carries the plateau-anchored energy.
    """

    omega1: float
    zeta1: float
    x: np.ndarray
    samples: np.ndarray
    phi_prime: np.ndarray
    orientation: str
    first_integral_constant: float
    fitted_decay_left: float
    fitted_decay_right: float
    expected_decay_left: float
    expected_decay_right: float
    boundary_left: float
    boundary_right: float
    dx: float
    extent: float
    is_gp: bool = False
    closed_form: object = field(default=None, repr=False)
    closed_form_prime: object = field(default=None, repr=False)
    _spline: object = field(default=None, repr=False)

    def eval_extended(self, y):
        """Profile on all of R: spline inside the grid, exact tails outside."""
        y = np.asarray(y, dtype=float)
        if self.closed_form is not None:
            return self.closed_form(y)
        if self._spline is None:
            self._spline = CubicSpline(self.x, self.samples)
        out = np.empty_like(y)
        inside = np.abs(y) <= self.extent
        out[inside] = self._spline(y[inside])
        left = y < -self.extent
        right = y > self.extent
        out[left] = self.samples[0] * np.exp(
            self.expected_decay_left * (y[left] + self.extent)
        )
        gap = self.zeta1 - self.samples[-1]
        out[right] = self.zeta1 - gap * np.exp(
            -self.expected_decay_right * (y[right] - self.extent)
        )
        return out


# -- bound states ----------------------------------------------------------


def _sech_closed_form(alpha: float, omega: float):
    amp = ((alpha + 2.0) * omega / 2.0) ** (1.0 / alpha)
    p = 2.0 / alpha
    b = alpha * math.sqrt(omega) / 2.0

    def phi(y):
        return amp / np.cosh(b * np.asarray(y, dtype=float)) ** p

    def phi_prime(y):
        y = np.asarray(y, dtype=float)
        return -amp * p * b * np.tanh(b * y) / np.cosh(b * y) ** p

    return phi, phi_prime


def _default_extent(omega: float) -> float:
    # e^{-sqrt(omega) X} < 1e-12 plus a few widths of slack
    return (math.log(1e12) + 6.0) / math.sqrt(omega)


def _residual_max(x, phi, spec, omega):
    """Max |-phi'' + omega*phi - f(phi)| via the 5-point second-difference stencil."""
    h = x[1] - x[0]
    d2 = (
        -phi[:-4] + 16.0 * phi[1:-3] - 30.0 * phi[2:-2] + 16.0 * phi[3:-1] - phi[4:]
    ) / (12.0 * h * h)
    core = phi[2:-2]
    return float(np.max(np.abs(-d2 + omega * core - spec.f(core).real)))


def ground_state_closed_form(
    spec: NonlinearitySpec, omega: float, X: float | None = None, dx: float = 0.001
) -> BoundStateProfile:
    """Sampled sech-type ground state for the power nonlinearity in d = 1."""
    if spec.kind != "power" or spec.d != 1:
        raise ValueError("closed-form ground state requires a power nonlinearity, d=1")
    if omega <= 0:
        raise ValueError("frequency must be positive")
    phi, phi_prime = _sech_closed_form(spec.alpha, omega)
    if X is None:
        X = _default_extent(omega)
    x, extent = _symmetric_grid(X, dx)
    samples = phi(x)

    # residual certified on a fixed refinement step where the 5-point
    # stencil's truncation and roundoff both sit below the 1e-8 guarantee
    xf, _ = _symmetric_grid(min(extent, 10.0 / math.sqrt(omega)), 5e-4)
    residual = _residual_max(xf, phi(xf), spec, omega)

    half = x >= 0
    fit = fit_tail_decay(
        x[half],
        samples[half],
        window=(5.0 / math.sqrt(omega), min(extent, 14.0 / math.sqrt(omega))),
    )
    return BoundStateProfile(
        omega=omega,
        x=x,
        samples=samples,
        phi_prime=phi_prime(x),
        fitted_decay=fit.rate,
        residual=residual,
        method="closed_form",
        dx=dx,
        extent=extent,
        closed_form=phi,
        closed_form_prime=phi_prime,
    )


_CROSSED, _TURNED, _DECAYED = 1, -1, 0


def _shoot_once(spec, omega, a, x_cap, floor=None):
    """Integrate the radial ODE from phi(0)=a; classify the trajectory."""

    def rhs(x, y):
        return (y[1], omega * y[0] - spec.f(y[0]).real)

    def cross(x, y):
        return y[0]

    cross.terminal, cross.direction = True, -1.0

    def turn(x, y):
        return y[1]

    turn.terminal, turn.direction = True, 1.0

    events = [cross, turn]
    if floor is not None:
        def hit_floor(x, y):
            return y[0] - floor

        hit_floor.terminal, hit_floor.direction = True, -1.0
        events.append(hit_floor)

    # start a hair away from 0 so phi'(0) = 0 does not trip the turn event
    eps = 1e-6
    curv = omega * a - spec.f(a).real
    y0 = (a + 0.5 * curv * eps * eps, curv * eps)
    sol = solve_ivp(rhs, (eps, x_cap), y0, events=events, **_IVP_OPTS)

    if sol.t_events[0].size:
        return _CROSSED, sol
    if sol.t_events[1].size:
        return _TURNED, sol
    return _DECAYED, sol


def shoot_bound_state(
    spec: NonlinearitySpec,
    omega: float,
    X: float | None = None,
    tol: float = 1e-10,
    dx: float = 0.001,
    s_max: float | None = None,
) -> BoundStateProfile:
    """Even bound state by bisection on the shooting amplitude phi(0).

    Trajectories that cross zero mean the amplitude is too large, trajectories
    that turn around while positive mean it is too small; the homoclinic sits
    between.  The accepted trajectory is glued to an exponential tail once it
    falls below 1e-7 of the amplitude.
    """
    if spec.d != 1:
        raise ValueError("shooting solver is 1-d only")
    if omega <= 0:
        raise NoGroundState("frequency must be positive")

    seed = potential_root(spec, omega)
    if seed == 0.0:
        raise NoGroundState(
            f"focusing condition fails: G(s) - {omega}*s has no positive crossing"
        )
    if s_max is None:
        s_max = 10.0 * seed
    x_cap = max(X or 0.0, 45.0 / math.sqrt(omega))

    lo = hi = None
    for mult in (0.97, 1.03, 0.9, 1.1, 0.7, 1.3, 0.5, 2.0, 0.25, 4.0):
        a = seed * mult
        if a > s_max:
            continue
        code, _ = _shoot_once(spec, omega, a, x_cap)
        if code == _TURNED and (lo is None or a > lo):
            lo = a
        elif code == _CROSSED and (hi is None or a < hi):
            hi = a
        if lo is not None and hi is not None and lo < hi:
            break
    if lo is None or hi is None or lo >= hi:
        raise NoGroundState(
            f"could not bracket a decaying amplitude in (0, {s_max:g})"
        )

    for _ in range(200):
        if hi - lo <= 4e-16 * seed:
            break
        mid = 0.5 * (lo + hi)
        code, _ = _shoot_once(spec, omega, mid, x_cap)
        if code == _CROSSED:
            hi = mid
        elif code == _TURNED:
            lo = mid
        else:
            lo = hi = mid
            break

    a_star = 0.5 * (lo + hi)
    floor = 1e-7 * a_star
    code, sol = _shoot_once(spec, omega, a_star, x_cap, floor=floor)
    if sol.t_events[2].size:
        x_trust = float(sol.t_events[2][0])
    else:
        x_trust = float(sol.t[-1])
    phi_tr, dphi_tr = sol.sol(x_trust)
    if phi_tr <= 0 or phi_tr > 1e-4 * a_star:
        raise NoGroundState("bisection did not produce a decaying trajectory")
    mu = -dphi_tr / phi_tr  # local log-derivative; ~ sqrt(omega) up to tail terms

    if X is None:
        X = _default_extent(omega)
    x, extent = _symmetric_grid(X, dx)
    tail_at_edge = phi_tr * math.exp(-mu * max(extent - x_trust, 0.0))
    if tail_at_edge > tol:
        raise UnderResolved(
            f"profile decays only to {tail_at_edge:.3e} > tol={tol:g} at X={extent}"
        )

    r = np.abs(x)
    samples = np.empty_like(x)
    dsamples = np.empty_like(x)
    inside = r <= x_trust
    vals = sol.sol(r[inside])
    samples[inside] = vals[0]
    dsamples[inside] = vals[1] * np.sign(x[inside])
    tail = ~inside
    decay = np.exp(-mu * (r[tail] - x_trust))
    samples[tail] = phi_tr * decay
    dsamples[tail] = -mu * phi_tr * decay * np.sign(x[tail])

    half = x >= 0
    w_lo = float(r[inside & (samples < 0.05 * a_star)].min(initial=x_trust * 0.5))
    fit = fit_tail_decay(x[half], samples[half], window=(w_lo, x_trust))
    residual = _residual_max(x, samples, spec, omega)
    return BoundStateProfile(
        omega=omega,
        x=x,
        samples=samples,
        phi_prime=dsamples,
        fitted_decay=fit.rate,
        residual=residual,
        method="shooting",
        dx=dx,
        extent=extent,
    )


# -- kinks -----------------------------------------------------------------


def potential_root(spec: NonlinearitySpec, omega: float, s_max: float = 1e3) -> float:
    """Smallest positive root of F(z) - (omega/2) z^2; 0.0 when none exists.

    A tangential (double) root, which is exactly the kink-frequency case, is
    recovered by locating a near-zero interior maximum.
    """
    grid = np.geomspace(1e-8, s_max, 4096)
    p_of = lambda z: spec.big_f(z) - 0.5 * omega * z * z
    vals = p_of(grid)
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if flips.size:
        i = flips[0]
        return float(brentq(p_of, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    # tangency: a double root shows up as an interior local maximum touching
    # zero after the potential has genuinely dipped below it
    interior = np.nonzero(
        (vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]) & (vals[1:-1] <= 0.0)
    )[0] + 1
    for i in interior:
        z_guess = grid[i]
        scale = abs(0.5 * omega * z_guess * z_guess) + abs(spec.big_f(z_guess)) + 1e-300
        if i < 2 or vals[:i].min() > -1e-6 * scale:
            continue  # no genuine well to the left (e.g. cancellation plateau)
        res = minimize_scalar(
            lambda z: -p_of(z), bracket=(grid[i - 1], grid[i], grid[i + 1])
        )
        z_star = float(res.x)
        # polish: P' = f(z) - omega*z crosses zero transversally at a double root
        dp_of = lambda z: spec.f(z).real - omega * z
        lo, hi = 0.9 * z_star, 1.1 * z_star
        if dp_of(lo) * dp_of(hi) < 0.0:
            z_star = float(brentq(dp_of, lo, hi, xtol=1e-16, rtol=1e-15))
        scale = abs(0.5 * omega * z_star * z_star) + abs(spec.big_f(z_star)) + 1e-300
        if abs(p_of(z_star)) <= 1e-10 * scale:
            return z_star
    return 0.0


@dataclass
class KinkFrequency:
    omega1: float
    zeta1: float
    system_residual: float
    f_prime_zero_margin: float   # f'(0) - omega1, must be < 0
    plateau_margin: float        # f'(zeta1) - omega1, < 0 gives exponential tails
    exponential_decay_ok: bool
    is_gp: bool = False


def find_kink_frequency(spec: NonlinearitySpec, bracket=(-1.0, 1.0)) -> KinkFrequency:
    """Frequency w1 and plateau z1 solving F(z1) = w1 z1^2/2 and f(z1) = w1 z1.

    Eliminating w1 = f(z)/z reduces the pair to one scalar equation
    Q(z) = F(z) - z f(z)/2 = 0, which is solved by bracketed root finding;
    the bracket argument filters candidates by their impled frequency.
    Gross-Pitaevskii is special-cased to w1 = 0 (its kink is the closed-form
    tanh profile and does not satisfy the half-kink hypotheses).
    """
    if spec.kind == "gross_pitaevskii":
        zeta1 = potential_root(spec, 0.0)
        return KinkFrequency(
            omega1=0.0,
            zeta1=zeta1,
            system_residual=0.0,
            f_prime_zero_margin=float(spec.f_prime_real(0.0)),
            plateau_margin=float(spec.f_prime_real(zeta1)),
            exponential_decay_ok=float(spec.f_prime_real(zeta1)) < 0.0,
            is_gp=True,
        )

    w_lo, w_hi = bracket

    def q_of(z):
        return spec.big_f(z) - 0.5 * z * spec.f(z).real

    grid = np.geomspace(1e-6, 1e3, 4096)
    vals = q_of(grid)
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        zeta1 = float(brentq(q_of, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
        omega1 = float(spec.g(zeta1 * zeta1))  # f(z)/z
        if not (w_lo < omega1 <= w_hi):
            continue
        margin0 = float(spec.f_prime_real(0.0)) - omega1
        if margin0 >= 0.0:
            raise SideConditionFailed(
                f"f'(0) - omega1 = {margin0:.3e} >= 0 at omega1 = {omega1:.12g}"
            )
        # zeta1 must be the *smallest* positive root of the potential
        probe = np.linspace(1e-6 * zeta1, zeta1 * (1.0 - 1e-6), 512)
        p_vals = spec.big_f(probe) - 0.5 * omega1 * probe * probe
        scale = abs(0.5 * omega1 * zeta1 * zeta1) + 1e-300
        if np.any(p_vals > 1e-12 * scale):
            raise SideConditionFailed(
                "potential has an earlier positive root: zeta(omega1) < plateau"
            )
        margin1 = float(spec.f_prime_real(zeta1)) - omega1
        return KinkFrequency(
            omega1=omega1,
            zeta1=zeta1,
            system_residual=abs(q_of(zeta1)) / scale,
            f_prime_zero_margin=margin0,
            plateau_margin=margin1,
            exponential_decay_ok=margin1 < 0.0,
        )
    raise NoSignChange(
        f"no kink frequency with omega in ({w_lo:g}, {w_hi:g}]: the root system "
        "F(z)=w z^2/2, f(z)=w z has no admissible solution"
    )


def _gp_kink_profile(spec, X, dx):
    # stationary tanh kink of f(u) = (1-|u|^2)u, centered so phi(0) = 1/2
    root2 = math.sqrt(2.0)
    shift = root2 * math.atanh(0.5)

    def phi(y):
        return np.tanh((np.asarray(y, dtype=float) + shift) / root2)

    def phi_prime(y):
        return (1.0 - phi(y) ** 2) / root2

    x, extent = _symmetric_grid(X, dx)
    samples = phi(x)
    const = float(spec.big_f(1.0))  # plateau-anchored first-integral energy
    fit_l = fit_tail_decay(-x, np.abs(samples + 1.0), window=(10.0, extent - 1.0))
    fit_r = fit_tail_decay(x, np.abs(1.0 - samples), window=(10.0, extent - 1.0))
    return KinkProfile(
        omega1=0.0,
        zeta1=1.0,
        x=x,
        samples=samples,
        phi_prime=phi_prime(x),
        orientation="zero_at_minus_inf",
        first_integral_constant=const,
        fitted_decay_left=fit_l.rate,
        fitted_decay_right=fit_r.rate,
        expected_decay_left=root2,
        expected_decay_right=root2,
        boundary_left=float(samples[0]),
        boundary_right=float(samples[-1]),
        dx=dx,
        extent=extent,
        is_gp=True,
        closed_form=phi,
        closed_form_prime=phi_prime,
    )


def kink_profile(
    spec: NonlinearitySpec,
    omega1: float,
    X: float = 60.0,
    dx: float = 0.002,
    tol: float = 1e-8,
    phi0: float | None = None,
) -> KinkProfile:
    """Half-kink by integrating phi' = sqrt(omega1 phi^2 - 2 F(phi)).

    The radicand has double zeros at phi = 0 and phi = zeta1 exactly when
    omega1 is the kink frequency; near both endpoints the ODE is replaced by
    its linearisation to dodge catastrophic cancellation, and past the
    integration stop the exact exponential tails are used.
    """
    if spec.d != 1:
        raise ValueError("kink profiles are 1-d only")
    if spec.kind == "gross_pitaevskii":
        return _gp_kink_profile(spec, X, dx)

    zeta1 = potential_root(spec, omega1)
    if zeta1 == 0.0:
        raise RadicandNegative(
            f"potential F(z) - {omega1}*z^2/2 has no positive root: wrong omega1"
        )
    scale = omega1 * zeta1 * zeta1 + 1e-300
    plateau_defect = abs(spec.f(zeta1).real - omega1 * zeta1)
    if plateau_defect > 1e-6 * max(1.0, scale):
        raise RadicandNegative(
            f"f(zeta)-omega1*zeta = {plateau_defect:.3e} != 0 at the plateau: "
            "radicand has a simple zero, omega1 is not a kink frequency"
        )

    k0_sq = omega1 - float(spec.f_prime_real(0.0))
    if k0_sq <= 0.0:
        raise SideConditionFailed(f"f'(0) - omega1 = {-k0_sq:.3e} >= 0")
    k1_sq = omega1 - float(spec.f_prime_real(zeta1))
    if k1_sq <= 0.0:
        raise SideConditionFailed(
            f"f'(zeta1) - omega1 = {-k1_sq:.3e} >= 0: no exponential plateau"
        )
    kappa0, kappa1 = math.sqrt(k0_sq), math.sqrt(k1_sq)

    eps = 1e-6 * zeta1
    worst_radicand = [0.0]

    def speed(phi_arr):
        phi_arr = np.asarray(phi_arr, dtype=float)
        out = np.empty_like(phi_arr)
        low = phi_arr < eps
        high = (zeta1 - phi_arr) < eps
        mid = ~(low | high)
        out[low] = kappa0 * phi_arr[low]
        out[high] = kappa1 * np.maximum(zeta1 - phi_arr[high], 0.0)
        r = omega1 * phi_arr[mid] ** 2 - 2.0 * spec.big_f(phi_arr[mid])
        worst_radicand[0] = min(worst_radicand[0], float(r.min(initial=0.0)))
        out[mid] = np.sqrt(np.maximum(r, 0.0))
        return out

    def rhs(x, y):
        return (float(speed(y[:1])[0]),)

    if phi0 is None:
        phi0 = zeta1 / 2.0
    if not 0.0 < phi0 < zeta1:
        raise ValueError("normalisation phi(0) must lie strictly between 0 and zeta1")

    def plateau_reached(x, y):
        return (zeta1 - y[0]) - 1e-13 * zeta1

    plateau_reached.terminal, plateau_reached.direction = True, -1.0

    def zero_reached(x, y):
        return y[0] - 1e-16 * zeta1

    zero_reached.terminal, zero_reached.direction = True, -1.0

    fwd = solve_ivp(rhs, (0.0, X), [phi0], events=[plateau_reached], **_IVP_OPTS)
    bwd = solve_ivp(rhs, (0.0, -X), [phi0], events=[zero_reached], **_IVP_OPTS)
    if worst_radicand[0] < -1e-10 * scale:
        raise RadicandNegative(
            f"radicand dipped to {worst_radicand[0]:.3e} in the bulk: wrong omega1"
        )

    x, extent = _symmetric_grid(X, dx)
    x_f = float(fwd.t[-1])
    x_b = float(bwd.t[-1])
    phi_f = float(fwd.y[0, -1])
    phi_b = float(bwd.y[0, -1])

    samples = np.empty_like(x)
    mid = (x >= x_b) & (x <= x_f)
    samples[mid] = np.where(
        x[mid] >= 0.0, fwd.sol(np.maximum(x[mid], 0.0))[0], bwd.sol(np.minimum(x[mid], 0.0))[0]
    )
    left = x < x_b
    samples[left] = phi_b * np.exp(kappa0 * (x[left] - x_b))
    right = x > x_f
    samples[right] = zeta1 - (zeta1 - phi_f) * np.exp(-kappa1 * (x[right] - x_f))
    samples = np.clip(samples, 0.0, zeta1)
    eps_m = np.finfo(float).eps * zeta1
    if np.any(np.diff(samples) < -8.0 * eps_m):
        raise NonMonotone("kink samples are not monotone increasing")
    samples = np.maximum.accumulate(samples)  # absorb ulp-level dips in the tails
    phi_prime = speed(samples)

    diffs = np.diff(samples)
    resolvable = (samples[:-1] > 1e3 * eps_m) & (zeta1 - samples[:-1] > 1e3 * eps_m)
    if np.any(diffs[resolvable] <= 0.0):
        raise NonMonotone("kink samples are not strictly increasing in the bulk")

    fit_l = fit_log_slope(
        -x, samples, window=_value_window(-x, samples, 1e-10 * zeta1, 1e-2 * zeta1)
    )
    fit_r = fit_log_slope(
        x,
        zeta1 - samples,
        window=_value_window(x, zeta1 - samples, 1e-10 * zeta1, 1e-2 * zeta1),
    )
    return KinkProfile(
        omega1=omega1,
        zeta1=zeta1,
        x=x,
        samples=samples,
        phi_prime=phi_prime,
        orientation="zero_at_minus_inf",
        first_integral_constant=0.0,
        fitted_decay_left=fit_l.rate,
        fitted_decay_right=fit_r.rate,
        expected_decay_left=kappa0,
        expected_decay_right=kappa1,
        boundary_left=float(samples[0]),
        boundary_right=float(samples[-1]),
        dx=dx,
        extent=extent,
    )


def _value_window(t, values, lo, hi):
    keep = (values >= lo) & (values <= hi) & (t > 0)
    if not np.any(keep):
        raise UnderResolved("no tail samples inside the fit value window")
    return (float(t[keep].min()), float(t[keep].max()))


# -- diagnostics -----------------------------------------------------------


def ode_residual(profile: BoundStateProfile, spec: NonlinearitySpec) -> float:
    """Recompute max |-phi'' + omega phi - f(phi)| from the stored samples."""
    return _residual_max(profile.x, profile.samples, spec, profile.omega)


def first_integral_residual(profile: KinkProfile, spec: NonlinearitySpec) -> float:
    """Max |(phi')^2/2 - (omega1/2) phi^2 + F(phi) - E| over the samples.

    E is 0 for genuine half-kinks and the plateau-anchored constant for the
    Gross-Pitaevskii tanh kink.
    """
    vals = (
        0.5 * profile.phi_prime**2
        - 0.5 * profile.omega1 * profile.samples**2
        + spec.big_f(profile.samples)
        - profile.first_integral_constant
    )
    return float(np.max(np.abs(vals)))


def action(profile: BoundStateProfile, spec: NonlinearitySpec) -> float:
    """S = 0.5||phi'||^2 + (omega/2)||phi||^2 - 0.5 int G(phi^2), trapezoidal."""
    x, phi, dphi = profile.x, profile.samples, profile.phi_prime
    grad = 0.5 * np.trapezoid(dphi**2, x)
    mass = 0.5 * profile.omega * np.trapezoid(phi**2, x)
    pot = 0.5 * np.trapezoid(spec.big_g(phi**2), x)
    return float(grad + mass - pot)
