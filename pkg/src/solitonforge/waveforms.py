"""Assembled waveforms: boosted solitons, half-kinks, trains, and the source
terms and admissibility checks the gluing theory needs.

Every boosted component carries the phase exp(i(v.x/2 - |v|^2 t/4 + w t + g)).
Multi-kink profiles live on the torus through a smooth blending collar at the
box seam; all norms near the seam are masked out by convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentSeries, ExponentInfeasible, R1OutOfRange
from .fitting import DecayFit, fit_time_decay
from .grid import ComplexField, collar_mask, norm_lp, require_quantized
from .nonlinearity import NonlinearitySpec, alpha_max
from .profiles import BoundStateProfile, KinkProfile

__all__ = [
    "SolitonParams",
    "KinkParams",
    "TrainSpec",
    "GeometricTrainGenerator",
    "soliton_field",
    "scaled_soliton_field",
    "moving_gp_kink",
    "assemble",
    "source_term",
    "min_relative_velocity",
    "check_train_admissibility",
    "check_speed_balance",
    "select_exponents",
    "fit_source_decay",
    "collar_mask",
]


@dataclass(eq=False)
class SolitonParams:
    """One soliton: profile + frequency, phase, initial position, velocity.

    ``scaled=True`` marks the rescaled family w^(1/alpha) Phi(sqrt(w) x)
    built on the frequency-one bound state of a power nonlinearity; the
    profile field is then ignored.
    """

    omega: float
    gamma: float = 0.0
    x0: object = 0.0
    v: object = 0.0
    profile: BoundStateProfile | None = None
    scaled: bool = False

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("soliton frequency must be positive")


@dataclass(eq=False)
class KinkParams:
    profile: KinkProfile
    omega: float
    gamma: float = 0.0
    x0: float = 0.0
    v: float = 0.0
    side: str = "right"  # "left": plateau at -inf; "right": plateau at +inf

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("kink side must be 'left' or 'right'")


@dataclass(eq=False)
class TrainSpec:
    """Blueprint for a multi-soliton, multi-kink, or truncated train."""

    nonlinearity: NonlinearitySpec
    solitons: list = field(default_factory=list)
    left_kink: KinkParams | None = None
    right_kink: KinkParams | None = None
    truncation: int = 0
    generator: object = None

    def __post_init__(self):
        if self.left_kink is not None:
            self.left_kink.side = "left"
        if self.right_kink is not None:
            self.right_kink.side = "right"
        if self.has_kinks():
            v = [c.v for c in self.components()]
            if any(b - a <= 0 for a, b in zip(v, v[1:])):
                raise ValueError(
                    "multi-kink velocities must be strictly ordered left to right"
                )

    def components(self) -> list:
        out = []
        if self.left_kink is not None:
            out.append(self.left_kink)
        out.extend(self.solitons)
        if self.right_kink is not None:
            out.append(self.right_kink)
        return out

    def has_kinks(self) -> bool:
        return self.left_kink is not None or self.right_kink is not None


# -- single components -----------------------------------------------------


def _boost_phase(x, v, t, omega, gamma):
    if np.ndim(v) == 0:
        vx = v * x
        vv = v * v
    else:
        vx = v[0] * x[0] + v[1] * x[1]
        vv = float(np.dot(v, v))
    return np.exp(1j * (0.5 * vx - 0.25 * vv * t + omega * t + gamma))


def _displacement(grid, coords, p, t, wrap):
    if np.ndim(p.v) == 0:
        if grid.d != 1:
            raise ValueError("2-d solitons need vector velocity and position")
        arg = coords - p.v * t - p.x0
        return grid.wrap(arg) if wrap else arg
    ax = coords[0] - p.v[0] * t - p.x0[0]
    ay = coords[1] - p.v[1] * t - p.x0[1]
    if wrap:
        ax, ay = grid.wrap(ax), grid.wrap(ay)
    return np.hypot(ax, ay)


def _soliton_values(spec, p, grid, coords, t, wrap=True):
    arg = _displacement(grid, coords, p, t, wrap)
    if p.scaled:
        if spec is None or spec.kind != "power":
            raise ValueError("scaled solitons need the scale-invariant power kind")
        if grid.d != 1:
            raise ValueError("scaled train solitons are 1-d only")
        alpha = spec.alpha
        amp = p.omega ** (1.0 / alpha)
        width = math.sqrt(p.omega)
        base = ((alpha + 2.0) / 2.0) ** (1.0 / alpha)
        env = amp * base / np.cosh(alpha * width * arg / 2.0) ** (2.0 / alpha)
    else:
        if p.profile is None:
            raise ValueError("soliton needs a resolved profile or scaled=True")
        env = p.profile.eval(arg)
    x = coords if grid.d == 1 else coords
    return env * _boost_phase(x, p.v, t, p.omega, p.gamma)


def _gp_kink_values(p, coords, t):
    # explicit travelling kink of f(u) = (1-|u|^2)u; exact for |c| < sqrt(2)
    c = p.v if p.side == "right" else -p.v
    y = coords - p.v * t - p.x0
    if p.side == "left":
        y = -y
    if abs(c) >= math.sqrt(2.0):
        raise ValueError("gp kink speed must satisfy |c| < sqrt(2)")
    width = math.sqrt(2.0 - c * c)
    vals = width / math.sqrt(2.0) * np.tanh(y * width / 2.0) + 1j * c / math.sqrt(2.0)
    return vals * np.exp(1j * p.gamma)


def _kink_values(spec, p, grid, coords, t):
    if grid.d != 1:
        raise ValueError("kinks are 1-d only")
    if p.profile is not None and getattr(p.profile, "is_gp", False):
        return _gp_kink_values(p, coords, t)
    y = coords - p.v * t - p.x0
    if p.side == "left":
        y = -y
    env = p.profile.eval_extended(y)
    return env * _boost_phase(coords, p.v, t, p.omega, p.gamma)


def _component_values(spec, p, grid, coords, t, wrap):
    if isinstance(p, KinkParams):
        return _kink_values(spec, p, grid, coords, t)
    return _soliton_values(spec, p, grid, coords, t, wrap=wrap)


def _bind_check(train, grid):
    for p in train.components():
        if isinstance(p, KinkParams) and getattr(p.profile, "is_gp", False):
            continue  # gp kinks carry no boost phase
        require_quantized(grid, p.v)


def soliton_field(p: SolitonParams, grid, t: float, spec=None) -> ComplexField:
    """Boosted soliton sampled on the grid (profile argument wrapped).

    ``spec`` is only consulted for scaled solitons, whose envelope is the
    rescaled closed form of the power nonlinearity.
    """
    require_quantized(grid, p.v)
    coords = grid.x if grid.d == 1 else (grid.x, grid.y)
    return ComplexField(t, _soliton_values(spec, p, grid, coords, t), grid)


def scaled_soliton_field(spec, p: SolitonParams, grid, t: float) -> ComplexField:
    """Rescaled-boosted soliton of the scale-invariant train family."""
    require_quantized(grid, p.v)
    p2 = SolitonParams(omega=p.omega, gamma=p.gamma, x0=p.x0, v=p.v, scaled=True)
    coords = grid.x if grid.d == 1 else (grid.x, grid.y)
    return ComplexField(t, _soliton_values(spec, p2, grid, coords, t), grid)


def moving_gp_kink(c: float, grid, t: float, x0: float = 0.0, gamma: float = 0.0) -> ComplexField:
    """Travelling Gross-Pitaevskii kink K(t,x) = phi_c(x - c t), |c| < sqrt(2)."""
    if abs(c) >= math.sqrt(2.0):
        raise ValueError("gp kink speed must satisfy |c| < sqrt(2)")
    width = math.sqrt(2.0 - c * c)
    y = grid.x - c * t - x0
    vals = width / math.sqrt(2.0) * np.tanh(y * width / 2.0) + 1j * c / math.sqrt(2.0)
    return ComplexField(t, vals * np.exp(1j * gamma), grid)


# -- assembly ----------------------------------------------------------------


def _smooth_ramp(u):
    """C-infinity ramp 0 -> 1 on [0, 1] with flat ends."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return a / (a + b)


def _blend_periodize(grid, fn, collar_width):
    """Evaluate fn on the grid; near the right box edge blend smoothly into
    the periodic image fn(x - L) so the result is smooth on the torus."""
    vals = fn(grid.x)
    if collar_width <= 0.0:
        return vals
    edge = grid.L / 2.0 - collar_width
    idx = grid.x >= edge
    s = _smooth_ramp((grid.x[idx] - edge) / collar_width)
    vals[idx] = (1.0 - s) * vals[idx] + s * fn(grid.x[idx] - grid.L)
    return vals


def profile_and_source(train: TrainSpec, grid, t: float, collar_width: float | None = None):
    """Assembled profile W(t) and its defect H(t) = f(W) - sum f(component)
    in one component sweep; returns a pair of value arrays."""
    _bind_check(train, grid)
    spec = train.nonlinearity
    if not train.has_kinks():
        coords = grid.x if grid.d == 1 else (grid.x, grid.y)
        comps = [
            _component_values(spec, p, grid, coords, t, wrap=True)
            for p in train.components()
        ]
        total = sum(comps)
        return total, spec.f(total) - sum(spec.f(c) for c in comps)
    if collar_width is None:
        collar_width = grid.L / 16.0

    def fn(coords):
        comps = [
            _component_values(spec, p, grid, coords, t, wrap=False)
            for p in train.components()
        ]
        total = sum(comps)
        return total, spec.f(total) - sum(spec.f(c) for c in comps)

    w_vals, h_vals = fn(grid.x)
    edge = grid.L / 2.0 - collar_width
    idx = grid.x >= edge
    if np.any(idx):
        s = _smooth_ramp((grid.x[idx] - edge) / collar_width)
        w_img, h_img = fn(grid.x[idx] - grid.L)
        w_vals[idx] = (1.0 - s) * w_vals[idx] + s * w_img
        h_vals[idx] = (1.0 - s) * h_vals[idx] + s * h_img
    return w_vals, h_vals


def assemble(train: TrainSpec, grid, t: float, collar_width: float | None = None) -> ComplexField:
    """Pointwise sum of all components at time t.

    Soliton-only trains are exactly periodic (wrapped profile arguments).
    Trains with kinks have unequal limits at the two box ends and are closed
    up with a smooth blending collar of width L/16 at the seam.
    """
    _bind_check(train, grid)
    spec = train.nonlinearity
    if not train.has_kinks():
        coords = grid.x if grid.d == 1 else (grid.x, grid.y)
        total = sum(
            _component_values(spec, p, grid, coords, t, wrap=True)
            for p in train.components()
        )
        return ComplexField(t, total, grid)
    if collar_width is None:
        collar_width = grid.L / 16.0

    def fn(coords):
        return sum(
            _component_values(spec, p, grid, coords, t, wrap=False)
            for p in train.components()
        )

    return ComplexField(t, _blend_periodize(grid, fn, collar_width), grid)


def source_term(train: TrainSpec, grid, t: float, collar_width: float | None = None) -> ComplexField:
    """Profile defect H(t) = f(sum of components) - sum f(component).

    This is exactly the failure of the assembled profile to solve the
    equation, and it decays exponentially in time once the components
    separate.  For kink trains H is blended at the seam like the profile.
    """
    return ComplexField(t, profile_and_source(train, grid, t, collar_width)[1], grid)


# -- admissibility -----------------------------------------------------------


@dataclass
class RelativeVelocity:
    v_star: float
    omega_star: float
    degenerate: bool  # equal velocities somewhere: the theory does not apply


def min_relative_velocity(train: TrainSpec) -> RelativeVelocity:
    """Minimal pairwise velocity gap over all components, min soliton frequency."""
    comps = train.components()
    if len(comps) < 2:
        raise ValueError("need at least 2 components for a relative velocity")
    v = [np.atleast_1d(np.asarray(c.v, dtype=float)) for c in comps]
    gaps = [
        float(np.linalg.norm(v[i] - v[j]))
        for i in range(len(v))
        for j in range(i + 1, len(v))
    ]
    v_star = min(gaps)
    omegas = [s.omega for s in train.solitons] or [c.omega for c in comps]
    return RelativeVelocity(
        v_star=v_star, omega_star=min(omegas), degenerate=(v_star == 0.0)
    )


@dataclass(eq=False)
class GeometricTrainGenerator:
    """Infinite family omega_j = omega_ratio**j, v_j = velocity_ratio**j * vbar."""

    vbar: float
    omega_ratio: float = 0.5
    velocity_ratio: float = 2.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.omega_ratio < 1.0:
            raise ValueError("omega_ratio must lie in (0, 1)")
        if self.velocity_ratio <= 1.0:
            raise ValueError("velocity_ratio must exceed 1")

    def omega(self, j: int) -> float:
        return self.omega_ratio**j

    def velocity(self, j: int) -> float:
        return self.vbar * self.velocity_ratio**j

    def truncate(self, spec: NonlinearitySpec, J: int, grid=None) -> TrainSpec:
        """First J scaled solitons as a TrainSpec; velocities grid-quantized."""
        if J < 1:
            raise ValueError("truncation must keep at least one soliton")
        vbar = self.vbar
        if grid is not None:
            if self.velocity_ratio != round(self.velocity_ratio):
                raise ValueError(
                    "grid quantization needs an integer velocity ratio"
                )
            vbar = grid.quantize_velocity(vbar * self.velocity_ratio) / self.velocity_ratio
        sol = [
            SolitonParams(
                omega=self.omega(j),
                gamma=self.gamma,
                v=vbar * self.velocity_ratio**j,
                scaled=True,
            )
            for j in range(1, J + 1)
        ]
        return TrainSpec(
            nonlinearity=spec, solitons=sol, truncation=J, generator=self
        )


@dataclass
class TrainAdmissibilityReport:
    r1: float
    exponent: float            # 1/alpha - d/(2 r1), must be positive
    series_partial: float      # sum of omega_j^exponent over `terms` terms
    series_limit: float        # closed-form geometric limit
    series_tail: float         # bound on the omitted tail after `terms`
    v_star: float              # inf over pairs of sqrt(min w) |v_j - v_k|
    v_star_closed_form: float
    passes: bool


def check_train_admissibility(
    train: TrainSpec, r1: float, terms: int = 200, max_pairs: int = 24
) -> TrainAdmissibilityReport:
    """Verify the infinite-train integrability and fast-travel conditions.

    Needs the power nonlinearity and a geometric generator.  Raises
    R1OutOfRange when r1 leaves the window (d*alpha/2, alpha+2) and
    DivergentSeries when the frequency series cannot converge.
    """
    gen = train.generator
    spec = train.nonlinearity
    if gen is None or spec.kind != "power":
        raise ValueError("admissibility check needs a generator and the power kind")
    alpha, d = spec.alpha, spec.d
    if not (d * alpha / 2.0 < r1 < alpha + 2.0):
        raise R1OutOfRange(
            f"integrability exponent window requires d*alpha/2 = {d * alpha / 2.0:g}"
            f" < r1 < alpha+2 = {alpha + 2.0:g}, got r1 = {r1:g}"
        )
    e = 1.0 / alpha - d / (2.0 * r1)
    if e <= 0.0:
        raise DivergentSeries(f"series exponent 1/alpha - d/(2 r1) = {e:g} <= 0")
    q = gen.omega_ratio**e
    j = np.arange(1, terms + 1)
    partial = float(np.sum(q**j))
    limit = q / (1.0 - q)
    tail = q ** (terms + 1) / (1.0 - q)

    pairs = []
    for a in range(1, max_pairs + 1):
        for b in range(a + 1, max_pairs + 1):
            wmin = min(gen.omega(a), gen.omega(b))
            pairs.append(math.sqrt(wmin) * abs(gen.velocity(b) - gen.velocity(a)))
    v_star = min(pairs)
    # consecutive pairs dominate and grow like (sqrt(rho) mu)^j, so the
    # infimum is the (1, 2) pair whenever sqrt(rho) mu >= 1
    rho, mu = gen.omega_ratio, gen.velocity_ratio
    closed = rho * mu * (mu - 1.0) * abs(gen.vbar)
    return TrainAdmissibilityReport(
        r1=r1,
        exponent=e,
        series_partial=partial,
        series_limit=limit,
        series_tail=tail,
        v_star=v_star,
        v_star_closed_form=closed,
        passes=True,
    )


def check_speed_balance(train: TrainSpec, M: float) -> bool:
    """Max soliton speed capped by M * v_star**M (lets the glued solution
    reach all the way down to t = 0)."""
    if M < 1.0:
        raise ValueError("M must be at least 1")
    vbar = max(float(np.max(np.abs(np.atleast_1d(s.v)))) for s in train.solitons)
    rv = min_relative_velocity(train)
    return vbar <= M * rv.v_star**M


@dataclass
class ExponentSelection:
    r1: float
    r2: float
    b1: float
    b2: float


def select_exponents(beta1: float, beta2: float, d: int) -> ExponentSelection:
    """Pick Lebesgue exponents (r1, r2) for the two-exponent contraction.

    The admissible pair is the intersection through (beta1, beta2) of the two
    curves b2 = b1/(r1-1-b1) and b2 = (r2-1) b1/(1+b1); in closed form
    r1 = 1 + beta1 + beta1/beta2 and r2 = 1 + beta2 + beta2/beta1.  The
    returned pair is verified against the full inequality chain
    0 <= r1-2 <= beta1 <= beta2 <= r2-2 < alpha_max and
    r1 beta2 <= r1 r2 - r1 - r2 <= r2 beta1.
    """
    amax = alpha_max(d)
    if not (0.0 < beta1 <= beta2):
        raise ExponentInfeasible(
            f"need 0 < beta1 <= beta2, got ({beta1}, {beta2})", violated="0 < beta1 <= beta2"
        )
    if beta2 >= amax:
        raise ExponentInfeasible(
            f"beta2 = {beta2} >= alpha_max = {amax}", violated="beta2 < alpha_max"
        )
    if d >= 3 and beta2 >= amax / 2.0:
        bound = beta2 / (amax + 1.0 - beta2)
        if not beta1 > bound:
            raise ExponentInfeasible(
                f"supercritical branch requires beta1 > beta2/(alpha_max+1-beta2) "
                f"= {bound:.6g}, got beta1 = {beta1}",
                violated="beta1 > beta2/(alpha_max+1-beta2)",
            )
    else:
        bound = beta2 / (1.0 + beta2)
        if not beta1 >= bound:
            raise ExponentInfeasible(
                f"requires beta1 >= beta2/(1+beta2) = {bound:.6g}, "
                f"got beta1 = {beta1}",
                violated="beta1 >= beta2/(1+beta2)",
            )

    r1 = max(1.0 + beta1 + beta1 / beta2, 2.0)
    r2 = 1.0 + beta2 + beta2 / beta1
    b1 = r1 - 1.0 - r1 / r2
    b2 = r2 - 1.0 - r2 / r1
    tol = 1e-12
    chain = (
        -tol <= r1 - 2.0
        and r1 - 2.0 <= beta1 + tol
        and beta2 <= r2 - 2.0 + tol
        and (r2 - 2.0 < amax)
        and r1 * beta2 <= r1 * r2 - r1 - r2 + tol
        and r1 * r2 - r1 - r2 <= r2 * beta1 + tol
    )
    if not chain:
        raise ExponentInfeasible(
            f"selected (r1, r2) = ({r1}, {r2}) violates the exponent chain",
            violated="exponent chain",
        )
    return ExponentSelection(r1=r1, r2=r2, b1=b1, b2=b2)


# -- source-term decay -------------------------------------------------------


@dataclass
class SourceDecayReport:
    t: np.ndarray
    inf_norms: np.ndarray
    dual_norms: np.ndarray
    fit_inf: DecayFit | None
    fit_dual: DecayFit | None
    rate_ratio: float | None     # fitted rate / (sqrt(omega_star) * v_star)
    underflow_time: float | None


def fit_source_decay(
    train: TrainSpec,
    grid,
    t_grid,
    rel_window=(1e-10, 5e-2),
    mask=None,
) -> SourceDecayReport:
    """Exponential fit of ||H(t)|| in sup and dual-Lebesgue norms.

    The dual exponent is p/(p-1) for the train's contraction exponent p.
    When H underflows everywhere (e.g. a single exact soliton) the underflow
    time is reported instead of a fit.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    p = train.nonlinearity.lebesgue_exponent
    q = p / (p - 1.0)
    inf_norms = np.empty_like(t_grid)
    dual_norms = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        h = source_term(train, grid, t)
        inf_norms[i] = norm_lp(h.values, math.inf, grid=grid, mask=mask)
        dual_norms[i] = norm_lp(h.values, q, grid=grid, mask=mask)

    top = float(inf_norms.max(initial=0.0))
    if top < 1e-250:
        return SourceDecayReport(
            t=t_grid, inf_norms=inf_norms, dual_norms=dual_norms,
            fit_inf=None, fit_dual=None, rate_ratio=None,
            underflow_time=float(t_grid[int(np.argmax(inf_norms <= 1e-250))]),
        )
    window = (rel_window[0] * top, rel_window[1] * top)
    fit_inf = fit_time_decay(t_grid, inf_norms, value_window=window)
    dtop = float(dual_norms.max(initial=0.0))
    fit_dual = fit_time_decay(
        t_grid, dual_norms, value_window=(rel_window[0] * dtop, rel_window[1] * dtop)
    )
    ratio = None
    if len(train.components()) >= 2:
        rv = min_relative_velocity(train)
        if rv.v_star > 0:
            ratio = fit_inf.rate / (math.sqrt(rv.omega_star) * rv.v_star)
    return SourceDecayReport(
        t=t_grid, inf_norms=inf_norms, dual_norms=dual_norms,
        fit_inf=fit_inf, fit_dual=fit_dual, rate_ratio=ratio, underflow_time=None,
    )
