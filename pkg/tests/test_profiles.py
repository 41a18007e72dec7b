import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import fsolve

from solitonforge import nonlinearity as nl
from solitonforge import profiles as pf
from solitonforge.errors import (
    NoGroundState,
    NoSignChange,
    SideConditionFailed,
    UnderResolved,
    WindowTooNoisy,
)

CUBIC = nl.power(2.0)
CQ = nl.combined(1.0, 2.0)
GP = nl.gross_pitaevskii()


def _spectral_residual(profile, spec, dx=0.05):
    # independent oracle: periodized spectral second derivative on a coarse grid
    n = int(round(profile.extent / dx))
    x = np.arange(-n, n) * dx
    phi = profile.eval(x)
    k = 2.0 * np.pi * np.fft.fftfreq(len(x), d=dx)
    d2 = np.fft.ifft(-(k**2) * np.fft.fft(phi)).real
    return np.max(np.abs(-d2 + profile.omega * phi - spec.f(phi).real))


class TestGroundStateClosedForm:
    def test_cubic_peak_value(self):
        prof = pf.ground_state_closed_form(CUBIC, 1.0)
        mid = len(prof.x) // 2
        assert prof.x[mid] == 0.0
        assert prof.samples[mid] == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_residual_oracle(self):
        prof = pf.ground_state_closed_form(CUBIC, 1.0)
        assert prof.residual < 1e-8
        assert _spectral_residual(prof, CUBIC) < 1e-10

    def test_mass_quadrature_oracle(self):
        prof = pf.ground_state_closed_form(CUBIC, 1.0)
        mass = np.trapezoid(prof.samples**2, prof.x)
        assert mass == pytest.approx(4.0, abs=1e-10)

    def test_frequency_scaling(self):
        prof = pf.ground_state_closed_form(CUBIC, 4.0)
        mid = len(prof.x) // 2
        assert prof.samples[mid] == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-14)

    def test_fitted_decay_in_band(self):
        for omega in (1.0, 4.0):
            prof = pf.ground_state_closed_form(CUBIC, omega)
            root = math.sqrt(omega)
            assert 0.9 * root <= prof.fitted_decay <= root

    def test_rejects_non_power(self):
        with pytest.raises(ValueError):
            pf.ground_state_closed_form(CQ, 1.0)


class TestShooting:
    def test_matches_closed_form(self):
        shot = pf.shoot_bound_state(CUBIC, 1.0)
        exact = pf.ground_state_closed_form(CUBIC, 1.0)
        assert np.max(np.abs(shot.samples - exact.eval(shot.x))) < 1e-6

    def test_combined_low_frequency(self):
        prof = pf.shoot_bound_state(CQ, 0.1)
        assert np.all(prof.samples > 0.0)
        assert np.allclose(prof.samples, prof.samples[::-1], atol=1e-14)
        assert prof.residual < 1e-6
        assert abs(prof.fitted_decay - math.sqrt(0.1)) < 0.05 * math.sqrt(0.1)

    def test_plain_second_difference_residual(self):
        # invariant in its literal form: 3-point second differences on the
        # stored grid keep the ODE residual under 1e-6
        for prof, spec in (
            (pf.ground_state_closed_form(CUBIC, 1.0), CUBIC),
            (pf.shoot_bound_state(CQ, 0.1), CQ),
        ):
            phi, h = prof.samples, prof.dx
            d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / (h * h)
            res = np.abs(-d2 + prof.omega * phi[1:-1] - spec.f(phi[1:-1]).real)
            assert res.max() < 1e-6

    def test_gp_has_no_ground_state(self):
        with pytest.raises(NoGroundState):
            pf.shoot_bound_state(GP, 1.0)

    def test_under_resolved(self):
        with pytest.raises(UnderResolved):
            pf.shoot_bound_state(CUBIC, 1.0, X=6.0, tol=1e-10)


class TestPotentialRoot:
    def test_cubic(self):
        # z^4/4 = z^2/2 -> z = sqrt(2)
        assert pf.potential_root(CUBIC, 1.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_combined_at_quarter_frequency(self):
        # omega = 3/16 is the tangency case: double root at sqrt(3)/2
        assert pf.potential_root(CQ, 3.0 / 16.0) == pytest.approx(
            math.sqrt(3.0) / 2.0, abs=1e-8
        )

    def test_combined_transversal(self):
        root = pf.potential_root(CQ, 3.0 / 32.0)
        val = CQ.big_f(root) - 0.5 * (3.0 / 32.0) * root**2
        assert abs(val) < 1e-12

    def test_gp_zero_frequency(self):
        assert pf.potential_root(GP, 0.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_no_root_returns_zero(self):
        assert pf.potential_root(GP, 1.0) == 0.0


class TestKinkFrequency:
    def test_cubic_quintic_against_algebra(self):
        res = pf.find_kink_frequency(CQ)
        assert res.omega1 == pytest.approx(3.0 / 16.0, abs=1e-10)
        assert res.zeta1 == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-10)
        assert res.plateau_margin == pytest.approx(-0.75, abs=1e-8)
        assert res.exponential_decay_ok
        assert res.f_prime_zero_margin < 0.0

    def test_against_simultaneous_solve_oracle(self):
        # independent oracle: fsolve on the raw 2x2 system
        def system(zw):
            z, w = zw
            return [CQ.big_f(z) - 0.5 * w * z * z, CQ.f(z).real - w * z]

        sol = fsolve(system, [0.8, 0.2], full_output=False, xtol=1e-13)
        res = pf.find_kink_frequency(CQ)
        assert res.zeta1 == pytest.approx(sol[0], abs=1e-8)
        assert res.omega1 == pytest.approx(sol[1], abs=1e-8)

    def test_gp_special_case(self):
        res = pf.find_kink_frequency(GP)
        assert res.omega1 == 0.0
        assert res.is_gp

    def test_pure_power_has_no_kink(self):
        with pytest.raises((NoSignChange, SideConditionFailed)):
            pf.find_kink_frequency(CUBIC, bracket=(0.0, 10.0))


@pytest.fixture(scope="module")
def cq_kink():
    return pf.kink_profile(CQ, 3.0 / 16.0, X=60.0)


class TestKinkProfile:
    def test_normalisation(self, cq_kink):
        mid = len(cq_kink.x) // 2
        assert cq_kink.samples[mid] == pytest.approx(cq_kink.zeta1 / 2.0, rel=1e-14)

    def test_plateau_reached(self, cq_kink):
        assert abs(cq_kink.boundary_right - math.sqrt(3.0) / 2.0) < 1e-6
        assert abs(cq_kink.boundary_left) < 1e-6

    def test_first_integral_invariant(self, cq_kink):
        assert pf.first_integral_residual(cq_kink, CQ) < 1e-8

    def test_monotone(self, cq_kink):
        assert np.all(np.diff(cq_kink.samples) >= 0.0)

    def test_tail_rates(self, cq_kink):
        assert cq_kink.expected_decay_left == pytest.approx(math.sqrt(3.0) / 4.0, rel=1e-9)
        assert cq_kink.expected_decay_right == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-9)
        assert cq_kink.fitted_decay_left == pytest.approx(cq_kink.expected_decay_left, rel=1e-3)
        assert cq_kink.fitted_decay_right == pytest.approx(cq_kink.expected_decay_right, rel=1e-3)

    def test_second_order_ivp_oracle(self, cq_kink):
        # independently integrate -phi'' + w phi - f(phi) = 0 from the centre
        mid = len(cq_kink.x) // 2
        y0 = [cq_kink.samples[mid], cq_kink.phi_prime[mid]]

        def rhs(x, y):
            return (y[1], cq_kink.omega1 * y[0] - CQ.f(y[0]).real)

        span = 12.0
        sol = solve_ivp(rhs, (0.0, span), y0, method="DOP853", rtol=1e-12,
                        atol=1e-14, dense_output=True)
        sel = (cq_kink.x >= 0.0) & (cq_kink.x <= span)
        xs = cq_kink.x[sel][::25]
        mine = cq_kink.samples[sel][::25]
        assert np.max(np.abs(sol.sol(xs)[0] - mine)) < 1e-8

    def test_translation_invariance(self, cq_kink):
        other = pf.kink_profile(CQ, 3.0 / 16.0, X=60.0, phi0=0.3 * cq_kink.zeta1)
        half = cq_kink.zeta1 / 2.0
        shift = np.interp(half, other.samples, other.x)  # other crosses half here
        xs = np.linspace(-20.0, 20.0, 500)
        a = cq_kink.eval_extended(xs)
        b = other.eval_extended(xs + shift)
        assert np.max(np.abs(a - b)) < 1e-8

    def test_gp_matches_tanh_after_translation(self):
        kink = pf.kink_profile(GP, 0.0, X=40.0)
        # textbook zero-speed kink of the cubic defocusing equation
        shift = np.interp(0.0, kink.samples, kink.x)
        xs = np.linspace(-15.0, 15.0, 1000)
        target = np.tanh(xs * math.sqrt(2.0) / 2.0)
        assert np.max(np.abs(kink.closed_form(xs + shift) - target)) < 1e-6

    def test_gp_first_integral_with_anchor(self):
        kink = pf.kink_profile(GP, 0.0, X=40.0)
        assert kink.first_integral_constant == pytest.approx(0.25)
        assert pf.first_integral_residual(kink, GP) < 1e-8
        assert kink.fitted_decay_left == pytest.approx(math.sqrt(2.0), rel=1e-3)


class TestTailFit:
    def test_exact_exponential(self):
        x = np.linspace(0.0, 10.0, 400)
        fit = pf.fit_tail_decay(x, np.exp(-3.0 * x), window=(1.0, 9.0))
        assert fit.rate == pytest.approx(3.0, abs=1e-6)

    def test_sech_soliton_rate(self):
        prof = pf.ground_state_closed_form(CUBIC, 1.0)
        half = prof.x >= 0
        fit = pf.fit_tail_decay(prof.x[half], prof.samples[half], window=(6.0, 14.0))
        assert fit.rate == pytest.approx(1.0, abs=1e-3)

    def test_noisy_window_rejected(self):
        rng = np.random.default_rng(3)
        x = np.linspace(0.0, 10.0, 200)
        y = np.exp(-x) * np.exp(rng.normal(0.0, 1.5, x.size))
        with pytest.raises(WindowTooNoisy):
            pf.fit_tail_decay(x, y, window=(0.0, 10.0))


class TestAction:
    def test_cubic_soliton_value_stable_under_refinement(self):
        coarse = pf.ground_state_closed_form(CUBIC, 1.0, dx=0.004)
        fine = pf.ground_state_closed_form(CUBIC, 1.0, dx=0.002)
        s1, s2 = pf.action(coarse, CUBIC), pf.action(fine, CUBIC)
        assert s1 == pytest.approx(s2, abs=1e-4)
        # quadrature oracle on the closed form: 0.5*(4/3) + 0.5*4 - 0.5*(8/3)
        assert s2 == pytest.approx(4.0 / 3.0, abs=1e-6)

    def test_power_scaling_law(self):
        alpha, omega = 2.0, 2.5
        base = pf.ground_state_closed_form(CUBIC, 1.0)
        scaled = pf.ground_state_closed_form(CUBIC, omega)
        expected = omega ** (2.0 / alpha - 0.5 + 1.0) * pf.action(base, CUBIC)
        assert pf.action(scaled, CUBIC) == pytest.approx(expected, rel=1e-8)

    def test_zero_field(self):
        prof = pf.ground_state_closed_form(CUBIC, 1.0)
        zero = pf.BoundStateProfile(
            omega=1.0, x=prof.x, samples=np.zeros_like(prof.samples),
            phi_prime=np.zeros_like(prof.samples), fitted_decay=1.0,
            residual=0.0, method="test", dx=prof.dx, extent=prof.extent,
        )
        assert pf.action(zero, CUBIC) == 0.0
