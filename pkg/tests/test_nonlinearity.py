import numpy as np
import pytest
from scipy import integrate

from solitonforge import nonlinearity as nl


def test_eval_f_power_examples():
    spec = nl.power(2.0)
    assert nl.eval_f(spec, 1.0 + 0j) == pytest.approx(1.0)
    assert nl.eval_f(spec, 0.0 + 0j) == 0.0


def test_eval_f_combined_direct_arithmetic():
    spec = nl.combined(1.0, 2.0)
    # g(4) = 4 - 16 = -12, times z = 2
    assert nl.eval_f(spec, 2.0 + 0j) == pytest.approx(-24.0)


def test_primitives_against_quadrature_oracle():
    spec = nl.combined(1.0, 2.0)
    # oracle: integrate f(t) = t^3 - t^5 directly
    oracle, _ = integrate.quad(lambda t: t**3 - t**5, 0.0, 1.0)
    vals = nl.eval_primitives(spec, 1.0)
    assert vals.big_f == pytest.approx(oracle, rel=1e-10)
    assert vals.big_f == pytest.approx(1.0 / 12.0, rel=1e-12)


def test_primitives_power_and_zero():
    spec = nl.power(2.0)  # g(s) = s
    vals = nl.eval_primitives(spec, 1.0)
    assert vals.big_g == pytest.approx(0.5)
    zero = nl.eval_primitives(spec, 0.0)
    assert zero.big_f == 0.0 and zero.big_g == 0.0


def test_big_f_matches_quadrature_for_all_kinds():
    specs = [nl.power(2.0), nl.power(1.3), nl.combined(1.0, 2.0), nl.gross_pitaevskii()]
    for spec in specs:
        for phi in (0.3, 0.9, 1.7):
            oracle, _ = integrate.quad(lambda t: spec.f(t).real, 0.0, phi)
            assert spec.big_f(phi) == pytest.approx(oracle, rel=1e-8), spec.kind


def _fd_wirtinger(spec, z, h=1e-6):
    # central finite differences in Re/Im, converted to Wirtinger pairs
    fx = (spec.f(z + h) - spec.f(z - h)) / (2 * h)
    fy = (spec.f(z + 1j * h) - spec.f(z - 1j * h)) / (2 * h)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def test_wirtinger_power_examples():
    spec = nl.power(2.0)
    pair = nl.eval_wirtinger(spec, 1.0 + 0j)
    assert pair.f_z == pytest.approx(2.0)
    assert pair.f_zbar == pytest.approx(1.0)
    pair_i = nl.eval_wirtinger(spec, 1j)
    assert pair_i.f_zbar == pytest.approx(-1.0)


def test_wirtinger_matches_finite_differences():
    rng = np.random.default_rng(7)
    for spec in (nl.power(2.0), nl.power(1.4), nl.combined(1.0, 2.0), nl.gross_pitaevskii()):
        for _ in range(20):
            z = rng.uniform(0.1, 10.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            fz_o, fzb_o = _fd_wirtinger(spec, z)
            pair = nl.eval_wirtinger(spec, z)
            assert abs(pair.f_z - fz_o) < 1e-6 * max(1.0, abs(fz_o))
            assert abs(pair.f_zbar - fzb_o) < 1e-6 * max(1.0, abs(fzb_o))


def test_wirtinger_chain_rule_identity_on_reals():
    # f_z + f_zbar equals d/dphi f(phi) on the positive real axis
    for spec in (nl.power(2.0), nl.combined(1.0, 2.0)):
        for phi in (0.2, 1.0, 3.0):
            pair = nl.eval_wirtinger(spec, phi + 0j)
            assert pair.f_z + pair.f_zbar == pytest.approx(
                spec.f_prime_real(phi), rel=1e-12
            )


def test_wirtinger_origin_limit_and_flag():
    sub = nl.power(0.5)
    pair = nl.eval_wirtinger(sub, 0.0 + 0j)
    assert pair.f_z == 0.0 and pair.f_zbar == 0.0
    assert pair.singular_origin
    smooth = nl.eval_wirtinger(nl.power(2.0), 0.0 + 0j)
    assert not smooth.singular_origin
    gp = nl.eval_wirtinger(nl.gross_pitaevskii(), 0.0 + 0j)
    assert gp.f_z == pytest.approx(1.0)


def test_gauge_covariance_random_samples():
    rng = np.random.default_rng(11)
    for spec in (nl.power(2.0), nl.combined(1.0, 2.0), nl.gross_pitaevskii()):
        z = rng.uniform(0.05, 5.0, 64) * np.exp(1j * rng.uniform(0, 2 * np.pi, 64))
        theta = rng.uniform(0, 2 * np.pi, 64)
        lhs = spec.f(np.exp(1j * theta) * z)
        rhs = np.exp(1j * theta) * spec.f(z)
        assert np.max(np.abs(lhs - rhs)) < 1e-13 * np.max(np.abs(rhs))
        assert np.max(np.abs((spec.f(z) * np.conj(z)).imag)) < 1e-12


def test_validate_bounds_power_passes():
    report = nl.validate_bounds(nl.power(2.0))
    assert report.passed
    assert np.isfinite(report.c_empirical)
    assert report.exponents == (1.0, 1.0)


def test_validate_bounds_gp_fails_at_origin():
    report = nl.validate_bounds(nl.gross_pitaevskii())
    assert not report.passed
    assert report.g_zero == pytest.approx(1.0)


def test_validate_bounds_focusing_scan():
    report = nl.validate_bounds(nl.combined(1.0, 2.0), omega0=0.1)
    assert report.passed
    assert report.focusing.found
    # G(1) = 1/6 > 0.1, so s0 = 1 is a witness
    spec = nl.combined(1.0, 2.0)
    assert spec.big_g(1.0) == pytest.approx(1.0 / 6.0)
    assert report.focusing.margin > 0


def test_validate_bounds_gp_no_focusing_at_omega_one():
    report = nl.validate_bounds(nl.gross_pitaevskii(), omega0=1.0)
    assert not report.focusing.found


def test_custom_tabulated_tracks_power():
    s = np.linspace(0.0, 9.0, 400)
    spec = nl.custom(s, s, alpha1=1.0, alpha2=1.0)  # tabulated g(s) = s
    ref = nl.power(2.0)
    for v in (0.2, 1.0, 2.5):
        assert spec.g(v) == pytest.approx(ref.g(v), rel=1e-9)
        assert spec.big_g(v) == pytest.approx(ref.big_g(v), rel=1e-8)
    report = nl.validate_bounds(spec, s_grid=np.logspace(-4, 0.9, 100))
    assert report.passed


def test_spec_validation_rejects_bad_exponents():
    with pytest.raises(ValueError):
        nl.power(-1.0)
    with pytest.raises(ValueError):
        nl.combined(2.0, 1.0)
    with pytest.raises(ValueError):
        nl.NonlinearitySpec("nope")
