import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from gpvortex import analytic
from gpvortex.errors import DomainError
from gpvortex.params import BIG_OMEGA_FRAME, OMEGA_FRAME, ReducedParams

s_st = st.floats(2.1, 10.0)
gamma_st = st.floats(0.1, 1.0)


# ---------------------------------------------------------------- potentials

class TestW:
    @pytest.mark.parametrize("x,expected", [(1.0, 0.0), (0.0, 0.25), (2.0, 2.25)])
    def test_values(self, x, expected):
        assert analytic.eval_W(x, 4.0) == pytest.approx(expected, abs=1e-15)

    def test_negative_radius(self):
        with pytest.raises(DomainError):
            analytic.eval_W(-0.1, 4.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 5.0), s_st)
    def test_nonnegative(self, x, s):
        assert analytic.eval_W(x, s) >= -1e-15

    @settings(max_examples=100, deadline=None)
    @given(s_st, st.floats(-0.2, 0.2))
    def test_taylor_residual_cubic(self, s, d):
        x = 1.0 + d
        resid = abs(analytic.eval_W(x, s) - 0.5 * (s - 2) * d * d)
        # third derivative of W is (s-1)(s-2) x^(s-3)
        c3 = (s - 1) * (s - 2) * max(0.8 ** (s - 3), 1.2 ** (s - 3)) / 6
        assert resid <= c3 * abs(d) ** 3 + 1e-15

    def test_vectorized_matches_scalar(self):
        x = np.linspace(0, 3, 31)
        vec = analytic.eval_W(x, 3.5)
        assert np.allclose(vec, [analytic.eval_W(float(t), 3.5) for t in x], rtol=0, atol=1e-15)


class TestU:
    def test_zero_at_one_for_integer_speed(self):
        assert analytic.eval_U(1.0, 1000.0, 4.0, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_quadratic_near_one(self):
        a2 = 4 + 1.0 * 2
        u = analytic.eval_U(1.05, 1000.0, 4.0, 1.0)
        assert u == pytest.approx(0.5 * a2 * 0.05**2, abs=5 * 0.05**3)

    def test_fractional_speed_at_one(self):
        w = 1000.5
        b = w - math.floor(w)
        assert analytic.eval_U(1.0, w, 4.0, 1.0) == pytest.approx(0.5 * (b / w) ** 2, rel=1e-10)

    def test_expanded_formula(self):
        x, w, s, g = 0.93, 417.3, 3.0, 0.7
        a = math.floor(w) / w
        expanded = (0.5 * a * a / x**2 + 0.5 * x * x + g * (x**s - 1) / s
                    - 0.5 * g * (x * x - 1) - a)
        assert analytic.eval_U(x, w, s, g) == pytest.approx(expanded, rel=1e-12)

    def test_singular_at_origin(self):
        with pytest.raises(DomainError):
            analytic.eval_U(0.0, 10.0, 4.0, 1.0)

    def test_needs_omega_at_least_one(self):
        with pytest.raises(DomainError):
            analytic.eval_U(1.0, 0.5, 4.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.05, 4.0), st.floats(1.0, 1e5), s_st, gamma_st)
    def test_nonnegative(self, x, w, s, g):
        assert analytic.eval_U(x, w, s, g) >= -1e-14

    @pytest.mark.parametrize("s,g", [(4.0, 1.0), (3.0, 0.5), (6.0, 0.8)])
    def test_curvature_is_alpha_squared(self, s, g):
        w = 1e6
        h = 1e-3
        pot = analytic.EffectivePotentials(s, g, w)
        second = (pot.U(1 + h) - 2 * pot.U(1.0) + pot.U(1 - h)) / h**2
        assert second == pytest.approx(pot.alpha**2, rel=1e-5)


# ---------------------------------------------------------------- critical speeds

class TestCriticalSpeeds:
    def test_omega_c_oracle(self):
        assert analytic.omega_c(0.1, 4.0, 1.0) == pytest.approx(41.89755987820824956757, rel=1e-13)

    def test_omega_c_gamma_scaling(self):
        assert analytic.omega_c(0.1, 4.0, 4.0) == pytest.approx(0.5 * analytic.omega_c(0.1, 4.0, 1.0))

    def test_Omega_c_oracle(self):
        assert analytic.Omega_c(0.1, 4.0, 1.0) == pytest.approx(13.81976597885341917061, rel=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-3, 1.0), s_st, gamma_st)
    def test_Omega_c_times_eps_is_eps_free(self, eps, s, g):
        assert eps * analytic.Omega_c(eps, s, g) == pytest.approx(analytic.Omega_c(1.0, s, g), rel=1e-12)

    @pytest.mark.parametrize("s,g", [(4.0, 1.0), (3.0, 0.6), (8.0, 0.9)])
    def test_hole_threshold_opens_the_hole(self, s, g):
        wc = analytic.omega_hole_threshold(0.1, s, g)
        below = analytic.tf_profile(ReducedParams(0.1, s, g, OMEGA_FRAME, 0.9999 * wc))
        above = analytic.tf_profile(ReducedParams(0.1, s, g, OMEGA_FRAME, 1.0001 * wc))
        at = analytic.tf_profile(ReducedParams(0.1, s, g, OMEGA_FRAME, wc))
        assert below.x_in == 0.0
        assert above.x_in > 0.0
        assert at.x_in < 1e-6

    def test_printed_omega_c_lies_past_the_hole_threshold(self):
        wc = analytic.omega_c(0.1, 4.0, 1.0)
        assert wc > analytic.omega_hole_threshold(0.1, 4.0, 1.0)
        assert analytic.tf_profile(ReducedParams(0.1, 4.0, 1.0, OMEGA_FRAME, wc)).x_in > 0

    def test_third_speed_scale(self):
        sc = analytic.third_speed_scale(0.1, 4.0)
        assert sc.exponent == pytest.approx(-4 / 3)
        assert sc.scale == pytest.approx(0.1 ** (-4 / 3))
        assert sc.omega_frame_exponent == -4.0
        assert analytic.third_speed_scale(0.1, 1e6).exponent == pytest.approx(-4.0, abs=1e-4)

    def test_bad_exponent(self):
        with pytest.raises(DomainError):
            analytic.omega_c(0.1, 2.0, 1.0)


# ---------------------------------------------------------------- Gaussian

class TestGaussian:
    def test_peak_value(self):
        g = analytic.gaussian_profile(math.sqrt(6.0))
        assert g(0.0) == pytest.approx(0.93968314736860264654, rel=1e-14)

    @pytest.mark.parametrize("a", [0.3, 1.0, math.sqrt(6.0), 17.0])
    def test_unit_norm_and_oscillator_energy(self, a):
        g = analytic.gaussian_profile(a)
        norm = integrate.quad(lambda y: g(y) ** 2, -np.inf, np.inf, epsabs=1e-14)[0]
        assert norm == pytest.approx(1.0, abs=1e-12)
        assert g.oscillator_energy() == pytest.approx(a / 2, rel=1e-10)

    def test_alpha_positive(self):
        with pytest.raises(DomainError):
            analytic.gaussian_profile(0.0)


# ---------------------------------------------------------------- Thomas-Fermi

def tf_functional(rp, rho, x):
    """Direct quadrature of the TF functional on a radial grid (independent of the module)."""
    eps, s, g, w = rp.eps, rp.s, rp.gamma, rp.speed
    if rp.frame == OMEGA_FRAME:
        dens = (x**s * rho + rho**2 - 0.5 * g * eps**2 * w**2 * x**2 * rho) / eps**2
    else:
        dens = rho**2 / eps**2 + g * w**2 * analytic.eval_W(x, s) * rho
    return integrate.simpson(2 * np.pi * x * dens, x=x)


class TestTF:
    def test_static_trap_closed_form(self):
        tf = analytic.tf_profile(ReducedParams(0.1, 4.0, 1.0, OMEGA_FRAME, 0.0))
        assert tf.x_out == pytest.approx((3 / math.pi) ** (1 / 6), rel=1e-12)
        assert tf.mu_tf == pytest.approx((3 / math.pi) ** (2 / 3) / 0.01, rel=1e-12)
        # (3/5)(3/pi)^(2/3)/eps^2, symbolic integration
        assert tf.energy() == pytest.approx(58.18336548263837327940, rel=1e-10)

    @pytest.mark.parametrize("rp", [
        ReducedParams(0.1, 4.0, 1.0, OMEGA_FRAME, 10.0),
        ReducedParams(0.1, 4.0, 1.0, OMEGA_FRAME, 30.0),
        ReducedParams(0.05, 3.0, 0.7, BIG_OMEGA_FRAME, 100.0),
        ReducedParams(0.1, 6.0, 1.0, BIG_OMEGA_FRAME, 5.0),
    ])
    def test_profile_invariants(self, rp):
        tf = analytic.tf_profile(rp)
        assert tf.mass() == pytest.approx(1.0, abs=1e-10)
        assert abs(tf.density(tf.x_out)) < 1e-10
        if tf.x_in > 0:
            assert abs(tf.density(tf.x_in)) < 1e-10
        x = np.linspace(0, 2 * tf.x_out, 1000)
        assert np.all(tf.density(x) >= 0)
        assert abs(analytic.tf_chemical_identity_gap(tf)) < 1e-8 * abs(tf.mu_tf)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.02, 0.5), s_st, gamma_st, st.floats(0.05, 50.0))
    def test_density_is_clipped_bracket(self, eps, s, g, w):
        rp = ReducedParams(eps, s, g, BIG_OMEGA_FRAME, w)
        tf = analytic.tf_profile(rp)
        x = np.linspace(0, 1.5 * tf.x_out, 1000)
        bracket = 0.5 * eps**2 * (tf.mu_tf - g * w**2 * analytic.eval_W(x, s))
        assert np.array_equal(tf.density(x) > 0, bracket > 0)
        assert np.allclose(tf.density(x), np.maximum(bracket, 0), rtol=0, atol=1e-14)

    def test_monotone_in_speed(self):
        profs = [analytic.tf_profile(ReducedParams(0.1, 4.0, 1.0, OMEGA_FRAME, w))
                 for w in np.linspace(1.0, 60.0, 12)]
        xin = [p.x_in for p in profs]
        xout = [p.x_out for p in profs]
        mu = [p.mu_tf for p in profs]
        # the support shrinks once the hole has opened
        width = [p.x_out - p.x_in for p in profs if p.x_in > 0]
        assert len(width) > 3
        assert all(b >= a for a, b in zip(xin, xin[1:]))
        assert all(b > a for a, b in zip(xout, xout[1:]))
        assert all(b < a for a, b in zip(mu, mu[1:]))
        assert all(b < a for a, b in zip(width, width[1:]))

    def test_edge_width_asymptotics(self):
        errs = []
        for ew in (1e2, 1e3, 1e4):
            rp = ReducedParams(1.0, 4.0, 1.0, BIG_OMEGA_FRAME, ew)
            tf = analytic.tf_profile(rp)
            pred = analytic.tf_edge_width_asymptotic(rp)
            e = max(abs((1 - tf.x_in) / pred - 1), abs((tf.x_out - 1) / pred - 1))
            assert e < 3 * ew ** (-2 / 3)
            errs.append(e)
        assert errs[0] > errs[1] > errs[2]

    def test_energy_scaling_bracket(self):
        ratios = []
        for w in np.geomspace(100, 1000, 5):
            rp = ReducedParams(0.1, 4.0, 1.0, BIG_OMEGA_FRAME, w)
            ratios.append(analytic.tf_profile(rp).energy() / (0.1 ** (-4 / 3) * w ** (2 / 3)))
        assert max(ratios) / min(ratios) < 1.5

    @pytest.mark.parametrize("rp", [
        ReducedParams(0.1, 4.0, 1.0, OMEGA_FRAME, 15.0),
        ReducedParams(0.1, 4.0, 1.0, BIG_OMEGA_FRAME, 30.0),
    ])
    def test_minimality_against_perturbations(self, rp):
        tf = analytic.tf_profile(rp)
        x = np.linspace(0, 1.6 * tf.x_out, 6001)
        e0 = tf_functional(rp, tf.density(x), x)
        assert e0 == pytest.approx(tf.energy(), rel=1e-6)
        rng = np.random.default_rng(3)
        for _ in range(20):
            bump = np.zeros_like(x)
            for _ in range(3):
                c, wdt, amp = rng.uniform(0, 1.5 * tf.x_out), rng.uniform(0.05, 0.3), rng.normal()
                bump += amp * np.exp(-((x - c) / wdt) ** 2)
            rho = np.maximum(tf.density(x) + 0.2 * bump * tf.density(x).max(), 0)
            rho /= integrate.simpson(2 * np.pi * x * rho, x=x)
            assert tf_functional(rp, rho, x) >= e0 - 1e-9
