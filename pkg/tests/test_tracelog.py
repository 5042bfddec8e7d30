import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from effaction import (
    FrequencyProfile,
    PathGrid,
    eig_logdet_ratio,
    gamma1_expansion,
    gamma1_numeric,
    gy_logdet_ratio,
    omega_sq,
    v1_momentum_check,
)
from effaction.errors import ConsistencyError, NonPositiveFrequencyError, NotPositiveDefiniteError
from effaction.tracelog import bump_path, compare_bump, loglog_slope, s_for_epsilon


def sinh_ratio(omega, omega0, T):
    """log of [sinh(Omega T)/Omega] / [sinh(Omega0 T)/Omega0], overflow-free."""

    def log_sinh_over(w):
        return w * T + math.log1p(-math.exp(-2 * w * T)) - math.log(2 * w)

    return log_sinh_over(omega) - log_sinh_over(omega0)


def bump_profile(amplitude, s=1.0, n=2001, T=20.0, omega0_sq=1.0):
    return FrequencyProfile.from_function(
        lambda t: omega0_sq + amplitude / np.cosh(s * t) ** 2, -T / 2, T / 2, n, omega0_sq
    )


def ivp_logdet_ratio(w2, T, omega0_sq):
    """Independent Gelfand-Yaglom value with an adaptive high-order integrator."""

    def end_value(f):
        sol = solve_ivp(lambda t, y: [y[1], f(t) * y[0]], (-T / 2, T / 2), [0.0, 1.0],
                        method="DOP853", rtol=1e-12, atol=1e-14)
        return sol.y[0, -1]

    return math.log(end_value(w2) / end_value(lambda t: omega0_sq))


class TestGelfandYaglom:
    def test_identical_operators(self):
        prof = FrequencyProfile.from_function(lambda t: np.full_like(t, 2.0), 0, 5, 101, 2.0)
        assert gy_logdet_ratio(prof) == 0.0

    def test_constant_frequency_closed_form(self):
        prof = FrequencyProfile.from_function(lambda t: np.full_like(t, 1.69), 0, 10, 4001, 1.0)
        assert_allclose(gy_logdet_ratio(prof), sinh_ratio(1.3, 1.0, 10.0), rtol=1e-8)

    def test_large_horizon_does_not_overflow(self):
        # Omega T = 2600 would overflow exp without log scaling
        prof = FrequencyProfile.from_function(lambda t: np.full_like(t, 4.0), 0, 1300, 130001, 1.0)
        assert_allclose(gy_logdet_ratio(prof), sinh_ratio(2.0, 1.0, 1300.0), rtol=1e-8)

    def test_bump_against_adaptive_integrator(self):
        prof = bump_profile(0.3)
        ref = ivp_logdet_ratio(lambda t: 1.0 + 0.3 / np.cosh(t) ** 2, 20.0, 1.0)
        assert_allclose(gy_logdet_ratio(prof), ref, rtol=1e-8)

    def test_bump_positive_and_increasing_in_amplitude(self):
        values = [gy_logdet_ratio(bump_profile(a)) for a in (0.01, 0.05, 0.2)]
        lattice = [eig_logdet_ratio(bump_profile(a)) for a in (0.01, 0.05, 0.2)]
        assert 0 < values[0] < values[1] < values[2]
        assert_allclose(values, lattice, rtol=1e-4)

    def test_linear_interpolation_is_second_order(self):
        ref = ivp_logdet_ratio(lambda t: 1.0 + 0.5 / np.cosh(t) ** 2, 20.0, 1.0)
        errors = [abs(gy_logdet_ratio(bump_profile(0.5, n=n), interpolation="linear") - ref) for n in (201, 401, 801)]
        assert_allclose(errors[0] / errors[1], 4.0, rtol=0.2)
        assert_allclose(errors[1] / errors[2], 4.0, rtol=0.2)

    def test_negative_dip_that_crosses_zero_is_rejected(self):
        # a deep well gives a Dirichlet operator with negative modes; y(tau) changes sign
        prof = bump_profile(-30.0)
        with pytest.raises(NotPositiveDefiniteError):
            gy_logdet_ratio(prof)


class TestProfile:
    def test_needs_positive_reference(self):
        with pytest.raises(NonPositiveFrequencyError):
            FrequencyProfile(0.0, 0.1, np.ones(10), 0.0)

    def test_needs_four_points(self):
        with pytest.raises(ValueError):
            FrequencyProfile(0.0, 0.1, np.ones(3), 1.0)

    def test_endpoint_mismatch(self):
        prof = FrequencyProfile.from_function(lambda t: 1.0 + t, 0, 1, 11, 1.0)
        assert_allclose(prof.endpoint_mismatch, 1.0)
        assert prof.horizon == pytest.approx(1.0)


class TestLattice:
    def test_identical_operators(self):
        prof = FrequencyProfile.from_function(lambda t: np.full_like(t, 2.0), 0, 5, 101, 2.0)
        assert eig_logdet_ratio(prof) == 0.0

    def test_constant_frequency_matches_gelfand_yaglom(self):
        prof = FrequencyProfile.from_function(lambda t: np.full_like(t, 1.69), 0, 10, 4001, 1.0)
        assert abs(eig_logdet_ratio(prof) - gy_logdet_ratio(prof)) <= 1e-4
        assert abs(eig_logdet_ratio(prof) - sinh_ratio(1.3, 1.0, 10.0)) <= 1e-4

    def test_eigen_backend_matches_ldl(self):
        prof = bump_profile(0.4, n=801)
        assert_allclose(eig_logdet_ratio(prof, method="eigen"), eig_logdet_ratio(prof), rtol=1e-9)

    def test_first_non_positive_pivot_is_reported(self):
        with pytest.raises(NotPositiveDefiniteError) as info:
            eig_logdet_ratio(bump_profile(-30.0))
        assert info.value.index >= 0

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            eig_logdet_ratio(FrequencyProfile(0.0, 0.1, np.ones(10), 1.0))

    @pytest.mark.parametrize(
        "w2",
        [
            lambda t: 1.0 + 0.5 / np.cosh(t) ** 2,
            lambda t: 1.0 + 0.3 * np.exp(-(t**2)) * np.sin(2 * t),
            lambda t: 2.25 - 1.2 / np.cosh(0.5 * t) ** 2,
        ],
    )
    def test_methods_agree_at_second_order(self, w2):
        omega0_sq = float(w2(np.array(-15.0)))
        errors = []
        for n in (401, 801, 1601):
            prof = FrequencyProfile.from_function(w2, -15, 15, n, omega0_sq)
            errors.append(abs(gy_logdet_ratio(prof) - eig_logdet_ratio(prof)))
        assert_allclose(errors[0] / errors[1], 4.0, rtol=0.2)
        assert_allclose(errors[1] / errors[2], 4.0, rtol=0.2)


class TestGamma1:
    def test_numeric_is_half_the_ratio(self):
        prof = bump_profile(0.2)
        assert gamma1_numeric(prof) == 0.5 * gy_logdet_ratio(prof)
        assert gamma1_numeric(prof.reference()) == 0.0

    def test_constant_frequency_large_horizon(self):
        w, w0, T = 1.3, 1.0, 30.0
        prof = FrequencyProfile.from_function(lambda t: np.full_like(t, w * w), 0, T, 6001, w0 * w0)
        asymptotic = (w - w0) * T / 2 + 0.5 * math.log(w0 / w)
        assert abs(gamma1_numeric(prof) - asymptotic) < 1e-8

    def test_expansion_of_constant_path_at_reference(self, standard):
        path = PathGrid(0.0, 0.1, np.zeros(50))
        assert gamma1_expansion(standard, path, 1.0) == 0.0

    def test_static_limit(self, standard):
        path = bump_path(0.0, 1.0, 0.01, 5000.0, 20001)
        with_z1 = gamma1_expansion(standard, path, 1.0)
        static = gamma1_expansion(standard, path, 1.0, include_z1=False)
        direct = np.trapezoid(0.5 * (np.sqrt(omega_sq(standard, path.values)) - 1.0), dx=path.dtau)
        assert static == pytest.approx(direct, rel=1e-14)
        assert abs(with_z1 - static) < 1e-3 * abs(static)

    def test_slow_bump_matches_numeric(self, standard):
        res = compare_bump(standard, 0.0, 1.0, s_for_epsilon(standard, 0.0, 1.0, 0.1), n=20001)
        assert res.max_epsilon == pytest.approx(0.1, rel=1e-3)
        assert res.rel_error < 0.1**2
        assert res.rel_error < res.rel_error_no_z1

    def test_endpoint_mismatch_is_an_error(self, standard):
        path = PathGrid.from_function(lambda t: 0.5 + 0 * t, 0, 1, 11)
        with pytest.raises(ConsistencyError):
            gamma1_expansion(standard, path, 1.0)

    def test_non_positive_frequency(self):
        from effaction import ModelSpec

        spec = ModelSpec.from_strings("exp(2*x)", "x")
        with pytest.raises(NonPositiveFrequencyError):
            gamma1_expansion(spec, PathGrid(0.0, 0.1, np.zeros(5)), 1.0)


class TestMomentumIntegral:
    def test_equal_frequencies(self):
        assert v1_momentum_check(1.0, 1.0) == 0.0

    @pytest.mark.parametrize("omega, expected", [(2.0, 0.5), (0.25, -0.375)])
    def test_closed_form(self, omega, expected):
        assert abs(v1_momentum_check(omega**2, 1.0) - expected) <= 1e-8

    @given(st.floats(1e-2, 1e2), st.floats(1e-2, 1e2))
    @settings(max_examples=50, deadline=None)
    def test_matches_half_frequency_difference(self, w2, w02):
        assert abs(v1_momentum_check(w2, w02) - 0.5 * (math.sqrt(w2) - math.sqrt(w02))) <= 1e-8

    def test_non_positive(self):
        with pytest.raises(NonPositiveFrequencyError):
            v1_momentum_check(-1.0, 1.0)


class TestProperties:
    @given(st.floats(0.01, 0.5), st.floats(0.01, 0.5))
    @settings(max_examples=25, deadline=None)
    def test_monotone_in_the_profile(self, a, extra):
        low = gy_logdet_ratio(bump_profile(a, n=801))
        high = gy_logdet_ratio(bump_profile(a + extra, n=801))
        assert high > low

    @given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
    @settings(max_examples=25, deadline=None)
    def test_reference_independence(self, w0_sq, w1_sq):
        target = lambda t: 1.0 + 0.5 / np.cosh(t) ** 2  # noqa: E731
        args = (-10, 10, 2001)
        direct = gy_logdet_ratio(FrequencyProfile.from_function(target, *args, w0_sq))
        via = gy_logdet_ratio(FrequencyProfile.from_function(target, *args, w1_sq)) + gy_logdet_ratio(
            FrequencyProfile.from_function(lambda t: np.full_like(t, w1_sq), *args, w0_sq)
        )
        assert abs(direct - via) <= 1e-8

    def test_adiabatic_orders(self, standard):
        """With Z1 the residual error is fourth order in eps, without it second order."""
        eps = [0.05, 0.1, 0.2]
        results = [compare_bump(standard, 0.0, 1.0, s_for_epsilon(standard, 0.0, 1.0, e), with_eigen=False) for e in eps]
        achieved = [r.max_epsilon for r in results]
        assert_allclose(achieved, eps, rtol=1e-3)
        assert abs(loglog_slope(achieved, [r.rel_error for r in results]) - 4.0) <= 0.5
        assert abs(loglog_slope(achieved, [r.rel_error_no_z1 for r in results]) - 2.0) <= 0.3

    def test_z1_is_necessary(self, standard):
        res = compare_bump(standard, 0.0, 1.0, s_for_epsilon(standard, 0.0, 1.0, 0.2), with_eigen=False)
        assert res.rel_error_no_z1 >= 5 * res.rel_error

    def test_zero_amplitude(self, standard):
        res = compare_bump(standard, 0.0, 0.0, 0.5, n=2001)
        assert res.gamma1_numeric == res.gamma1_eigen == res.gamma1_expansion == 0.0
