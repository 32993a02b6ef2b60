"""Closed-form constants, bounds and the empirical scans that check them."""

import math

import pytest

from core.errors import ParameterError
from core.operators import soft_mellowmax
from core.theory import (Regime, alpha_contraction_range, contraction_range_for_spread, contraction_scan,
                         in_contraction_range, envelope_max, envelope_numeric_max, marl_bounds, mellowmax_bounds,
                         xi_and_performance_bounds, xi_scan)


class TestContractionRange:

    def test_closed_form(self):
        rng = contraction_range_for_spread(1.0, 4.0)
        assert rng.alpha_max == pytest.approx(math.exp(-4) / (1 - math.exp(-4)), rel=1e-12)
        assert rng.alpha_max == pytest.approx(0.018657, abs=1e-6)
        assert rng.alpha_min == pytest.approx(-1 / (1 - math.exp(-4)), rel=1e-12)
        assert rng.alpha_min == pytest.approx(-1.018657, abs=1e-6)

    def test_small_spread_allows_large_alpha(self):
        rng = contraction_range_for_spread(1.0, 0.01)
        assert rng.alpha_max == pytest.approx(1 / math.expm1(0.01), rel=1e-12)
        assert rng.alpha_max == pytest.approx(99.5008, abs=1e-3)

    def test_huge_spread_does_not_overflow(self):
        rng = contraction_range_for_spread(100.0, 1e4)
        assert rng.alpha_max == 0.0
        assert rng.alpha_min == pytest.approx(-100.0)

    def test_from_reward_bound(self):
        rng = alpha_contraction_range(1.0, 1.0, 0.5)
        assert rng.c == pytest.approx(4.0)
        assert rng == contraction_range_for_spread(1.0, 4.0)
        assert in_contraction_range(0.0, rng)
        assert in_contraction_range(rng.alpha_max, rng)
        assert not in_contraction_range(1.0, rng)

    @pytest.mark.parametrize("omega,c", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
    def test_invalid(self, omega, c):
        with pytest.raises(ParameterError):
            contraction_range_for_spread(omega, c)

    def test_gamma_domain(self):
        with pytest.raises(ParameterError):
            alpha_contraction_range(1.0, 1.0, 1.0)


class TestXiBounds:

    def test_alpha_at_least_omega(self):
        report = xi_and_performance_bounds(10.0, 5.0, 0.9, 10)
        assert report.regime is Regime.ALPHA_GE_OMEGA
        assert report.xi_bound == pytest.approx(math.log(5.5) / 5, rel=1e-12)
        assert report.xi_bound == pytest.approx(0.340949, abs=1e-6)
        assert report.performance_bound == pytest.approx(3.0685, abs=1e-4)
        assert report.reduction_bound == report.xi_bound

    def test_alpha_below_omega(self):
        report = xi_and_performance_bounds(1.0, 10.0, 0.9, 10)
        assert report.regime is Regime.ALPHA_LT_OMEGA
        assert report.xi_bound == pytest.approx(math.log(10 - 9 / 11) / 10, rel=1e-12)

    def test_mellowmax_is_alpha_zero(self):
        report = mellowmax_bounds(5.0, 0.9, 10)
        assert report.xi_bound == pytest.approx(math.log(10) / 5, rel=1e-12)
        assert report.xi_bound == pytest.approx(0.460517, abs=1e-6)

    def test_single_action_has_no_gap(self):
        assert xi_and_performance_bounds(3.0, 2.0, 0.9, 1).xi_bound == 0.0
        assert xi_and_performance_bounds(1.0, 2.0, 0.9, 1).xi_bound == pytest.approx(0.0, abs=1e-15)

    def test_regimes_agree_at_alpha_equal_omega(self):
        omega, n = 4.0, 7
        below = xi_and_performance_bounds(omega * (1 - 1e-12), omega, 0.0, n).xi_bound
        assert below == pytest.approx(xi_and_performance_bounds(omega, omega, 0.0, n).xi_bound, rel=1e-9)

    def test_negative_alpha_rejected(self):
        with pytest.raises(ParameterError) as err:
            xi_and_performance_bounds(-1.0, 1.0, 0.9, 4)
        assert err.value.name == "alpha"

    @pytest.mark.parametrize("alpha,omega,n", [(10.0, 5.0, 10), (1.0, 10.0, 10), (0.0, 2.0, 5),
                                               (15.0, 15.0, 3), (5.0, 1.0, 50)])
    def test_empirical_gap_within_bound(self, alpha, omega, n):
        report = xi_scan(alpha, omega, n, trials=5000, seed=0)
        assert report.within_bound
        assert report.empirical_sup > 0


class TestEnvelope:

    @pytest.mark.parametrize("alpha,omega", [(0.0, 1.0), (0.5, 1.0), (1.0, 1.0), (5.0, 1.0), (10.0, 5.0)])
    def test_numeric_max_below_closed_form(self, alpha, omega):
        assert envelope_numeric_max(alpha, omega) <= envelope_max(alpha, omega) + 1e-9

    def test_closed_form_values(self):
        assert envelope_max(1.0, 3.0) == pytest.approx(0.75)
        assert envelope_max(3.0, 3.0) == 0.5


TEMPERATURES = [0.5, 1.0, 2.0, 5.0, 10.0, 15.0]


def xi(alpha, omega, n):
    return xi_and_performance_bounds(alpha, omega, 0.9, n).xi_bound


class TestBoundProperties:

    @pytest.mark.parametrize("n", [2, 5, 10, 50])
    @pytest.mark.parametrize("omega", TEMPERATURES)
    def test_xi_non_increasing_in_alpha(self, n, omega):
        alphas = [0.0] + [a for a in TEMPERATURES if a < omega] + [omega]
        values = [xi(alpha, omega, n) for alpha in alphas]
        for before, after in zip(values, values[1:]):
            assert after <= before + 1e-12

    @pytest.mark.parametrize("n", [2, 5, 10, 50])
    @pytest.mark.parametrize("alpha", [0.0] + TEMPERATURES)
    def test_xi_non_increasing_in_omega(self, n, alpha):
        values = [xi(alpha, omega, n) for omega in TEMPERATURES]
        for before, after in zip(values, values[1:]):
            assert after <= before + 1e-12

    @pytest.mark.parametrize("n", [2, 5, 10, 50])
    @pytest.mark.parametrize("alpha", TEMPERATURES)
    @pytest.mark.parametrize("omega", TEMPERATURES)
    def test_sm2_bound_below_mellowmax_bound(self, n, alpha, omega):
        assert xi(alpha, omega, n) < mellowmax_bounds(omega, 0.9, n).xi_bound
        assert mellowmax_bounds(omega, 0.9, n).xi_bound == pytest.approx(math.log(n) / omega)

    def test_envelope_with_alpha_below_omega(self):
        assert envelope_max(5.0, 10.0) == pytest.approx(2 / 3)
        numeric = envelope_numeric_max(5.0, 10.0)
        # sup of u^2 / (u^3 + 1) is reached at u^3 = 2
        assert numeric == pytest.approx(2 ** (2 / 3) / 3, abs=1e-8)
        assert numeric <= 2 / 3


class TestMarlBounds:

    def test_unit_weights(self):
        report = marl_bounds(1.0, 1.0, 1.0, 3, 2, 10.0, 5.0)
        assert report.theta1_low == pytest.approx(1.0)
        assert report.theta1_high == pytest.approx(1.0)

    def test_weight_spread(self):
        report = marl_bounds(1.0, 0.5, 2.0, 3, 5, 10.0, 5.0)
        factor = 3 * 4 / 6
        assert report.theta1_low == pytest.approx(0.5 * factor)
        assert report.theta1_high == pytest.approx(2.0 * factor)
        assert report.reduction_high == pytest.approx(2.0 * 3 * math.log(3.0) / 5)

    def test_invalid_slopes(self):
        with pytest.raises(ParameterError):
            marl_bounds(1.0, 2.0, 1.0, 3, 5, 1.0, 1.0)


class TestContractionScan:

    def test_inside_range_no_violations(self):
        rng = contraction_range_for_spread(1.0, 2.0)
        for alpha in (0.0, rng.alpha_max, rng.alpha_min):
            report = contraction_scan(alpha, 1.0, 2.0, 2, trials=3000, seed=1)
            assert report.violations == 0
            assert report.worst_ratio <= 1.0 + 1e-9

    def test_injected_expansion_pair(self):
        report = contraction_scan(1.0, 1.0, 4.0, 2, trials=1000, seed=0,
                                  inject_pairs=[([50.0, 1.0], [5.0, 1.0])])
        expected = abs(soft_mellowmax([50.0, 1.0], 1.0, 1.0) - soft_mellowmax([5.0, 1.0], 1.0, 1.0)) / 45.0
        assert report.violations >= 1
        assert report.trials == 1001
        assert report.worst_ratio == pytest.approx(expected, rel=1e-12)
        assert report.worst_pair == ((50.0, 1.0), (5.0, 1.0))

    def test_identical_injected_pair_rejected(self):
        with pytest.raises(ParameterError):
            contraction_scan(0.0, 1.0, 2.0, 2, trials=10, seed=0, inject_pairs=[([1.0, 2.0], [1.0, 2.0])])

    def test_worker_count_does_not_change_result(self):
        one = contraction_scan(0.5, 2.0, 1.0, 3, trials=5000, seed=9, chunk_size=700, workers=1)
        many = contraction_scan(0.5, 2.0, 1.0, 3, trials=5000, seed=9, chunk_size=700, workers=4)
        assert one == many

    @pytest.mark.slow
    @pytest.mark.parametrize("omega", [0.5, 1.0, 5.0])
    @pytest.mark.parametrize("c", [0.5, 2.0, 4.0])
    def test_acceptance_grid(self, omega, c):
        rng = contraction_range_for_spread(omega, c)
        for alpha in (0.0, rng.alpha_max / 2, rng.alpha_max, rng.alpha_min / 2, rng.alpha_min):
            report = contraction_scan(alpha, omega, c, 2, trials=100000, seed=0)
            assert report.violations == 0
