"""Backup operators: reference values, ordering, stability and the gradient."""

import math

import numpy as np
import pytest

from core.errors import DomainError, ParameterError
from core.operators import (OperatorKind, OperatorSpec, apply_operator, boltzmann_value, evaluate, lse, mellowmax,
                            operator_gradient, soft_mellowmax)
from core.theory import contraction_range_for_spread


class TestReferenceValues:

    def test_sm2_two_actions(self):
        # log(1 + e^2) - log(1 + e)
        expected = math.log(1 + math.e ** 2) - math.log(1 + math.e)
        assert soft_mellowmax([0.0, 1.0], 1.0, 1.0) == pytest.approx(expected, rel=1e-12)
        assert soft_mellowmax([0.0, 1.0], 1.0, 1.0) == pytest.approx(0.813666, abs=1e-6)

    def test_mellowmax_two_actions(self):
        expected = math.log((math.e + math.e ** 2) / 2)
        assert mellowmax([1.0, 2.0], 1.0) == pytest.approx(expected, rel=1e-12)

    def test_boltzmann_two_actions(self):
        assert boltzmann_value([0.0, 1.0], 1.0) == pytest.approx(math.e / (1 + math.e), rel=1e-12)

    def test_expansion_example(self):
        """Outside the admissible alpha range two vectors 45 apart map 45.018 apart."""
        diff = soft_mellowmax([50.0, 1.0], 1.0, 1.0) - soft_mellowmax([5.0, 1.0], 1.0, 1.0)
        assert abs(diff) == pytest.approx(45.018, abs=1e-3)
        assert abs(diff) > 45.0

    def test_single_action_is_identity(self):
        for spec in (OperatorSpec.max(), OperatorSpec.mean(), OperatorSpec.boltzmann(3.0),
                     OperatorSpec.mellowmax(3.0), OperatorSpec.sm2(2.0, 3.0)):
            assert apply_operator([1.7], spec) == 1.7

    def test_constant_vector_is_exact(self):
        for spec in (OperatorSpec.mellowmax(5.0), OperatorSpec.sm2(10.0, 5.0), OperatorSpec.boltzmann(2.0)):
            assert apply_operator([3.25] * 7, spec) == 3.25

    def test_alpha_zero_is_mellowmax_bitwise(self):
        rng = np.random.default_rng(0)
        q = rng.uniform(-5, 5, size=(200, 6))
        np.testing.assert_array_equal(soft_mellowmax(q, 0.0, 4.0), mellowmax(q, 4.0))

    def test_lse_matches_naive(self):
        q = np.array([0.3, -1.2, 2.0])
        assert lse(q, 1.5) == pytest.approx(math.log(np.sum(np.exp(1.5 * q))), rel=1e-12)


class TestOrdering:

    @pytest.fixture
    def vectors(self):
        return np.random.default_rng(1).uniform(-5, 5, size=(1000, 10))

    def test_between_min_and_max(self, vectors):
        for spec in (OperatorSpec.mellowmax(5.0), OperatorSpec.sm2(10.0, 5.0), OperatorSpec.sm2(-3.0, 2.0),
                     OperatorSpec.boltzmann(4.0)):
            values = evaluate(vectors, spec)
            assert np.all(values <= vectors.max(axis=1))
            assert np.all(values >= vectors.min(axis=1))

    def test_mellowmax_at_least_mean(self, vectors):
        assert np.all(mellowmax(vectors, 0.5) >= vectors.mean(axis=1) - 1e-12)

    def test_sm2_between_mellowmax_and_max(self, vectors):
        sm = soft_mellowmax(vectors, 10.0, 5.0)
        assert np.all(sm <= vectors.max(axis=1) + 1e-12)
        assert np.all(sm >= mellowmax(vectors, 5.0) - 1e-12)

    @pytest.mark.parametrize("omega", [1.0, 5.0, 10.0])
    def test_non_decreasing_in_alpha(self, vectors, omega):
        alphas = [0.0, 1.0, 2.0, 5.0, 10.0, 15.0]
        values = np.stack([soft_mellowmax(vectors, a, omega) for a in alphas])
        assert np.all(np.diff(values, axis=0) >= -1e-9)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0, 5.0, 10.0, 15.0])
    def test_non_decreasing_in_omega(self, vectors, alpha):
        values = np.stack([soft_mellowmax(vectors, alpha, w) for w in (1.0, 5.0, 10.0)])
        assert np.all(np.diff(values, axis=0) >= -1e-9)

    def test_shift_invariance(self, vectors):
        spec = OperatorSpec.sm2(10.0, 5.0)
        np.testing.assert_allclose(evaluate(vectors + 3.5, spec), evaluate(vectors, spec) + 3.5, atol=1e-10)

    def test_large_entries_do_not_overflow(self):
        value = soft_mellowmax([1e6, 0.0, -1e6], 10.0, 100.0)
        assert math.isfinite(value)
        assert value == pytest.approx(1e6, rel=1e-12)
        assert math.isfinite(mellowmax([1e6, 1e6 - 1.0], 100.0))


class TestValidation:

    def test_empty_vector(self):
        with pytest.raises(DomainError):
            apply_operator([], OperatorSpec.max())

    def test_non_finite_entries(self):
        with pytest.raises(DomainError):
            apply_operator([0.0, float("nan")], OperatorSpec.mellowmax(1.0))
        with pytest.raises(DomainError):
            apply_operator([0.0, float("inf")], OperatorSpec.sm2(1.0, 1.0))

    @pytest.mark.parametrize("omega", [0.0, -1.0])
    def test_omega_must_be_positive(self, omega):
        with pytest.raises(ParameterError) as err:
            OperatorSpec.sm2(1.0, omega)
        assert err.value.name == "omega"
        with pytest.raises(ParameterError):
            mellowmax([0.0, 1.0], omega)

    def test_boltzmann_allows_zero(self):
        assert apply_operator([0.0, 2.0], OperatorSpec.boltzmann(0.0)) == pytest.approx(1.0)

    def test_parse_and_label(self):
        spec = OperatorSpec.parse("sm2(10, 5)")
        assert spec == OperatorSpec.sm2(10.0, 5.0)
        assert spec.label == "sm2(10,5)"
        assert OperatorSpec.parse("mellowmax(5)").kind is OperatorKind.MELLOWMAX
        assert OperatorSpec.parse("max") == OperatorSpec.max()
        with pytest.raises(ParameterError):
            OperatorSpec.parse("sm2(10)")
        with pytest.raises(ParameterError):
            OperatorSpec.parse("softest")


class TestGradient:

    @pytest.mark.parametrize("spec", [OperatorSpec.mellowmax(2.0), OperatorSpec.sm2(3.0, 2.0),
                                      OperatorSpec.sm2(-0.5, 1.0), OperatorSpec.boltzmann(1.5),
                                      OperatorSpec.mean()])
    def test_matches_finite_differences(self, spec):
        q = np.array([0.4, -1.1, 0.9, 0.0])
        h = 1e-6
        numeric = np.array([(apply_operator(q + h * e, spec) - apply_operator(q - h * e, spec)) / (2 * h)
                            for e in np.eye(len(q))])
        np.testing.assert_allclose(operator_gradient(q, spec), numeric, atol=1e-7)
        assert operator_gradient(q, spec).sum() == pytest.approx(1.0, abs=1e-12)

    def test_max_gradient_is_lowest_argmax(self):
        np.testing.assert_array_equal(operator_gradient([2.0, 2.0, 1.0], OperatorSpec.max()), [1.0, 0.0, 0.0])

    def test_not_monotone_outside_admissible_range(self):
        grad = operator_gradient([0.0, -2.0], OperatorSpec.sm2(1.0, 1.0))
        assert grad[1] < 0

    @pytest.mark.parametrize("omega,c", [(1.0, 2.0), (0.5, 4.0), (5.0, 0.5)])
    def test_monotone_inside_admissible_range(self, omega, c):
        rng = contraction_range_for_spread(omega, c)
        vectors = np.random.default_rng(3).uniform(-c / 2, c / 2, size=(500, 5))
        for alpha in (rng.alpha_min, rng.alpha_min / 2, 0.0, rng.alpha_max / 2, rng.alpha_max):
            spec = OperatorSpec.sm2(alpha, omega)
            grads = np.array([operator_gradient(q, spec) for q in vectors])
            assert grads.min() >= -1e-12
