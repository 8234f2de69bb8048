"""Property-based tests for the shared numerical kernels"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.core.exceptions import NumericalError, ValidationError
from app.services.numerics import (
    DiscreteDistribution,
    binary_entropy_bits,
    bisect_monotone,
    damped_least_squares_fit,
    gauss_hermite_expect,
    mixture_expect,
    monte_carlo_expect,
    normal_cdf,
    q_function,
    quadrature_rule,
)

points = st.floats(min_value=-8.0, max_value=8.0, allow_nan=False)


class TestGaussianTails:
    """
    **Feature: exitsbm, Property 12: Q and the normal CDF are complementary and monotone**
    """

    @settings(max_examples=100)
    @given(x=points)
    def test_q_plus_cdf_is_one(self, x):
        assert q_function(x) + normal_cdf(x) == pytest.approx(1.0, abs=1e-14)
        assert q_function(-x) == pytest.approx(normal_cdf(x), abs=1e-14)

    @settings(max_examples=100)
    @given(x=points, step=st.floats(min_value=1e-3, max_value=4.0))
    def test_q_decreasing(self, x, step):
        assert q_function(x + step) <= q_function(x)

    @pytest.mark.unit
    def test_known_values(self):
        assert q_function(0.0) == pytest.approx(0.5)
        assert q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-12)
        assert binary_entropy_bits(0.5) == pytest.approx(1.0)
        assert binary_entropy_bits(0.0) == 0.0
        assert binary_entropy_bits(0.1) == pytest.approx(0.4689955935892812, rel=1e-12)


class TestQuadrature:
    """
    **Feature: exitsbm, Property 13: Gauss-Hermite rules integrate normal moments exactly**
    """

    @pytest.mark.unit
    @pytest.mark.parametrize("n_nodes", [8, 32, 64])
    def test_weights_normalized(self, n_nodes):
        rule = quadrature_rule(n_nodes)
        assert rule.size == n_nodes
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.unit
    def test_low_moments(self):
        assert gauss_hermite_expect(lambda z: z) == pytest.approx(0.0, abs=1e-12)
        assert gauss_hermite_expect(lambda z: z ** 2) == pytest.approx(1.0, rel=1e-12)
        assert gauss_hermite_expect(lambda z: z ** 4) == pytest.approx(3.0, rel=1e-12)

    @settings(max_examples=50)
    @given(mu=st.floats(min_value=-3.0, max_value=3.0), sigma=st.floats(min_value=0.1, max_value=3.0))
    def test_tanh_expectation_matches_doubled_rule(self, mu, sigma):
        f = lambda z: np.tanh(mu + sigma * z)
        assert gauss_hermite_expect(f, 64) == pytest.approx(gauss_hermite_expect(f, 128), abs=1e-9)

    @pytest.mark.unit
    def test_vector_valued_integrand(self):
        means = np.array([0.0, 1.0, 2.0])
        result = gauss_hermite_expect(lambda z: (z[:, None] + means[None, :]) ** 2)
        assert result == pytest.approx(1.0 + means ** 2, rel=1e-12)

    @pytest.mark.unit
    def test_monte_carlo_agrees_within_error(self):
        f = lambda z: np.tanh(1.0 + 2.0 * z)
        mean, stderr = monte_carlo_expect(f, 200_000, seed=3)
        assert abs(mean - gauss_hermite_expect(f)) < 5 * stderr

    @pytest.mark.unit
    def test_rule_rejects_nonpositive_size(self):
        with pytest.raises(ValidationError):
            quadrature_rule(0)


class TestDiscreteDistribution:
    @settings(max_examples=100)
    @given(weights=st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=1, max_size=8))
    def test_mixture_expectation_is_weighted_sum(self, weights):
        probs = np.asarray(weights) / np.sum(weights)
        probs = probs / probs.sum()
        values = np.arange(len(weights), dtype=float)
        dist = DiscreteDistribution(values=values, probs=probs)
        assert mixture_expect(lambda x: x ** 2, dist) == pytest.approx(float(np.dot(probs, values ** 2)))
        assert dist.mass_where(values >= 0) == pytest.approx(1.0)

    @pytest.mark.unit
    @pytest.mark.parametrize("values,probs", [
        ([0.0, 1.0], [0.5, 0.6]),
        ([0.0, 1.0], [1.5, -0.5]),
        ([0.0], [0.5, 0.5]),
    ])
    def test_invalid_distributions(self, values, probs):
        with pytest.raises(ValidationError):
            DiscreteDistribution(values=np.array(values), probs=np.array(probs))


class TestBisection:
    """
    **Feature: exitsbm, Property 14: Bisection brackets the root within tolerance**
    """

    @settings(max_examples=100)
    @given(root=st.floats(min_value=0.01, max_value=9.99), tol=st.sampled_from([1e-3, 1e-6, 1e-9]))
    def test_linear_root(self, root, tol):
        result = bisect_monotone(lambda x: x - root, 0.0, 10.0, tol)
        assert abs(result.root - root) <= 2 * tol
        assert result.bracket == (0.0, 10.0)

    @pytest.mark.unit
    def test_endpoint_root(self):
        assert bisect_monotone(lambda x: x, 0.0, 1.0, 1e-6).root == 0.0
        assert bisect_monotone(lambda x: x - 1.0, 0.0, 1.0, 1e-6).root == 1.0

    @pytest.mark.unit
    def test_no_sign_change(self):
        with pytest.raises(ValidationError):
            bisect_monotone(lambda x: x + 1.0, 0.0, 1.0, 1e-6)
        with pytest.raises(ValidationError):
            bisect_monotone(lambda x: x, 1.0, 0.0, 1e-6)


class TestLeastSquares:
    @pytest.mark.unit
    def test_recovers_exponential_parameters(self):
        x = np.linspace(0.0, 5.0, 40)
        model = lambda x, a, b: a * np.exp(-b * x)
        result = damped_least_squares_fit(x, model(x, 2.0, 0.7), model, init=[1.0, 1.0])
        assert result.success
        assert result.params == pytest.approx([2.0, 0.7], rel=1e-6)
        assert result.max_abs_residual < 1e-8
        assert not result.rank_deficient

    @pytest.mark.unit
    def test_flags_rank_deficiency(self):
        x = np.linspace(0.0, 1.0, 10)
        model = lambda x, a, b: (a + b) * x
        result = damped_least_squares_fit(x, 3.0 * x, model, init=[1.0, 1.0])
        assert result.rank_deficient
        assert result.max_abs_residual < 1e-8

    @pytest.mark.unit
    def test_rejects_too_few_samples_and_bad_region(self):
        model = lambda x, a, b: a * x + b
        with pytest.raises(ValidationError):
            damped_least_squares_fit([1.0], [1.0], model, init=[0.0, 0.0])
        with pytest.raises(NumericalError):
            damped_least_squares_fit([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], model, init=[0.0, 0.0],
                                     bounds_check=lambda p: p[0] < 0)
