"""Property-based tests for density evolution and its error predictions"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.core.exceptions import ResourceLimitError, ValidationError
from app.models.analysis_models import ModelKind
from app.models.channel_models import LlrModel
from app.models.graph_models import SymmetricSbmParams
from app.services.channels import flip_channel, llr_spec
from app.services.devo import (
    de_iterate_single,
    de_iterate_symmetric,
    h_nu,
    mc_tree_validate,
    residual_error_single,
    residual_error_symmetric,
    single_error_rates,
    single_update,
    smallest_fixed_point_bracket,
)

alphas = st.floats(min_value=0.01, max_value=0.49)
epsilons = st.floats(min_value=0.0, max_value=1.0)


class TestSymmetricRecursion:
    """
    **Feature: exitsbm, Property 24: ν_t is nondecreasing and bounded by μ²/4**
    """

    @settings(max_examples=50, deadline=None)
    @given(alpha=alphas, epsilon=epsilons)
    def test_h_at_zero_is_closed_form(self, alpha, epsilon):
        u_plus = llr_spec(flip_channel(alpha, epsilon), LlrModel.SYMMETRIC_HALF_LOG).plus_dist
        assert h_nu(0.0, u_plus) == pytest.approx(epsilon * (1 - 2 * alpha) ** 2, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(mu=st.floats(min_value=0.0, max_value=6.0), alpha=alphas, epsilon=epsilons)
    def test_trace_monotone_and_bounded(self, mu, alpha, epsilon):
        trace = de_iterate_symmetric(mu, flip_channel(alpha, epsilon), t_max=200)
        nus = np.asarray(trace.nu_seq)
        assert nus[0] == 0.0
        assert np.all(np.diff(nus) >= -1e-12)
        assert np.all(nus <= trace.bound + 1e-12)
        assert len(trace.predicted_errors) == len(trace.nu_seq)

    @pytest.mark.unit
    def test_uninformative_start_stays_at_zero(self, erased_channel):
        trace = de_iterate_symmetric(0.8, erased_channel)
        assert trace.converged
        assert trace.nu_seq == [0.0, 0.0]
        assert trace.predicted_errors[0] == pytest.approx(0.5)

    @pytest.mark.unit
    def test_strong_signal_converges_near_bound(self, erasure_channel):
        trace = de_iterate_symmetric(6.0, erasure_channel)
        assert trace.converged
        assert 8.0 < trace.nu_bar < 9.0
        assert trace.predicted_errors[-1] < trace.predicted_errors[0]

    @pytest.mark.unit
    def test_state_at_past_the_end(self, bsc_channel):
        trace = de_iterate_symmetric(2.0, bsc_channel)
        assert trace.state_at(trace.iterations + 50) == trace.nu_bar
        assert trace.gaussian_moments(1, -1) == (-trace.nu_seq[1], trace.nu_seq[1])
        short = de_iterate_symmetric(2.0, bsc_channel, t_max=1, tol=1e-300)
        assert not short.converged
        with pytest.raises(ValueError):
            short.state_at(5)

    @pytest.mark.unit
    @pytest.mark.parametrize("mu,t_max,tol", [(-1.0, 10, 1e-8), (math.inf, 10, 1e-8), (1.0, 0, 1e-8), (1.0, 10, 0.0)])
    def test_rejects_bad_arguments(self, bsc_channel, mu, t_max, tol):
        with pytest.raises(ValidationError):
            de_iterate_symmetric(mu, bsc_channel, t_max=t_max, tol=tol)


class TestFixedPointsAndQuadrature:
    """
    **Feature: exitsbm, Property 47: DE stops at the smallest fixed point of a monotone h**
    """

    @pytest.mark.unit
    @pytest.mark.parametrize("mu,alpha,epsilon", [(6.0, 0.4, 0.1), (2.0, 0.1, 0.1), (2.0, 0.1, 1.0), (1.5, 0.2, 0.5)])
    def test_limit_is_the_smallest_fixed_point(self, mu, alpha, epsilon):
        channel = flip_channel(alpha, epsilon)
        trace = de_iterate_symmetric(mu, channel)
        assert trace.converged

        u_plus = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG).plus_dist
        grid = np.linspace(0.0, mu ** 2 / 4, 10_000)
        gaps = grid - mu ** 2 / 4 * np.array([h_nu(nu, u_plus) for nu in grid])
        assert gaps[0] < 0
        first = int(np.flatnonzero(gaps >= 0)[0])
        assert grid[first - 1] - 1e-6 <= trace.nu_bar <= grid[first] + 1e-6
        assert smallest_fixed_point_bracket(mu, channel) == pytest.approx((grid[first - 1], grid[first]))

    @pytest.mark.unit
    def test_zero_is_fixed_without_side_information(self, erased_channel):
        assert smallest_fixed_point_bracket(6.0, erased_channel, points=100) == (0.0, 0.0)
        assert smallest_fixed_point_bracket(0.0, flip_channel(0.1, 1.0), points=100) == (0.0, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(alpha=alphas, epsilon=epsilons)
    def test_h_is_nondecreasing(self, alpha, epsilon):
        u_plus = llr_spec(flip_channel(alpha, epsilon), LlrModel.SYMMETRIC_HALF_LOG).plus_dist
        values = np.array([h_nu(nu, u_plus) for nu in np.linspace(0.0, 9.0, 91)])
        assert np.all(np.diff(values) >= -1e-12)
        assert np.all(values <= 1.0 + 1e-12)

    @pytest.mark.unit
    @pytest.mark.parametrize("v", [0.5, 2.0])
    def test_single_update_stable_under_node_doubling(self, v):
        u_one = llr_spec(flip_channel(0.4), LlrModel.SINGLE_FULL_LOG).plus_dist
        lam, threshold = 2 / (3 * math.e), math.log(9.0)
        assert single_update(v, lam, threshold, u_one, 64) == pytest.approx(
            single_update(v, lam, threshold, u_one, 128), abs=1e-10)

    @pytest.mark.unit
    def test_single_update_at_zero(self):
        u_one = llr_spec(flip_channel(0.4), LlrModel.SINGLE_FULL_LOG).plus_dist
        assert single_update(0.0, 0.0, math.log(9.0), u_one) == 0.0


class TestSymmetricErrors:
    @pytest.mark.unit
    def test_error_at_zero_uses_side_information_only(self, bsc_channel, erased_channel, erasure_channel):
        assert residual_error_symmetric(0.0, bsc_channel) == pytest.approx(0.1)
        assert residual_error_symmetric(0.0, erased_channel) == pytest.approx(0.5)
        # revealed w.p. 0.1, wrong w.p. 0.4 when revealed, coin flip otherwise
        assert residual_error_symmetric(0.0, erasure_channel) == pytest.approx(0.1 * 0.4 + 0.9 * 0.5)

    @settings(max_examples=50)
    @given(nu=st.floats(min_value=0.5, max_value=20.0), step=st.floats(min_value=0.01, max_value=5.0))
    def test_error_decreases_with_nu(self, nu, step):
        channel = flip_channel(0.3, 0.5)
        assert residual_error_symmetric(nu + step, channel) <= residual_error_symmetric(nu, channel) + 1e-12

    @pytest.mark.unit
    def test_uninformative_channel_gives_q_of_half_root(self, erased_channel):
        nu = 4.0
        expected = 0.5 * math.erfc(math.sqrt(nu) / math.sqrt(2.0))
        assert residual_error_symmetric(nu, erased_channel) == pytest.approx(expected)


class TestSingleRecursion:
    """
    **Feature: exitsbm, Property 25: v_t stays in [0, λe^ν] and zero signal gives zero state**
    """

    @settings(max_examples=30, deadline=None)
    @given(lam=st.floats(min_value=0.0, max_value=3.0), k_frac=st.floats(min_value=0.001, max_value=0.5),
           alpha=alphas, epsilon=epsilons)
    def test_trace_bounded(self, lam, k_frac, alpha, epsilon):
        nu = math.log((1 - k_frac) / k_frac)
        trace = de_iterate_single(lam, nu, flip_channel(alpha, epsilon), t_max=100)
        vs = np.asarray(trace.v_seq)
        assert vs[0] == 0.0
        assert np.all(vs >= 0.0)
        assert np.all(vs <= trace.bound * (1 + 1e-12) + 1e-12)
        assert len(trace.type_i_rates) == len(trace.type_ii_rates) == len(vs)

    @pytest.mark.unit
    def test_zero_lambda(self, erasure_channel):
        trace = de_iterate_single(0.0, math.log(9.0), erasure_channel)
        assert trace.v_seq == [0.0, 0.0]
        assert trace.b(0) == 0.0

    @pytest.mark.unit
    def test_error_rates_without_graph_information(self, erasure_channel):
        nu = math.log(9.0)
        # side-information LLRs are ±log 1.5, far below ν: nobody is included
        assert single_error_rates(0.0, nu, erasure_channel) == pytest.approx((0.0, 1.0))
        assert residual_error_single(0.0, nu, erasure_channel) == pytest.approx(1.0)

    @pytest.mark.unit
    def test_total_error_combines_rates(self, erasure_channel):
        nu = math.log(9.0)
        type_i, type_ii = single_error_rates(3.0, nu, erasure_channel)
        assert residual_error_single(3.0, nu, erasure_channel) == pytest.approx(9.0 * type_i + type_ii)
        assert 0.0 < type_i < 1.0 and 0.0 < type_ii < 1.0

    @pytest.mark.unit
    def test_trace_predictions_match_rates(self, erasure_channel):
        nu = math.log(99.0)
        trace = de_iterate_single(1.5, nu, erasure_channel)
        for v, err in zip(trace.v_seq, trace.predicted_errors):
            assert err == pytest.approx(residual_error_single(v, nu, erasure_channel))
        assert trace.b(0) == pytest.approx(trace.v_seq[1] / 1.5)

    @pytest.mark.unit
    def test_rejects_infinite_threshold(self, erasure_channel):
        with pytest.raises(ValidationError):
            de_iterate_single(1.0, -math.inf, erasure_channel)
        with pytest.raises(ValidationError):
            de_iterate_single(-1.0, 1.0, erasure_channel)


class TestTreeMonteCarlo:
    """
    **Feature: exitsbm, Property 26: Monte Carlo tree checks are reproducible across thread counts**
    """

    PARAMS = SymmetricSbmParams(n=10 ** 6, a=6.0, b=2.0)

    @pytest.mark.integration
    def test_symmetric_report(self, erasure_channel):
        report = mc_tree_validate(ModelKind.SYMMETRIC, self.PARAMS, erasure_channel, depth=2,
                                  num_samples=500, seed=9, chunk_size=100)
        assert report.samples_per_label == 500
        assert [m.label for m in report.labels] == [1, -1]
        assert all(m.samples == 500 for m in report.labels)
        assert all(m.mean_ok for m in report.labels)
        assert report.nodes_touched >= 1000
        assert report.slack == pytest.approx(2.5)

    @pytest.mark.integration
    def test_threads_do_not_change_results(self, erasure_channel):
        kwargs = dict(depth=2, num_samples=300, seed=21, chunk_size=50)
        one = mc_tree_validate(ModelKind.SYMMETRIC, self.PARAMS, erasure_channel, threads=1, **kwargs)
        many = mc_tree_validate(ModelKind.SYMMETRIC, self.PARAMS, erasure_channel, threads=4, **kwargs)
        assert one.model_dump() == many.model_dump()

    @pytest.mark.unit
    def test_budget_and_argument_checks(self, erasure_channel):
        with pytest.raises(ResourceLimitError):
            mc_tree_validate(ModelKind.SYMMETRIC, self.PARAMS, erasure_channel, depth=3,
                             num_samples=1000, seed=0, sample_budget=100)
        with pytest.raises(ValidationError):
            mc_tree_validate(ModelKind.SYMMETRIC, self.PARAMS, erasure_channel, depth=2, num_samples=1, seed=0)
