"""
Property-based tests for EXIT-chart analysis: J and its inverse, transfer
maps, crossings, staircases and threshold scans.
"""
import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from app.core.exceptions import ValidationError
from app.models.analysis_models import ModelKind
from app.services.channels import flip_channel
from app.services.devo import de_iterate_symmetric
from app.services.exit_chart import (
    build_exit_curve,
    build_j_table,
    find_fixed_points,
    j_fitted,
    j_inverse,
    j_single,
    j_symmetric,
    single_transfer_map,
    staircase,
    staircase_map,
    symmetric_transfer_map,
    threshold_scan,
    transfer_single,
    transfer_symmetric,
)
from app.services.numerics import binary_entropy_bits

alphas = st.floats(min_value=0.01, max_value=0.49)
epsilons = st.floats(min_value=0.0, max_value=1.0)
states = st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=30.0))


def _gaussian_j(nu: float) -> float:
    """1 − E[log2(1 + e^{−2Γ})] with Γ ~ N(ν, ν), by adaptive quadrature."""
    def integrand(z):
        gamma = nu + math.sqrt(nu) * z
        return np.logaddexp(0.0, -2 * gamma) / math.log(2) * math.exp(-z * z / 2) / math.sqrt(2 * math.pi)

    value, _ = integrate.quad(integrand, -40, 40, epsabs=1e-13, limit=200)
    return 1.0 - value


class TestJFunction:
    """
    **Feature: exitsbm, Property 27: J is the label/belief information in bits**
    """

    @pytest.mark.unit
    def test_side_information_only(self, bsc_channel, erased_channel):
        assert j_symmetric(0.0, bsc_channel) == pytest.approx(1 - binary_entropy_bits(0.1), abs=1e-12)
        assert j_symmetric(0.0, bsc_channel) == pytest.approx(0.531004, abs=1e-6)
        assert j_symmetric(0.0, erased_channel) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.unit
    @pytest.mark.parametrize("nu", [0.05, 0.5, 1.5, 4.0, 12.0])
    def test_matches_adaptive_quadrature_without_side_information(self, erased_channel, nu):
        assert j_symmetric(nu, erased_channel) == pytest.approx(_gaussian_j(nu), abs=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(nu=states, alpha=alphas, epsilon=epsilons)
    def test_symmetric_range(self, nu, alpha, epsilon):
        value = j_symmetric(nu, flip_channel(alpha, epsilon))
        assert 0.0 <= value <= 1.0

    @settings(max_examples=30, deadline=None)
    @given(v=states, k_frac=st.floats(min_value=0.01, max_value=0.5),
           alpha=alphas)
    def test_single_range(self, v, k_frac, alpha):
        value = j_single(v, k_frac, flip_channel(alpha, 0.5))
        assert 0.0 <= value <= binary_entropy_bits(k_frac) + 1e-12

    @pytest.mark.unit
    def test_saturates(self, erasure_channel):
        assert j_symmetric(60.0, erasure_channel) > 0.999
        assert j_single(400.0, 0.1, erasure_channel) == pytest.approx(binary_entropy_bits(0.1), abs=1e-3)

    @pytest.mark.unit
    def test_rejects_bad_states(self, erasure_channel):
        with pytest.raises(ValidationError):
            j_symmetric(-1.0, erasure_channel)
        with pytest.raises(ValidationError):
            j_single(1.0, 1.0, erasure_channel)
        with pytest.raises(ValidationError):
            j_single(math.nan, 0.1, erasure_channel)


class TestJTable:
    """
    **Feature: exitsbm, Property 28: Tabulated J is monotone and J⁻¹ inverts it**
    """

    @pytest.mark.unit
    def test_table_layout(self, erasure_channel):
        table = build_j_table(ModelKind.SYMMETRIC, erasure_channel, nu_max=10.0, grid_size=50)
        assert table.nu_grid[0] == 0.0
        assert table.nu_max == pytest.approx(10.0)
        assert table.nu_grid.size == 50
        assert np.all(np.diff(table.values) >= 0)
        assert table.i_start == pytest.approx(j_symmetric(0.0, erasure_channel))

    @settings(max_examples=50, deadline=None)
    @given(fraction=st.floats(min_value=0.001, max_value=0.999))
    def test_inverse_round_trip(self, fraction):
        table = _table_for_round_trip()
        target = table.values[0] + fraction * (table.values[-1] - table.values[0])
        inversion = j_inverse(table, target)
        assert not inversion.clamped
        assert table.evaluate(inversion.nu) == pytest.approx(target, abs=1e-9)

    @pytest.mark.unit
    def test_inverse_clamps_outside_the_table(self):
        table = _table_for_round_trip()
        below = j_inverse(table, table.values[0] - 0.01)
        above = j_inverse(table, 1.0)
        assert below.nu == 0.0 and below.clamped
        assert above.nu == table.nu_max and above.clamped
        assert not j_inverse(table, table.values[0]).clamped

    @pytest.mark.unit
    def test_fit_tracks_table(self, erased_channel):
        table = build_j_table(ModelKind.SYMMETRIC, erased_channel, nu_max=20.0, grid_size=80, fit=True)
        assert table.fit is not None
        assert np.max(np.abs(j_fitted(table, table.nu_grid) - table.values)) <= 1e-2
        plain = build_j_table(ModelKind.SYMMETRIC, erased_channel, nu_max=20.0, grid_size=20)
        with pytest.raises(ValidationError):
            j_fitted(plain, 1.0)

    @pytest.mark.unit
    def test_argument_checks(self, erasure_channel):
        with pytest.raises(ValidationError):
            build_j_table(ModelKind.SYMMETRIC, erasure_channel, nu_max=0.0)
        with pytest.raises(ValidationError):
            build_j_table(ModelKind.SYMMETRIC, erasure_channel, nu_max=1.0, grid_size=2)
        with pytest.raises(ValidationError):
            build_j_table(ModelKind.SINGLE, erasure_channel, nu_max=1.0)


@lru_cache(maxsize=1)
def _table_for_round_trip():
    return build_j_table(ModelKind.SYMMETRIC, flip_channel(0.1, 0.1), nu_max=5.0, grid_size=60)


class TestTransferMaps:
    """
    **Feature: exitsbm, Property 29: Iterating T from J(0) reproduces J(ν_t) of density evolution**
    """

    @pytest.mark.unit
    def test_transfer_is_j_of_update(self, erasure_channel):
        tmap = symmetric_transfer_map(2.0, erasure_channel, grid_size=80)
        nu = 0.3
        i_in = tmap.j(nu)
        assert tmap(i_in) == pytest.approx(tmap.j(tmap.update(nu)), abs=1e-9)
        assert transfer_symmetric(i_in, 2.0, erasure_channel, tmap.table) == pytest.approx(tmap(i_in), abs=1e-12)
        assert tmap.i_max == 1.0
        assert tmap.params == {"mu": 2.0}

    @pytest.mark.unit
    def test_staircase_follows_de_trace(self, erasure_channel):
        mu = 2.5
        tmap = symmetric_transfer_map(mu, erasure_channel, grid_size=80)
        trace = de_iterate_symmetric(mu, erasure_channel, t_max=15)
        stairs = staircase(tmap, max_steps=15, tol=0.0)
        for t, value in enumerate(stairs.values):
            assert value == pytest.approx(tmap.j(trace.state_at(t)), abs=1e-8)
        mapped = staircase_map(tmap, tmap.j(0.0), max_steps=15, tol=0.0)
        for t, value in enumerate(mapped.values):
            assert value == pytest.approx(tmap.j(trace.state_at(t)), abs=1e-6)

    @pytest.mark.unit
    def test_single_map_parameters(self, erasure_channel):
        smap = single_transfer_map(0.5, 0.1, erasure_channel, grid_size=40)
        assert smap.params["threshold_nu"] == pytest.approx(math.log(9.0))
        assert smap.i_max == pytest.approx(binary_entropy_bits(0.1))
        assert smap.table.nu_max == pytest.approx(max(1.05 * 0.5 * 9.0, 1.0))
        with pytest.raises(ValidationError):
            single_transfer_map(0.5, 0.0, erasure_channel)
        with pytest.raises(ValidationError):
            symmetric_transfer_map(-1.0, erasure_channel)

    @pytest.mark.unit
    def test_single_transfer_matches_map(self):
        channel = flip_channel(0.4)
        lam, k_frac = 2 / (3 * math.e), 0.1
        smap = single_transfer_map(lam, k_frac, channel, grid_size=60)
        for v in (0.0, 0.2, 1.0):
            i_in = smap.j(v)
            out = transfer_single(i_in, lam, k_frac, channel, smap.table)
            assert out == pytest.approx(smap(i_in), abs=1e-12)
            assert 0.0 <= out <= smap.i_max + 1e-12


class TestStaircaseAndFixedPoints:
    """
    **Feature: exitsbm, Property 30: Staircases settle on stable fixed points**
    """

    @settings(max_examples=50)
    @given(slope=st.floats(min_value=0.05, max_value=0.9), start=st.floats(min_value=0.0, max_value=1.0))
    def test_contraction_converges(self, slope, start):
        fixed = 0.4
        stairs = staircase_map(lambda i: fixed + slope * (i - fixed), start, max_steps=2000, tol=1e-12)
        assert stairs.converged
        assert stairs.values[-1] == pytest.approx(fixed, abs=1e-10)
        assert stairs.steps <= len(stairs.values) - 1

    @pytest.mark.unit
    def test_zero_tolerance_runs_all_steps(self):
        stairs = staircase_map(lambda i: 0.5 * i, 1.0, max_steps=7, tol=0.0)
        assert len(stairs.values) == 8
        assert not stairs.converged

    @pytest.mark.unit
    def test_fixed_points_of_explicit_map(self):
        # crossings at 0.2 (stable), 0.5 (unstable) and 0.8 (stable)
        def transfer(i):
            return i - 4 * (i - 0.2) * (i - 0.5) * (i - 0.8)

        crossings = find_fixed_points(transfer, grid_size=101)
        assert [c.i for c in crossings] == pytest.approx([0.2, 0.5, 0.8], abs=1e-9)
        assert [c.stable for c in crossings] == [True, False, True]
        assert crossings[0].operating_point and not crossings[1].operating_point
        assert all(c.nu is None for c in crossings)

    @pytest.mark.integration
    def test_strong_graph_operating_point(self, erasure_channel):
        curve = build_exit_curve(symmetric_transfer_map(6.0, erasure_channel), grid_size=256)
        op = curve.operating_point
        assert op is not None and op.stable
        assert op.i > 0.99
        assert op.residual <= 1e-6
        assert len(curve.i_in) == len(curve.i_out) == 256
        assert curve.staircase.values[0] == pytest.approx(j_symmetric(0.0, erasure_channel))
        assert curve.staircase.values[-1] == pytest.approx(op.i, abs=1e-6)

    @pytest.mark.unit
    def test_uninformative_chart_is_stuck_at_zero(self, erased_channel):
        curve = build_exit_curve(symmetric_transfer_map(6.0, erased_channel, grid_size=60), grid_size=64)
        op = curve.operating_point
        assert op is not None
        assert op.i == pytest.approx(0.0, abs=1e-12)
        assert not op.stable

    @pytest.mark.unit
    def test_curve_grid_check(self, erasure_channel):
        with pytest.raises(ValidationError):
            build_exit_curve(symmetric_transfer_map(1.0, erasure_channel, grid_size=20), grid_size=1)


CHART_PARAMETERS = [(2.0, 0.1, 0.1), (2.0, 0.1, 1.0), (6.0, 0.4, 0.1), (1.5, 0.2, 0.5)]


@lru_cache(maxsize=None)
def _chart(mu: float, alpha: float, epsilon: float):
    tmap = symmetric_transfer_map(mu, flip_channel(alpha, epsilon))
    return tmap, build_exit_curve(tmap)


class TestChartAgainstDensityEvolution:
    """
    **Feature: exitsbm, Property 46: Transfer maps are monotone and their operating point is the DE fixed point**
    """

    @pytest.mark.integration
    @pytest.mark.parametrize("mu,alpha,epsilon", CHART_PARAMETERS)
    def test_operating_point_is_the_de_fixed_point(self, mu, alpha, epsilon):
        _, curve = _chart(mu, alpha, epsilon)
        trace = de_iterate_symmetric(mu, flip_channel(alpha, epsilon))
        op = curve.operating_point
        assert trace.converged
        assert op is not None
        assert op.nu == pytest.approx(trace.nu_bar, abs=1e-4)

    @pytest.mark.integration
    @pytest.mark.parametrize("mu,alpha,epsilon", CHART_PARAMETERS)
    def test_transfer_map_is_nondecreasing(self, mu, alpha, epsilon):
        tmap, curve = _chart(mu, alpha, epsilon)
        assert np.all(np.diff(curve.i_in) >= 0)
        assert np.all(np.diff(curve.i_out) >= -1e-12)
        grid = np.linspace(tmap.j(0.0), tmap.i_max, 64)
        assert np.all(np.diff([tmap(i) for i in grid]) >= -1e-9)

    @pytest.mark.integration
    @pytest.mark.parametrize("mu,alpha,epsilon", CHART_PARAMETERS)
    def test_every_crossing_is_a_fixed_point(self, mu, alpha, epsilon):
        tmap, curve = _chart(mu, alpha, epsilon)
        assert curve.crossings
        for crossing in curve.crossings:
            assert crossing.residual <= 1e-8
            assert abs(tmap(crossing.i) - crossing.i) <= 1e-6


class TestThresholdScan:
    """
    **Feature: exitsbm, Property 31: Scans report a transition only for a jump of the operating point**
    """

    @pytest.mark.integration
    def test_symmetric_model_has_no_threshold(self):
        report = threshold_scan(ModelKind.SYMMETRIC, "mu", 0.1, 10.0, {"alpha": 0.4, "epsilon": 0.5},
                                bisect_tol=1e-2, t_max=5000)
        assert not report.transition
        assert report.critical_value is None
        assert report.fixed == {"alpha": 0.4, "epsilon": 0.5}
        assert report.bracket_history[0] == (0.1, 10.0)
        assert all(0.0 <= p.i_operating <= 1.0 for p in report.evaluations)

    @pytest.mark.unit
    def test_constant_predicate_stops_early(self):
        report = threshold_scan(ModelKind.SYMMETRIC, "mu", 5.0, 6.0, {"alpha": 0.1, "epsilon": 1.0},
                                bisect_tol=1e-3)
        assert not report.transition
        assert len(report.evaluations) == 2
        assert report.reason == "escape predicate is constant over the range"

    @pytest.mark.unit
    @pytest.mark.parametrize("model,param,lo,hi,fixed", [
        (ModelKind.SYMMETRIC, "lambda", 0.1, 1.0, {"alpha": 0.4}),
        (ModelKind.SINGLE, "mu", 0.1, 1.0, {"alpha": 0.4, "k_frac": 0.1}),
        (ModelKind.SYMMETRIC, "mu", 1.0, 1.0, {"alpha": 0.4}),
        (ModelKind.SINGLE, "lambda", 0.1, 1.0, {"alpha": 0.4}),
    ])
    def test_invalid_scans(self, model, param, lo, hi, fixed):
        with pytest.raises(ValidationError):
            threshold_scan(model, param, lo, hi, fixed)
