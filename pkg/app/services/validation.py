"""
Desk-scale validation suite.

Every check returns a CheckResult with the measured value and the tolerance
it was held to. ``quick`` runs the subset that finishes in well under a
minute; the full suite adds the large-graph and Monte Carlo checks.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.core.config import Config
from app.core.exceptions import AppException, ValidationError
from app.core.logging import StructuredLogger
from app.models.analysis_models import ModelKind
from app.models.channel_models import LlrModel
from app.models.graph_models import SingleCommunityParams, SymmetricSbmParams
from app.models.responses import CheckResult, ValidationReport
from app.services.bp import (
    estimate_symmetric,
    f_message,
    m_message,
    misclassification_rate,
    run_bp_single,
    run_bp_symmetric,
    tree_llr_single,
    tree_llr_symmetric,
)
from app.services.channels import change_of_measure_sum, flip_channel, llr_spec, node_llrs
from app.services.devo import (
    de_iterate_single,
    de_iterate_symmetric,
    h_nu,
    mc_tree_validate,
    residual_error_symmetric,
    single_update,
    smallest_fixed_point_bracket,
)
from app.services.exit_chart import (
    build_exit_curve,
    j_inverse,
    j_symmetric,
    single_transfer_map,
    staircase_map,
    symmetric_transfer_map,
    threshold_scan,
)
from app.services.graphgen import (
    degree_chisquare,
    first_generation,
    graph_neighbourhood,
    sample_single_community,
    sample_single_tree,
    sample_symmetric_sbm,
    sample_symmetric_tree,
    single_block_zscores,
    symmetric_block_zscores,
)
from app.services.numerics import monte_carlo_expect

FAULTS = ("f_sign",)

REPRESENTATION_SETS = ((2.0, 0.1, 0.1), (2.0, 1.0, 0.4), (6.0, 0.1, 0.4), (6.0, 1.0, 0.1))


def _symmetric_from_mu(mu: float, b: float) -> SymmetricSbmParams:
    """Rates for tree sampling; n only has to keep a/n below one."""
    return SymmetricSbmParams(n=10 ** 6, a=b + mu * np.sqrt(b), b=b)


class ValidationSuite:
    """Named numerical checks run by the validate command."""

    def __init__(self, config: Config, logger: StructuredLogger, threads: int = 1):
        self.config = config
        self.logger = logger
        self.threads = threads
        self._f: Callable = f_message

    def _checks(self, quick: bool) -> List[Tuple[str, Callable[[int, bool], List[CheckResult]]]]:
        checks = [
            ("messages", self.check_messages),
            ("channels", self.check_channels),
            ("density_evolution", self.check_density_evolution),
            ("quadrature", self.check_quadrature),
            ("graph_sampler", self.check_graph_sampler),
            ("tree_oracle", self.check_tree_oracle),
            ("j_function", self.check_j_function),
            ("representation", self.check_representation),
            ("operating_points", self.check_operating_points),
        ]
        if not quick:
            checks += [
                ("trivial_bp", self.check_trivial_bp),
                ("error_prediction", self.check_error_prediction),
                ("gaussianity", self.check_gaussianity),
                ("phase_transition", self.check_phase_transition),
            ]
        return checks

    def run(self, quick: bool = False, seed: int = 0, inject_fault: Optional[str] = None) -> ValidationReport:
        """Run every check and collect the results; failures never stop the suite."""
        if inject_fault is not None and inject_fault not in FAULTS:
            raise ValidationError(f"unknown fault {inject_fault!r}", details={"known": list(FAULTS)})
        self._f = f_message
        if inject_fault == "f_sign":
            self._f = lambda x, beta: -f_message(x, beta)

        results: List[CheckResult] = []
        for group, check in self._checks(quick):
            try:
                group_results = check(seed, quick)
            except AppException as exc:
                group_results = [CheckResult(name=group, passed=False, detail=f"{type(exc).__name__}: {exc}")]
            for result in group_results:
                log = self.logger.info if result.passed else self.logger.warning
                log("Check finished", check=result.name, passed=result.passed,
                    measured=result.measured, tolerance=result.tolerance)
            results.extend(group_results)

        return ValidationReport(
            seed=seed,
            quick=quick,
            inject_fault=inject_fault,
            passed=all(r.passed for r in results),
            checks=results,
        )

    def check_messages(self, seed: int, quick: bool) -> List[CheckResult]:
        beta = 0.5
        f = self._f
        points = np.array([0.5, 2.0, 10.0])
        odd = float(np.max(np.abs(f(-points, beta) + f(points, beta))))

        grid = np.linspace(-100, 100, 4001)
        values = f(grid, beta)
        core = np.abs(grid) <= 5
        steps = np.diff(values)
        increasing = bool(np.all(steps >= -1e-12) and np.all(np.diff(values[core]) > 0))
        bound = float(np.max(np.abs(values)))

        reference = 0.5 * np.log((np.e ** 3 + 1) / (np.e ** 2 + np.e))
        ref_err = float(abs(f(1.0, beta) - reference))

        rho, nu = 2.0, float(np.log(9.0))
        m_grid = nu + np.linspace(-50, 50, 2001)
        m_values = m_message(m_grid, rho, nu)
        m_ok = bool(np.all(np.diff(m_values) >= 0) and m_values.min() >= 0 and m_values.max() <= np.log(rho))
        m_limits = float(max(abs(m_values[0]), abs(m_values[-1] - np.log(rho)),
                             abs(m_message(nu, rho, nu) - np.log((rho + 1) / 2))))
        return [
            CheckResult(name="f_message.odd", passed=odd <= 1e-12, measured=odd, tolerance=1e-12),
            CheckResult(name="f_message.increasing_bounded", passed=increasing and bound <= beta + 1e-12,
                        measured=bound, tolerance=beta, detail="nondecreasing on [-100, 100], |F| ≤ β"),
            CheckResult(name="f_message.reference", passed=ref_err <= 1e-12, measured=ref_err, tolerance=1e-12,
                        detail="F(1) at β = 0.5 against the closed form"),
            CheckResult(name="m_message.range", passed=m_ok and m_limits <= 1e-12, measured=m_limits,
                        tolerance=1e-12, detail="monotone, inside [0, log ρ], limits and midpoint"),
        ]

    def check_channels(self, seed: int, quick: bool) -> List[CheckResult]:
        channels = [flip_channel(alpha, eps) for alpha in (0.1, 0.4) for eps in (0.0, 0.1, 1.0)]
        channels += [flip_channel(0.25)]
        worst = max(abs(change_of_measure_sum(ch) - 1.0) for ch in channels)
        return [CheckResult(name="channels.change_of_measure", passed=worst <= 1e-12, measured=worst,
                            tolerance=1e-12, detail="Σ α+ (α-/α+) over used symbols")]

    def check_density_evolution(self, seed: int, quick: bool) -> List[CheckResult]:
        n_nodes = self.config.quadrature_nodes
        trace = de_iterate_symmetric(6.0, flip_channel(0.4, 0.1), tol=self.config.de_tol, n_nodes=n_nodes)
        seq = np.asarray(trace.nu_seq)
        monotone = bool(np.all(np.diff(seq) >= -1e-12))
        bounded = bool(seq.max() <= trace.bound + 1e-12)
        nu_bar = trace.nu_bar
        lo, hi = smallest_fixed_point_bracket(6.0, flip_channel(0.4, 0.1), n_nodes=n_nodes)
        smallest = lo - 1e-6 <= nu_bar <= hi + 1e-6

        single = de_iterate_single(2 / (3 * np.e), float(np.log(9.0)), flip_channel(0.4), n_nodes=n_nodes)
        single_bounded = bool(max(single.v_seq) <= single.bound + 1e-12)

        erased = flip_channel(0.4, 0.0)
        stuck = de_iterate_symmetric(6.0, erased, t_max=50, n_nodes=n_nodes)
        stuck_max = float(max(stuck.nu_seq))
        stuck_error = residual_error_symmetric(stuck.nu_bar, erased)

        tmap = symmetric_transfer_map(6.0, erased, grid_size=self.config.j_grid_size, n_nodes=n_nodes)
        start = tmap.j(0.0)
        return [
            CheckResult(name="devo.monotone_bounded", passed=monotone and bounded and trace.converged
                        and 8.0 < nu_bar < 9.0, measured=nu_bar, tolerance=trace.bound,
                        detail="μ = 6, α = 0.4, ε = 0.1: ν_t nondecreasing, ≤ μ²/4, fixed point in (8, 9)"),
            CheckResult(name="devo.smallest_fixed_point", passed=smallest, measured=nu_bar, tolerance=hi - lo,
                        detail=f"first sign change of ν − μ²/4·h(ν) on a 1e4-point grid: [{lo:.6f}, {hi:.6f}]"),
            CheckResult(name="devo.single_bounded", passed=single_bounded, measured=single.v_bar,
                        tolerance=single.bound, detail="v_t ≤ λe^ν"),
            CheckResult(name="devo.trivial_point", passed=stuck_max == 0.0 and abs(stuck_error - 0.5) <= 1e-12
                        and start == 0.0 and tmap(start) == 0.0,
                        measured=stuck_error, tolerance=1e-12, detail="ε = 0 keeps ν ≡ 0 and the chart at (0, 0)"),
        ]

    def check_quadrature(self, seed: int, quick: bool) -> List[CheckResult]:
        channel = flip_channel(0.1, 0.1)
        u_plus = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG).plus_dist
        nu = 2.0
        exact = h_nu(nu, u_plus, self.config.quadrature_nodes)
        doubled = h_nu(nu, u_plus, 2 * self.config.quadrature_nodes)

        lam, threshold = 2 / (3 * np.e), float(np.log(9.0))
        u_one = llr_spec(flip_channel(0.4), LlrModel.SINGLE_FULL_LOG).plus_dist
        single_gap = max(
            abs(single_update(v, lam, threshold, u_one, self.config.quadrature_nodes)
                - single_update(v, lam, threshold, u_one, 2 * self.config.quadrature_nodes))
            for v in (0.5, 2.0)
        )

        def integrand(z):
            return np.tanh(nu + np.sqrt(nu) * z[:, None] + u_plus.values[None, :]) @ u_plus.probs

        estimate, se = monte_carlo_expect(integrand, 200_000 if quick else 2_000_000, seed)
        gap = abs(estimate - exact)
        tol = 4 * se + 1e-12
        return [
            CheckResult(name="numerics.quadrature_vs_monte_carlo", passed=gap <= tol, measured=gap, tolerance=tol,
                        detail="h(2) by Gauss-Hermite against Monte Carlo"),
            CheckResult(name="numerics.quadrature_doubling", passed=abs(exact - doubled) <= 1e-10,
                        measured=abs(exact - doubled), tolerance=1e-10, detail="h(2) at n and 2n nodes"),
            CheckResult(name="numerics.quadrature_doubling_single", passed=single_gap <= 1e-10,
                        measured=float(single_gap), tolerance=1e-10,
                        detail="single-model v-update at v = 0.5 and 2, n and 2n nodes"),
        ]

    def check_graph_sampler(self, seed: int, quick: bool) -> List[CheckResult]:
        params = SymmetricSbmParams(n=10 ** 4 if quick else 10 ** 5, a=20.0, b=10.0)
        sample = sample_symmetric_sbm(params, flip_channel(0.4, 0.5), seed)
        mean_degree = (params.a + params.b) / 2
        _, p_value = degree_chisquare(sample.graph.degrees(), mean_degree)
        z_within, z_across = symmetric_block_zscores(sample, params)

        single = SingleCommunityParams(n=10 ** 4, k=1000, p=0.004, q=0.002)
        single_sample = sample_single_community(single, flip_channel(0.2), seed + 1)
        z_inside, z_outside = single_block_zscores(single_sample, single)

        trees = 2000 if quick else 10000
        seeds = np.random.SeedSequence([seed, 2]).generate_state(trees)
        tree_degree, tree_same, children = first_generation(
            sample_symmetric_tree(params.a, params.b, flip_channel(0.4, 0.5), 1, int(s)) for s in seeds)
        graph_degree, graph_same = graph_neighbourhood(sample)
        degree_z = abs(graph_degree - tree_degree) / np.sqrt(2 * mean_degree / params.n + mean_degree / trees)
        share = params.a / (params.a + params.b)
        share_sd = np.sqrt(share * (1 - share) * (1 / max(sample.graph.num_edges, 1) + 1 / max(children, 1)))
        label_z = abs(graph_same - tree_same) / share_sd
        local_z = max(degree_z, label_z)

        block_z = max(abs(z_within), abs(z_across))
        single_z = max(abs(z_inside), abs(z_outside))
        return [
            CheckResult(name="graphgen.degree_distribution", passed=p_value > 0.01, measured=p_value,
                        tolerance=0.01, detail=f"chi-square p-value against Poisson(15), n = {params.n}"),
            CheckResult(name="graphgen.block_densities_symmetric", passed=block_z <= 3.0, measured=block_z,
                        tolerance=3.0, detail="largest of the within-block and across-block z-scores"),
            CheckResult(name="graphgen.block_densities_single", passed=single_z <= 3.0, measured=single_z,
                        tolerance=3.0, detail="inside C* against p, elsewhere against q, n = 1e4"),
            CheckResult(name="graphgen.local_tree_agreement", passed=bool(local_z <= 4.0),
                        measured=float(local_z), tolerance=4.0,
                        detail=f"degree and same-label share against {trees} depth-1 trees"),
        ]

    def check_tree_oracle(self, seed: int, quick: bool) -> List[CheckResult]:
        depth = 2
        channel = flip_channel(0.1, 0.1)
        params = _symmetric_from_mu(2.0, 400.0)
        trees = 10 if quick else 100
        seeds = np.random.SeedSequence(seed).generate_state(trees + 20)

        worst = 0.0
        for k in range(trees):
            tree = sample_symmetric_tree(params.a, params.b, channel, depth, int(seeds[k]),
                                         node_cap=self.config.tree_node_cap)
            h = node_llrs(channel, tree.symbol, LlrModel.SYMMETRIC_HALF_LOG)
            beliefs = run_bp_symmetric(tree.to_graph(), h, params.beta, depth,
                                       clamp=self.config.belief_clamp).beliefs
            oracle = tree_llr_symmetric(tree, params.beta, channel)
            worst = max(worst, abs(float(beliefs[0]) - oracle.root))

        single = SingleCommunityParams(n=10000, k=1000, p=0.004, q=0.002)
        single_channel = flip_channel(0.2)
        worst_single = 0.0
        for k in range(20):
            tree = sample_single_tree(single, single_channel, depth, int(seeds[trees + k]),
                                      node_cap=self.config.tree_node_cap)
            h = node_llrs(single_channel, tree.symbol, LlrModel.SINGLE_FULL_LOG)
            beliefs = run_bp_single(tree.to_graph(), h, single, depth, clamp=self.config.belief_clamp).beliefs
            oracle = tree_llr_single(tree, single, single_channel, frontier="observed")
            worst_single = max(worst_single, abs(float(beliefs[0]) - oracle.root))

        return [
            CheckResult(name="bp.tree_oracle_symmetric", passed=worst <= 1e-9, measured=worst, tolerance=1e-9,
                        detail=f"{trees} trees, b = 400, μ = 2, depth 2"),
            CheckResult(name="bp.tree_oracle_single", passed=worst_single <= 1e-9, measured=worst_single,
                        tolerance=1e-9, detail="20 trees, depth 2"),
        ]

    def check_j_function(self, seed: int, quick: bool) -> List[CheckResult]:
        tmap = symmetric_transfer_map(2.0, flip_channel(0.1, 0.1), grid_size=self.config.j_grid_size,
                                      n_nodes=self.config.quadrature_nodes)
        table = tmap.table
        monotone = bool(np.all(np.diff(table.values) >= 0))
        targets = np.linspace(table.values[0], table.values[-1], 52)[1:-1]
        worst = max(abs(table.evaluate(j_inverse(table, i).nu) - i) for i in targets)

        bsc = flip_channel(0.1, 1.0)
        bsc_gap = abs(j_symmetric(0.0, bsc) - (1 - (-(0.1 * np.log2(0.1) + 0.9 * np.log2(0.9)))))
        return [
            CheckResult(name="exit.j_monotone", passed=monotone, detail="tabulated J nondecreasing"),
            CheckResult(name="exit.j_round_trip", passed=worst <= 1e-8, measured=float(worst), tolerance=1e-8),
            CheckResult(name="exit.j_side_information", passed=bsc_gap <= 1e-12, measured=float(bsc_gap),
                        tolerance=1e-12, detail="J(0) = 1 − H_b(0.1) for ε = 1, α = 0.1"),
        ]

    def check_representation(self, seed: int, quick: bool) -> List[CheckResult]:
        steps = 20
        n_nodes = self.config.quadrature_nodes
        worst = 0.0
        for mu, eps, alpha in REPRESENTATION_SETS:
            channel = flip_channel(alpha, eps)
            tmap = symmetric_transfer_map(mu, channel, grid_size=self.config.j_grid_size, n_nodes=n_nodes)
            trace = de_iterate_symmetric(mu, channel, t_max=steps, tol=self.config.de_tol, n_nodes=n_nodes)
            stairs = staircase_map(tmap, tmap.j(0.0), max_steps=steps, tol=0.0)
            for t, value in enumerate(stairs.values):
                worst = max(worst, abs(value - tmap.j(trace.state_at(t))))

        lam, k_frac = 2 / (3 * np.e), 0.1
        channel = flip_channel(0.4)
        smap = single_transfer_map(lam, k_frac, channel, grid_size=self.config.j_grid_size, n_nodes=n_nodes)
        strace = de_iterate_single(lam, smap.params["threshold_nu"], channel, t_max=steps,
                                   tol=self.config.de_tol, n_nodes=n_nodes)
        sstairs = staircase_map(smap, smap.j(0.0), max_steps=steps, tol=0.0)
        worst_single = max(abs(value - smap.j(strace.state_at(t))) for t, value in enumerate(sstairs.values))
        return [
            CheckResult(name="exit.representation_symmetric", passed=worst <= 1e-6, measured=float(worst),
                        tolerance=1e-6, detail="iterated T from J(0) against J(ν_t), t ≤ 20"),
            CheckResult(name="exit.representation_single", passed=worst_single <= 1e-6,
                        measured=float(worst_single), tolerance=1e-6),
        ]

    def check_operating_points(self, seed: int, quick: bool) -> List[CheckResult]:
        def start(alpha, eps):
            return j_symmetric(0.0, flip_channel(alpha, eps))

        close_gap = abs(start(0.4, 0.1) - start(0.4, 1.0))
        wide_gap = abs(start(0.1, 0.1) - start(0.1, 1.0))

        channel = flip_channel(0.4, 0.1)
        tmap = symmetric_transfer_map(6.0, channel, grid_size=self.config.j_grid_size,
                                      n_nodes=self.config.quadrature_nodes)
        curve = build_exit_curve(tmap, grid_size=self.config.curve_grid_size, crossing_tol=self.config.crossing_tol)
        op = curve.operating_point
        op_i = op.i if op is not None else 0.0
        return [
            CheckResult(name="exit.start_point_gap_alpha_0.4", passed=close_gap < 0.05, measured=float(close_gap),
                        tolerance=0.05, detail="J(0) starting points, not operating points: ε = 0.1 against ε = 1"),
            CheckResult(name="exit.start_point_gap_alpha_0.1", passed=wide_gap > 0.3, measured=float(wide_gap),
                        tolerance=0.3, detail="J(0) starting points; must exceed the tolerance"),
            CheckResult(name="exit.operating_point_mu_6", passed=op is not None and op.stable and op_i > 0.99,
                        measured=float(op_i), tolerance=0.99, detail="α = 0.4, ε = 0.1"),
        ]

    def check_trivial_bp(self, seed: int, quick: bool) -> List[CheckResult]:
        params = SymmetricSbmParams(n=100_000, a=20.0, b=10.0)
        channel = flip_channel(0.4, 0.0)
        sample = sample_symmetric_sbm(params, channel, seed)
        h = node_llrs(channel, sample.symbols, LlrModel.SYMMETRIC_HALF_LOG)
        state = run_bp_symmetric(sample.graph, h, params.beta, 3, clamp=self.config.belief_clamp)
        error = misclassification_rate(estimate_symmetric(state.beliefs), sample.labels)
        return [CheckResult(name="bp.trivial_error", passed=abs(error - 0.5) <= 0.01 and
                            bool(np.all(state.beliefs == 0)), measured=error, tolerance=0.01,
                            detail="ε = 0, n = 1e5, t = 3")]

    def _bp_error(self, params: SymmetricSbmParams, channel, t: int, seed: int) -> float:
        sample = sample_symmetric_sbm(params, channel, seed)
        h = node_llrs(channel, sample.symbols, LlrModel.SYMMETRIC_HALF_LOG)
        state = run_bp_symmetric(sample.graph, h, params.beta, t, clamp=self.config.belief_clamp)
        return misclassification_rate(estimate_symmetric(state.beliefs), sample.labels)

    def check_error_prediction(self, seed: int, quick: bool) -> List[CheckResult]:
        params = SymmetricSbmParams(n=100_000, a=160.0, b=100.0)
        channel = flip_channel(0.4, 0.1)
        t = 2
        seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(5)]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            errors = list(pool.map(lambda s: self._bp_error(params, channel, t, s), seeds))
        trace = de_iterate_symmetric(params.mu, channel, t_max=t, n_nodes=self.config.quadrature_nodes)
        predicted = residual_error_symmetric(trace.state_at(t), channel)
        gap = abs(float(np.mean(errors)) - predicted)
        return [CheckResult(name="bp.error_prediction", passed=gap <= 0.03, measured=gap, tolerance=0.03,
                            detail=f"mean over 5 seeds {np.mean(errors):.4f}, prediction {predicted:.4f}")]

    def check_gaussianity(self, seed: int, quick: bool) -> List[CheckResult]:
        params = _symmetric_from_mu(2.0, 400.0)
        report = mc_tree_validate(
            ModelKind.SYMMETRIC, params, flip_channel(0.1, 0.1), depth=2, num_samples=100_000, seed=seed,
            chunk_size=self.config.mc_chunk_size, threads=self.threads,
            sample_budget=self.config.mc_sample_budget, n_nodes=self.config.quadrature_nodes,
        )
        ks = max((m.ks_statistic or 0.0) for m in report.labels)
        moments_ok = all(m.mean_ok and m.variance_ok and m.ks_ok is not False for m in report.labels)
        return [
            CheckResult(name="devo.gaussianity", passed=moments_ok, measured=ks, tolerance=report.ks_tolerance,
                        detail="KS distance, mean and variance of Φ at depth 2"),
            CheckResult(name="devo.change_of_measure_monte_carlo", passed=report.change_of_measure_ok,
                        measured=report.change_of_measure, tolerance=3 * report.change_of_measure_se,
                        detail="E[exp(−2Γ) | +1] against 1"),
        ]

    def check_phase_transition(self, seed: int, quick: bool) -> List[CheckResult]:
        k_frac, alpha = 0.01, 0.4
        common = dict(
            escape_fraction=self.config.escape_fraction,
            min_jump_fraction=self.config.min_jump_fraction,
            t_max=self.config.scan_t_max,
            de_tol=self.config.de_tol,
            n_nodes=self.config.quadrature_nodes,
        )
        single = threshold_scan(ModelKind.SINGLE, "lambda", 0.05, 2.0,
                                {"alpha": alpha, "epsilon": None, "k_frac": k_frac}, bisect_tol=1e-3, **common)
        results = []
        if single.transition and single.critical_value is not None:
            lam_star = single.critical_value
            width = single.bracket[1] - single.bracket[0]
            channel = flip_channel(alpha)
            above = build_exit_curve(single_transfer_map(1.05 * lam_star, k_frac, channel,
                                                         grid_size=self.config.j_grid_size))
            below = build_exit_curve(single_transfer_map(0.95 * lam_star, k_frac, channel,
                                                         grid_size=self.config.j_grid_size))
            above_ok = all(c.i >= 0.99 * above.i_max for c in above.crossings)
            below_ok = any(c.i < 0.5 * below.i_max for c in below.crossings)
            results.append(CheckResult(name="exit.single_threshold", passed=width <= 1e-3 and above_ok and below_ok,
                                       measured=lam_star, tolerance=1e-3,
                                       detail="bracket width, no early crossing above λ*, low crossing below"))
        else:
            results.append(CheckResult(name="exit.single_threshold", passed=False, detail=single.reason))

        symmetric = threshold_scan(ModelKind.SYMMETRIC, "mu", 0.1, 50.0,
                                   {"alpha": alpha, "epsilon": 0.5}, bisect_tol=1e-3, **common)
        results.append(CheckResult(name="exit.symmetric_no_threshold", passed=not symmetric.transition,
                                   measured=symmetric.jump, tolerance=self.config.min_jump_fraction,
                                   detail=symmetric.reason))
        return results
