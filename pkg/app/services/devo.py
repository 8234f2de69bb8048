"""
Density evolution for both block models.

The symmetric model tracks ν_t with ν_{t+1} = μ²/4·h(ν_t); the single
community model tracks v_t with v_{t+1} = λ·e^ν·E[σ(v_t/2 + √v_t Z + U₁ − ν)],
where σ is the logistic function. Trace index t matches BP run with t
iterations. Residual-error predictors and a Monte Carlo check of the
Gaussian approximation on sampled trees live here as well.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import special, stats

from app.core.exceptions import ResourceLimitError, ValidationError
from app.models.analysis_models import (
    DeTraceSingle,
    DeTraceSymmetric,
    LabelMoments,
    McValidationReport,
    ModelKind,
)
from app.models.channel_models import LlrModel, SideInfoChannel
from app.models.graph_models import SingleCommunityParams, SymmetricSbmParams
from app.services.bp import f_message, m_message
from app.services.channels import llr_spec, llr_values, sample_side_info
from app.services.graphgen import expected_tree_size
from app.services.numerics import (
    DEFAULT_QUADRATURE_NODES,
    DiscreteDistribution,
    q_function,
    quadrature_rule,
)

DEFAULT_DE_TOL = 1e-10
DEFAULT_DE_T_MAX = 500
TIE_TOL = 1e-12


def _check_state(value: float, name: str) -> None:
    if not np.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be a finite nonnegative number", details={name: value})


def h_nu(nu: float, u_plus: DiscreteDistribution, n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """h(ν) = E[tanh(ν + √ν Z + U₊)] over standard normal Z and the discrete U₊."""
    _check_state(nu, "nu")
    rule = quadrature_rule(n_nodes)
    shifts = nu + np.sqrt(nu) * rule.nodes[:, None] + u_plus.values[None, :]
    return float(rule.weights @ (np.tanh(shifts) @ u_plus.probs))


def symmetric_update(nu: float, mu: float, u_plus: DiscreteDistribution,
                     n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """One DE step ν ↦ μ²/4·h(ν)."""
    return mu ** 2 / 4 * h_nu(nu, u_plus, n_nodes)


def smallest_fixed_point_bracket(mu: float, channel: SideInfoChannel, points: int = 10_000,
                                 n_nodes: int = DEFAULT_QUADRATURE_NODES) -> Tuple[float, float]:
    """
    Grid cell of the first sign change of ν − μ²/4·h(ν) on a uniform grid over [0, μ²/4].

    Returns (0, 0) when ν = 0 is itself fixed (no side information).
    """
    u_plus = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG).plus_dist
    grid = np.linspace(0.0, mu ** 2 / 4, points)
    gaps = np.array([nu - symmetric_update(nu, mu, u_plus, n_nodes) for nu in grid])
    if gaps[0] >= 0:
        return 0.0, 0.0
    hits = np.flatnonzero(gaps >= 0)
    k = int(hits[0]) if hits.size else points - 1
    return float(grid[k - 1]), float(grid[k])


def single_update(v: float, lam: float, threshold_nu: float, u_one: DiscreteDistribution,
                  n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """One DE step v ↦ λ·E[1/(e^{−ν} + e^{−(v/2 + √v Z) − U₁})]."""
    _check_state(v, "v")
    if lam == 0:
        return 0.0
    rule = quadrature_rule(n_nodes)
    shifts = v / 2 + np.sqrt(v) * rule.nodes[:, None] + u_one.values[None, :] - threshold_nu
    inner = special.expit(shifts) @ u_one.probs
    return float(lam * np.exp(threshold_nu) * (rule.weights @ inner))


def residual_error_symmetric(nu_bar: float, channel: SideInfoChannel) -> float:
    """
    ½(E[Q((ν̄+U₊)/√ν̄)] + E[Q((ν̄−U₋)/√ν̄)]).

    At ν̄ = 0 the one-sided limit is used, with LLR mass at zero counted ½.
    """
    _check_state(nu_bar, "nu_bar")
    spec = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG)
    u_plus, u_minus = spec.plus_dist, spec.minus_dist
    if nu_bar == 0:
        plus_err = u_plus.mass_where(u_plus.values < -TIE_TOL) + 0.5 * u_plus.mass_where(np.abs(u_plus.values) <= TIE_TOL)
        minus_err = u_minus.mass_where(u_minus.values > TIE_TOL) + 0.5 * u_minus.mass_where(np.abs(u_minus.values) <= TIE_TOL)
        return 0.5 * (plus_err + minus_err)
    s = np.sqrt(nu_bar)
    plus_err = float(u_plus.probs @ q_function((nu_bar + u_plus.values) / s))
    minus_err = float(u_minus.probs @ q_function((nu_bar - u_minus.values) / s))
    return 0.5 * (plus_err + minus_err)


def single_error_rates(v: float, threshold_nu: float, channel: SideInfoChannel) -> Tuple[float, float]:
    """
    Predicted (false inclusion, miss) probabilities of the MAP rule Γ ≥ ν.

    Given label 0, Γ ~ N(−v/2 + U₀, v); given label 1, Γ ~ N(v/2 + U₁, v).
    """
    _check_state(v, "v")
    spec = llr_spec(channel, LlrModel.SINGLE_FULL_LOG)
    u_one, u_zero = spec.plus_dist, spec.minus_dist
    nu = threshold_nu
    if v == 0:
        tie_zero = np.abs(u_zero.values - nu) <= TIE_TOL
        tie_one = np.abs(u_one.values - nu) <= TIE_TOL
        type_i = u_zero.mass_where((u_zero.values > nu) & ~tie_zero) + 0.5 * u_zero.mass_where(tie_zero)
        type_ii = u_one.mass_where((u_one.values < nu) & ~tie_one) + 0.5 * u_one.mass_where(tie_one)
        return type_i, type_ii
    s = np.sqrt(v)
    type_i = float(u_zero.probs @ q_function((nu + v / 2 - u_zero.values) / s))
    type_ii = float(u_one.probs @ q_function((-nu + v / 2 + u_one.values) / s))
    return type_i, type_ii


def residual_error_single(v: float, threshold_nu: float, channel: SideInfoChannel) -> float:
    """Predicted E|Ĉ △ C*|/K = (n−K)/K·P(false inclusion) + P(miss)."""
    type_i, type_ii = single_error_rates(v, threshold_nu, channel)
    return float(np.exp(threshold_nu)) * type_i + type_ii


def de_iterate_symmetric(
    mu: float,
    channel: SideInfoChannel,
    t_max: int = DEFAULT_DE_T_MAX,
    tol: float = DEFAULT_DE_TOL,
    n_nodes: int = DEFAULT_QUADRATURE_NODES
) -> DeTraceSymmetric:
    """Iterate from ν₀ = 0 until |ν_{t+1} − ν_t| < tol or t_max steps."""
    if mu < 0 or not np.isfinite(mu):
        raise ValidationError("mu must be finite and nonnegative", details={"mu": mu})
    if t_max < 1 or tol <= 0:
        raise ValidationError("t_max must be ≥ 1 and tol > 0", details={"t_max": t_max, "tol": tol})
    u_plus = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG).plus_dist

    nu_seq = [0.0]
    converged = False
    for _ in range(t_max):
        nxt = symmetric_update(nu_seq[-1], mu, u_plus, n_nodes)
        step = abs(nxt - nu_seq[-1])
        nu_seq.append(nxt)
        if step < tol:
            converged = True
            break

    return DeTraceSymmetric(
        mu=mu,
        nu_seq=nu_seq,
        predicted_errors=[residual_error_symmetric(nu, channel) for nu in nu_seq],
        converged=converged,
        iterations=len(nu_seq) - 1,
    )


def de_iterate_single(
    lam: float,
    threshold_nu: float,
    channel: SideInfoChannel,
    t_max: int = DEFAULT_DE_T_MAX,
    tol: float = DEFAULT_DE_TOL,
    n_nodes: int = DEFAULT_QUADRATURE_NODES
) -> DeTraceSingle:
    """Iterate from v₀ = 0; monotonicity in t is not assumed."""
    if lam < 0 or not np.isfinite(lam):
        raise ValidationError("lambda must be finite and nonnegative", details={"lambda": lam})
    if not np.isfinite(threshold_nu):
        raise ValidationError("threshold nu must be finite (requires K < n)", details={"threshold_nu": threshold_nu})
    if t_max < 1 or tol <= 0:
        raise ValidationError("t_max must be ≥ 1 and tol > 0", details={"t_max": t_max, "tol": tol})
    u_one = llr_spec(channel, LlrModel.SINGLE_FULL_LOG).plus_dist

    v_seq = [0.0]
    converged = False
    for _ in range(t_max):
        nxt = single_update(v_seq[-1], lam, threshold_nu, u_one, n_nodes)
        step = abs(nxt - v_seq[-1])
        v_seq.append(nxt)
        if step < tol:
            converged = True
            break

    rates = [single_error_rates(v, threshold_nu, channel) for v in v_seq]
    scale = float(np.exp(threshold_nu))
    return DeTraceSingle(
        lam=lam,
        threshold_nu=threshold_nu,
        v_seq=v_seq,
        predicted_errors=[scale * ti + tii for ti, tii in rates],
        type_i_rates=[ti for ti, _ in rates],
        type_ii_rates=[tii for _, tii in rates],
        converged=converged,
        iterations=len(v_seq) - 1,
    )


@dataclass(frozen=True)
class _TreeProcess:
    """
    Branching process seen from the root's incoming sum.

    ``offspring(labels, rng)`` gives two labeled child groups per node,
    ``symbol_rates(labels)`` the Poisson rate of frontier children per side
    information symbol, and ``message`` maps a child's Γ to its contribution.
    ``offset`` is added once per non-frontier node.
    """
    offspring: Callable
    symbol_rates: Callable[[np.ndarray], np.ndarray]
    message: Callable[[np.ndarray], np.ndarray]
    offset: float
    h_values: np.ndarray
    channel: SideInfoChannel


def _incoming(process: _TreeProcess, labels: np.ndarray, depth: int, rng: np.random.Generator) -> Tuple[np.ndarray, int]:
    """Incoming sum Γ − h for nodes with ``depth`` levels below them; also the nodes drawn."""
    size = labels.size
    if depth == 0 or size == 0:
        return np.zeros(size), 0
    if depth == 1:
        # frontier children only matter through their symbol
        counts = rng.poisson(process.symbol_rates(labels))
        return process.offset + counts @ process.message(process.h_values), int(counts.sum())

    first_counts, first_labels, second_counts, second_labels = process.offspring(labels, rng)
    totals = first_counts + second_counts
    total = int(totals.sum())
    if total == 0:
        return np.full(size, process.offset), 0
    owner = np.repeat(np.arange(size), totals)
    within = np.arange(total) - np.repeat(np.cumsum(totals) - totals, totals)
    child_labels = np.where(within < first_counts[owner], first_labels[owner], second_labels[owner])

    child_incoming, drawn = _incoming(process, child_labels, depth - 1, rng)
    child_gamma = process.h_values[sample_side_info(child_labels, process.channel, rng)] + child_incoming
    incoming = process.offset + np.bincount(owner, weights=process.message(child_gamma), minlength=size)
    return incoming, drawn + total


def _symmetric_process(params: SymmetricSbmParams, channel: SideInfoChannel) -> _TreeProcess:
    a, b = params.a, params.b
    plus, minus = channel.plus, channel.minus
    rate_plus = a / 2 * plus + b / 2 * minus
    rate_minus = a / 2 * minus + b / 2 * plus

    def offspring(labels, rng):
        same = rng.poisson(a / 2, size=labels.size)
        other = rng.poisson(b / 2, size=labels.size)
        return same, labels, other, -labels

    return _TreeProcess(
        offspring=offspring,
        symbol_rates=lambda labels: np.where(labels[:, None] > 0, rate_plus, rate_minus),
        message=lambda g: f_message(g, params.beta),
        offset=0.0,
        h_values=llr_values(channel, LlrModel.SYMMETRIC_HALF_LOG),
        channel=channel,
    )


def _single_process(params: SingleCommunityParams, channel: SideInfoChannel) -> _TreeProcess:
    k, n, p, q = params.k, params.n, params.p, params.q
    ones_rate_in, ones_rate_out, zeros_rate = k * p, k * q, (n - k) * q
    alpha_one, alpha_zero = channel.plus, channel.minus

    def offspring(labels, rng):
        ones = rng.poisson(np.where(labels == 1, ones_rate_in, ones_rate_out))
        zeros = rng.poisson(zeros_rate, size=labels.size)
        return ones, np.ones(labels.size, dtype=np.int8), zeros, np.zeros(labels.size, dtype=np.int8)

    def symbol_rates(labels):
        ones = np.where(labels[:, None] == 1, ones_rate_in, ones_rate_out)
        return ones * alpha_one + zeros_rate * alpha_zero

    rho, nu = params.rho, params.threshold_nu
    return _TreeProcess(
        offspring=offspring,
        symbol_rates=symbol_rates,
        message=lambda g: m_message(g, rho, nu),
        offset=-params.prior_shift,
        h_values=llr_values(channel, LlrModel.SINGLE_FULL_LOG),
        channel=channel,
    )


def _sample_chunk(process: _TreeProcess, root_label: int, count: int, depth: int,
                  seed_seq: np.random.SeedSequence) -> Tuple[np.ndarray, np.ndarray, int]:
    rng = np.random.default_rng(seed_seq)
    labels = np.full(count, root_label, dtype=np.int8)
    incoming, drawn = _incoming(process, labels, depth, rng)
    root_h = process.h_values[sample_side_info(labels, process.channel, rng)]
    return incoming, root_h + incoming, drawn + count


def _label_moments(samples: np.ndarray, label: int, predicted: Tuple[float, float],
                   slack: float, ks_tol: float) -> LabelMoments:
    count = samples.size
    mean = float(samples.mean())
    variance = float(samples.var(ddof=1)) if count > 1 else 0.0
    fourth = float(np.mean((samples - mean) ** 4))
    mean_tol = 3 * np.sqrt(variance / count) + slack
    var_tol = 3 * np.sqrt(max(fourth - variance ** 2, 0.0) / count) + slack
    pred_mean, pred_var = predicted
    ks = None
    ks_ok = None
    if pred_var > 0:
        ks = float(stats.kstest(samples, "norm", args=(pred_mean, np.sqrt(pred_var))).statistic)
        ks_ok = ks <= ks_tol
    return LabelMoments(
        label=label,
        samples=count,
        mean=mean,
        variance=variance,
        predicted_mean=pred_mean,
        predicted_variance=pred_var,
        mean_tolerance=float(mean_tol),
        variance_tolerance=float(var_tol),
        ks_statistic=ks,
        mean_ok=abs(mean - pred_mean) <= mean_tol,
        variance_ok=abs(variance - pred_var) <= var_tol,
        ks_ok=ks_ok,
    )


def mc_tree_validate(
    model: ModelKind,
    params: Union[SymmetricSbmParams, SingleCommunityParams],
    channel: SideInfoChannel,
    depth: int,
    num_samples: int,
    seed: int,
    trace: Optional[Union[DeTraceSymmetric, DeTraceSingle]] = None,
    chunk_size: int = 5000,
    threads: int = 1,
    sample_budget: float = 5e8,
    ks_tol: float = 0.05,
    n_nodes: int = DEFAULT_QUADRATURE_NODES
) -> McValidationReport:
    """
    Sample ``num_samples`` trees per root label, compute the root's incoming
    sum exactly and compare it with the Gaussian predicted by density
    evolution at the same depth.

    Work is split into fixed-size chunks, each with its own stream spawned
    from ``seed``, so results do not depend on ``threads``.

    Raises:
        ResourceLimitError: If the expected number of sampled nodes exceeds ``sample_budget``
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative", details={"depth": depth})
    if num_samples < 2:
        raise ValidationError("num_samples must be at least 2", details={"num_samples": num_samples})

    if model == ModelKind.SYMMETRIC:
        process = _symmetric_process(params, channel)
        mean_offspring = params.average_degree
        labels = (1, -1)
        if trace is None:
            trace = de_iterate_symmetric(params.mu, channel, t_max=max(depth, 1), n_nodes=n_nodes)
        com_scale = 2.0
    else:
        process = _single_process(params, channel)
        mean_offspring = params.k * params.p + (params.n - params.k) * params.q
        labels = (1, 0)
        if trace is None:
            trace = de_iterate_single(params.lam, params.threshold_nu, channel, t_max=max(depth, 1), n_nodes=n_nodes)
        com_scale = 1.0

    expected_nodes = 2 * num_samples * expected_tree_size(mean_offspring, max(depth - 1, 0))
    if expected_nodes > sample_budget:
        raise ResourceLimitError(
            "Monte Carlo validation exceeds the sample budget",
            limit=sample_budget,
            requested=expected_nodes,
            details={"depth": depth, "num_samples": num_samples, "mean_offspring": mean_offspring}
        )

    jobs = []
    for label in labels:
        remaining = num_samples
        while remaining > 0:
            jobs.append((label, min(chunk_size, remaining)))
            remaining -= chunk_size
    seeds = np.random.SeedSequence(seed).spawn(len(jobs))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(
            lambda job: _sample_chunk(process, job[0][0], job[0][1], depth, job[1]),
            zip(jobs, seeds)
        ))

    slack = 5.0 / np.sqrt(mean_offspring)
    moments: List[LabelMoments] = []
    nodes_touched = 0
    positive_gamma = None
    for label in labels:
        picked = [r for (lab, _), r in zip(jobs, results) if lab == label]
        incoming = np.concatenate([r[0] for r in picked])
        nodes_touched += sum(r[2] for r in picked)
        if label == 1:
            positive_gamma = np.concatenate([r[1] for r in picked])
        moments.append(_label_moments(incoming, label, trace.gaussian_moments(depth, label), slack, ks_tol))

    # E[e^{−Γ}] under the positive label is exactly 1 for a true likelihood ratio
    with np.errstate(over="ignore"):
        weights = np.exp(-com_scale * positive_gamma)
    com = float(weights.mean())
    com_se = float(weights.std(ddof=1) / np.sqrt(weights.size))
    com_ok = bool(np.isfinite(com) and abs(com - 1.0) <= 3 * com_se + 1e-12)

    return McValidationReport(
        model=model,
        depth=depth,
        samples_per_label=num_samples,
        slack=float(slack),
        ks_tolerance=ks_tol,
        labels=moments,
        change_of_measure=com,
        change_of_measure_se=com_se,
        change_of_measure_ok=com_ok,
        nodes_touched=int(nodes_touched),
    )
