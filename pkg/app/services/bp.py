"""
Belief propagation for both block models, the exact tree recursion used as
its oracle, label estimators and error metrics.

Symmetric-model messages live in the half-log domain and are combined with
F directly; the message-update log term of the usual tabulated form equals
2·F, so both describe the same recursion. An iteration count ``t`` means
``t`` synchronous message rounds starting from all-zero messages followed
by one belief round. In the symmetric model the first round reproduces the
side information (F(0) = 0), so graph BP on a tree with ``t`` = depth
returns the tree LLR of the root.
"""
from typing import Literal, Optional, Tuple

import numpy as np

from app.core.exceptions import ValidationError
from app.models.bp_models import BpState, CommunityError, TreeLlr
from app.models.channel_models import LlrModel, SideInfoChannel
from app.models.graph_models import Graph, LabeledTree, SingleCommunityParams
from app.services.channels import node_llrs

DEFAULT_BELIEF_CLAMP = 500.0
DEFAULT_MAX_ITERS = 100

Frontier = Literal["truncated", "observed"]


def f_message(x, beta: float):
    """F(x) = ½ log((e^{2x+2β} + 1) / (e^{2x} + e^{2β})), in log-sum-exp form."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (np.logaddexp(2 * x + 2 * beta, 0.0) - np.logaddexp(2 * x, 2 * beta))


def m_message(x, rho: float, threshold_nu: float):
    """M(x) = log((ρ e^{x−ν} + 1) / (e^{x−ν} + 1)); values lie in (0, log ρ)."""
    x = np.asarray(x, dtype=float)
    if rho == 1.0:
        return np.zeros_like(x)
    if np.isneginf(threshold_nu):
        # K = n: every neighbor is in the community
        return np.full_like(x, np.log(rho))
    shifted = x - threshold_nu
    return np.logaddexp(np.log(rho) + shifted, 0.0) - np.logaddexp(shifted, 0.0)


def directed_edges(graph: Graph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(src, dst, rev) for every directed edge in CSR order; rev[e] is the reverse of e."""
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees())
    dst = graph.indices
    keys = src * graph.n + dst
    rev = np.searchsorted(keys, dst * graph.n + src)
    return src, dst, rev


def _check_iterations(t: int, max_iters: int) -> None:
    if t < 1:
        raise ValidationError("BP needs at least one iteration", details={"t": t})
    if t > max_iters:
        raise ValidationError(
            "iteration count exceeds the configured cap",
            details={"t": t, "max_iters": max_iters}
        )


def _propagate(graph: Graph, base: np.ndarray, t: int, message_fn, clamp: float) -> BpState:
    """
    Synchronous updates R_{i→j} ← base_i + Σ_{k∈N_i∖j} fn(R_{k→i}); belief
    R_i = base_i + Σ_{k∈N_i} fn(R_{k→i}). Each round writes a fresh buffer.
    """
    src, dst, rev = directed_edges(graph)
    n = graph.n
    messages = np.zeros(src.size)
    clamp_count = 0

    for _ in range(t):
        contrib = message_fn(messages)
        incoming = np.bincount(dst, weights=contrib, minlength=n)
        updated = base[src] + incoming[src] - contrib[rev]
        clamp_count += int(np.count_nonzero(np.abs(updated) > clamp))
        messages = np.clip(updated, -clamp, clamp)

    contrib = message_fn(messages)
    beliefs = base + np.bincount(dst, weights=contrib, minlength=n)
    clamp_count += int(np.count_nonzero(np.abs(beliefs) > clamp))
    beliefs = np.clip(beliefs, -clamp, clamp)
    return BpState(messages=messages, beliefs=beliefs, iterations=t, clamp_count=clamp_count)


def run_bp_symmetric(
    graph: Graph,
    side_llrs: np.ndarray,
    beta: float,
    t: int,
    clamp: float = DEFAULT_BELIEF_CLAMP,
    max_iters: int = DEFAULT_MAX_ITERS
) -> BpState:
    """BP for the binary symmetric SBM; ``side_llrs`` use the half-log convention."""
    _check_iterations(t, max_iters)
    side_llrs = np.asarray(side_llrs, dtype=float)
    if side_llrs.shape != (graph.n,):
        raise ValidationError("side_llrs must have one entry per node")
    return _propagate(graph, side_llrs, t, lambda r: f_message(r, beta), clamp)


def run_bp_single(
    graph: Graph,
    side_llrs: np.ndarray,
    params: SingleCommunityParams,
    t: int,
    clamp: float = DEFAULT_BELIEF_CLAMP,
    max_iters: int = DEFAULT_MAX_ITERS
) -> BpState:
    """BP for the single-community SBM; ``side_llrs`` use the full-log convention."""
    _check_iterations(t, max_iters)
    side_llrs = np.asarray(side_llrs, dtype=float)
    if side_llrs.shape != (graph.n,):
        raise ValidationError("side_llrs must have one entry per node")
    base = side_llrs - params.prior_shift
    rho, nu = params.rho, params.threshold_nu
    return _propagate(graph, base, t, lambda r: m_message(r, rho, nu), clamp)


def estimate_symmetric(beliefs: np.ndarray) -> np.ndarray:
    """Sign rule; a zero belief maps to +1."""
    return np.where(np.asarray(beliefs) >= 0, 1, -1).astype(np.int8)


def estimate_single_topk(beliefs: np.ndarray, k: int) -> np.ndarray:
    """The K largest beliefs, ties broken by lowest node id; returned sorted."""
    beliefs = np.asarray(beliefs, dtype=float)
    if not 0 <= k <= beliefs.size:
        raise ValidationError("K must lie in [0, n]", details={"k": k, "n": int(beliefs.size)})
    order = np.lexsort((np.arange(beliefs.size), -beliefs))
    return np.sort(order[:k])


def estimate_single_map(beliefs: np.ndarray, threshold_nu: float) -> np.ndarray:
    """Nodes whose belief reaches the threshold ν (inclusive)."""
    return np.flatnonzero(np.asarray(beliefs, dtype=float) >= threshold_nu)


def misclassification_rate(estimate: np.ndarray, truth: np.ndarray, minimize_flip: bool = False) -> float:
    """
    Fraction of nodes whose estimate differs from the truth.

    With ``minimize_flip`` the better of the estimate and its global sign
    flip is scored (symmetric model only).
    """
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValidationError("estimate and truth differ in length")
    if truth.size == 0:
        return 0.0
    raw = float(np.mean(estimate != truth))
    return min(raw, 1.0 - raw) if minimize_flip else raw


def community_error(est_set: np.ndarray, true_set: np.ndarray, k: int, n: Optional[int] = None) -> CommunityError:
    """|Ĉ △ C*| / K with its split into false inclusions and misses."""
    if k < 1:
        raise ValidationError("K must be positive", details={"k": k})
    est = np.unique(np.asarray(est_set, dtype=np.int64))
    true = np.unique(np.asarray(true_set, dtype=np.int64))
    false_inclusions = int(np.setdiff1d(est, true, assume_unique=True).size)
    misses = int(np.setdiff1d(true, est, assume_unique=True).size)
    type_ii = misses / k
    type_i = None
    per_node = None
    if n is not None and n > k:
        type_i = false_inclusions / (n - k)
        per_node = (k / n) * type_ii + ((n - k) / n) * type_i
    return CommunityError(
        symmetric_difference_ratio=(false_inclusions + misses) / k,
        false_inclusions=false_inclusions,
        misses=misses,
        type_i_rate=type_i,
        type_ii_rate=type_ii,
        per_node_error=per_node,
    )


def _accumulate_upwards(tree: LabeledTree, gamma: np.ndarray, message_fn) -> np.ndarray:
    """Add fn(Γ_child) into each parent, deepest level first."""
    for d in range(tree.max_depth, 0, -1):
        level = np.flatnonzero(tree.depth == d)
        if level.size == 0:
            continue
        gamma += np.bincount(tree.parent[level], weights=message_fn(gamma[level]), minlength=tree.size)
    return gamma


def tree_llr_symmetric(tree: LabeledTree, beta: float, channel: SideInfoChannel) -> TreeLlr:
    """Exact half-log LLR Γ_j = h_j + Σ_children F(Γ_k), bottom-up."""
    h = node_llrs(channel, tree.symbol, LlrModel.SYMMETRIC_HALF_LOG)
    gamma = _accumulate_upwards(tree, h.copy(), lambda g: f_message(g, beta))
    return TreeLlr(gamma=gamma, side=h)


def tree_llr_single(
    tree: LabeledTree,
    params: SingleCommunityParams,
    channel: SideInfoChannel,
    frontier: Frontier = "truncated"
) -> TreeLlr:
    """
    Exact LLR Γ_i = −K(p−q) + h_i + Σ_children M(Γ_k), bottom-up.

    Nodes at the maximum depth have unobserved children: with ``truncated``
    they carry Γ = h (so a depth-0 tree gives Γ = h_root); with ``observed``
    the sampled tree is taken as the whole graph and they carry h − K(p−q),
    which is what graph BP computes on the re-encoded tree.

    Only ``frontier="observed"`` equals ``run_bp_single`` on ``tree.to_graph()``
    with t = depth; the default differs whenever the frontier is nonempty.
    """
    if frontier not in ("truncated", "observed"):
        raise ValidationError("frontier must be 'truncated' or 'observed'", details={"frontier": frontier})
    h = node_llrs(channel, tree.symbol, LlrModel.SINGLE_FULL_LOG)
    gamma = h - params.prior_shift
    if frontier == "truncated":
        at_frontier = tree.depth == tree.max_depth
        gamma[at_frontier] = h[at_frontier]
    rho, nu = params.rho, params.threshold_nu
    gamma = _accumulate_upwards(tree, gamma, lambda g: m_message(g, rho, nu))
    return TreeLlr(gamma=gamma, side=h)
