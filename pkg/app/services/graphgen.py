"""
Sampling of labeled graphs from both block models and of the matching
Poisson branching trees.

Edges are drawn block by block with geometric skips over the pair index
space, so the cost is proportional to the number of edges rather than n².
"""
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from app.core.exceptions import ResourceLimitError, ValidationError
from app.models.channel_models import SideInfoChannel
from app.models.graph_models import (
    Graph,
    LabeledTree,
    SampledGraph,
    SingleCommunityParams,
    SymmetricSbmParams,
)
from app.services.channels import sample_side_info

DEFAULT_TREE_NODE_CAP = 1e8


def _skip_sample(num_pairs: int, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in [0, num_pairs) kept independently with probability ``prob``."""
    if num_pairs <= 0 or prob <= 0.0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1.0:
        return np.arange(num_pairs, dtype=np.int64)
    expected = num_pairs * prob
    batch = int(expected + 6.0 * np.sqrt(expected) + 16)
    chunks = []
    position = -1
    while True:
        gaps = rng.geometric(prob, size=batch).astype(np.int64)
        positions = position + np.cumsum(gaps)
        inside = positions < num_pairs
        chunks.append(positions[inside])
        if not inside.all():
            break
        position = int(positions[-1])
        batch = max(16, batch // 4)
    return np.concatenate(chunks)


def _triangle_pairs(index: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Decode r = i(i−1)/2 + j (0 ≤ j < i) into (i, j)."""
    i = np.floor((1.0 + np.sqrt(1.0 + 8.0 * index.astype(np.float64))) / 2.0).astype(np.int64)
    # float rounding can be off by one for large r
    i -= (i * (i - 1) // 2) > index
    i += ((i + 1) * i // 2) <= index
    j = index - i * (i - 1) // 2
    return i, j


def _within_block_edges(members: np.ndarray, prob: float, rng: np.random.Generator):
    s = members.size
    picked = _skip_sample(s * (s - 1) // 2, prob, rng)
    i, j = _triangle_pairs(picked)
    return members[i], members[j]


def _across_block_edges(left: np.ndarray, right: np.ndarray, prob: float, rng: np.random.Generator):
    picked = _skip_sample(left.size * right.size, prob, rng)
    return left[picked // right.size], right[picked % right.size]


def _assemble(n: int, pieces) -> Graph:
    if pieces:
        u = np.concatenate([p[0] for p in pieces])
        v = np.concatenate([p[1] for p in pieces])
    else:
        u = v = np.empty(0, dtype=np.int64)
    return Graph.from_edges(n, u, v)


def sample_symmetric_sbm(
    params: SymmetricSbmParams,
    channel: SideInfoChannel,
    seed: int,
    labels: Optional[np.ndarray] = None
) -> SampledGraph:
    """
    Sample labels, edges and side information from the binary symmetric SBM.

    ``labels`` overrides the uniform ±1 draw (used to force configurations).
    """
    rng = np.random.default_rng(seed)
    n = params.n
    if labels is None:
        labels = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
    else:
        labels = np.asarray(labels, dtype=np.int8)
        if labels.shape != (n,) or not np.all(np.isin(labels, (-1, 1))):
            raise ValidationError("labels must be a ±1 vector of length n")

    plus = np.flatnonzero(labels == 1)
    minus = np.flatnonzero(labels == -1)
    pieces = [
        _within_block_edges(plus, params.a / n, rng),
        _within_block_edges(minus, params.a / n, rng),
        _across_block_edges(plus, minus, params.b / n, rng),
    ]
    graph = _assemble(n, pieces)
    symbols = sample_side_info(labels, channel, rng)
    return SampledGraph(graph=graph, labels=labels, symbols=symbols)


def sample_single_community(
    params: SingleCommunityParams,
    channel: SideInfoChannel,
    seed: int
) -> SampledGraph:
    """
    Sample a uniform K-subset C*, edges (p inside C*, q elsewhere) and side information.
    """
    rng = np.random.default_rng(seed)
    n, k = params.n, params.k
    community = np.sort(rng.permutation(n)[:k])
    labels = np.zeros(n, dtype=np.int8)
    labels[community] = 1
    outside = np.flatnonzero(labels == 0)

    pieces = [
        _within_block_edges(community, params.p, rng),
        _across_block_edges(community, outside, params.q, rng),
        _within_block_edges(outside, params.q, rng),
    ]
    graph = _assemble(n, pieces)
    symbols = sample_side_info(labels, channel, rng)
    return SampledGraph(graph=graph, labels=labels, symbols=symbols, community=community)


def edge_count_zscore(count: int, pairs: float, prob: float) -> float:
    """Binomial z-score of ``count`` edges among ``pairs`` pairs kept with probability ``prob``."""
    mean = pairs * prob
    sd = np.sqrt(pairs * prob * (1.0 - prob))
    return float((count - mean) / sd) if sd > 0 else float(count - mean)


def _within_pairs(size: int) -> float:
    return size * (size - 1) / 2


def symmetric_block_zscores(sample: SampledGraph, params: SymmetricSbmParams) -> Tuple[float, float]:
    """(within-block, across-block) edge-count z-scores given the sampled labels."""
    n = params.n
    n_plus = int(np.count_nonzero(sample.labels == 1))
    edges = sample.graph.edge_list()
    same = sample.labels[edges[:, 0]] == sample.labels[edges[:, 1]]
    within = _within_pairs(n_plus) + _within_pairs(n - n_plus)
    return (
        edge_count_zscore(int(same.sum()), within, params.a / n),
        edge_count_zscore(int((~same).sum()), n_plus * (n - n_plus), params.b / n),
    )


def single_block_zscores(sample: SampledGraph, params: SingleCommunityParams) -> Tuple[float, float]:
    """(inside C*, everywhere else) edge-count z-scores."""
    edges = sample.graph.edge_list()
    inside = (sample.labels[edges[:, 0]] == 1) & (sample.labels[edges[:, 1]] == 1)
    pairs_inside = _within_pairs(params.k)
    return (
        edge_count_zscore(int(inside.sum()), pairs_inside, params.p),
        edge_count_zscore(int((~inside).sum()), _within_pairs(params.n) - pairs_inside, params.q),
    )


def degree_chisquare(degrees: np.ndarray, mean: float, min_expected: float = 5.0) -> Tuple[float, float]:
    """
    Chi-square goodness of fit of a degree sequence against Poisson(mean).

    Bins are single degrees; both tails are pooled into the outermost bins so
    every expected count is at least ``min_expected``. Returns (statistic, p-value).
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    n = degrees.size
    top = max(int(degrees.max(initial=0)), int(stats.poisson.isf(1e-12, mean)))
    support = np.arange(top + 1)
    expected = n * stats.poisson.pmf(support, mean)
    large = np.flatnonzero(expected >= min_expected)
    if large.size < 2:
        raise ValidationError("too few nodes for a degree chi-square test",
                              details={"n": n, "mean": mean})
    lo, hi = int(large[0]), int(large[-1])
    observed = np.bincount(degrees, minlength=support.size).astype(float)
    obs = np.concatenate([[observed[:lo + 1].sum()], observed[lo + 1:hi], [observed[hi:].sum()]])
    exp = np.concatenate([[n * stats.poisson.cdf(lo, mean)], expected[lo + 1:hi],
                          [n * stats.poisson.sf(hi - 1, mean)]])
    exp *= n / exp.sum()
    result = stats.chisquare(obs, exp)
    return float(result.statistic), float(result.pvalue)


def graph_neighbourhood(sample: SampledGraph) -> Tuple[float, float]:
    """Mean degree and the fraction of edges joining equal labels."""
    edges = sample.graph.edge_list()
    same = sample.labels[edges[:, 0]] == sample.labels[edges[:, 1]]
    return sample.graph.average_degree(), float(same.mean()) if same.size else 0.0


def first_generation(trees) -> Tuple[float, float, int]:
    """Mean root child count, the fraction of root children sharing the root label, and the child total."""
    counts, same = [], 0
    for tree in trees:
        children = tree.label[tree.parent == 0]
        counts.append(children.size)
        same += int(np.count_nonzero(children == tree.root_label))
    total = int(sum(counts))
    return float(np.mean(counts)), same / total if total else 0.0, total


def coupling_proxy_ok(average_degree: float, t: int, n: int, margin: float = 100.0) -> bool:
    """Locally tree-like proxy: (avg degree)^t ≤ n / margin."""
    return t * np.log(max(average_degree, 1e-300)) <= np.log(n / margin)


def expected_tree_size(mean_offspring: float, depth: int) -> float:
    """Σ_{d ≤ depth} mean_offspring^d."""
    return float(sum(mean_offspring ** d for d in range(depth + 1)))


def _check_tree_cap(mean_offspring: float, depth: int, node_cap: float) -> None:
    expected = expected_tree_size(mean_offspring, depth)
    if expected > node_cap:
        raise ResourceLimitError(
            "expected tree size exceeds the node cap",
            limit=node_cap,
            requested=expected,
            details={"depth": depth, "mean_offspring": mean_offspring}
        )


def _grow_tree(
    root_label: int,
    depth: int,
    offspring,
    channel: SideInfoChannel,
    rng: np.random.Generator
) -> LabeledTree:
    """
    Grow a tree level by level.

    ``offspring(labels, rng)`` returns (first_counts, first_labels,
    second_counts, second_labels): two child groups per parent and the label
    each group receives. Children of a parent are contiguous, first group first.
    """
    parents = [np.array([-1], dtype=np.int64)]
    depths = [np.array([0], dtype=np.int64)]
    labels = [np.array([root_label], dtype=np.int8)]
    level_ids = np.array([0], dtype=np.int64)
    level_labels = labels[0]
    next_id = 1

    for d in range(1, depth + 1):
        if level_ids.size == 0:
            break
        first_counts, first_labels, second_counts, second_labels = offspring(level_labels, rng)
        totals = first_counts + second_counts
        total = int(totals.sum())
        if total == 0:
            level_ids = np.empty(0, dtype=np.int64)
            continue
        owner = np.repeat(np.arange(level_ids.size), totals)
        starts = np.repeat(np.cumsum(totals) - totals, totals)
        within = np.arange(total) - starts
        in_first = within < first_counts[owner]
        child_labels = np.where(in_first, first_labels[owner], second_labels[owner]).astype(np.int8)

        child_ids = np.arange(next_id, next_id + total, dtype=np.int64)
        next_id += total
        parents.append(level_ids[owner])
        depths.append(np.full(total, d, dtype=np.int64))
        labels.append(child_labels)
        level_ids, level_labels = child_ids, child_labels

    label = np.concatenate(labels)
    symbol = sample_side_info(label, channel, rng)
    return LabeledTree(
        parent=np.concatenate(parents),
        depth=np.concatenate(depths),
        label=label,
        symbol=symbol,
        max_depth=int(depth),
    )


def sample_symmetric_tree(
    a: float,
    b: float,
    channel: SideInfoChannel,
    depth: int,
    seed: int,
    root_label: Optional[int] = None,
    node_cap: float = DEFAULT_TREE_NODE_CAP
) -> LabeledTree:
    """
    Two-type Poisson tree: each node has Pois(a/2) same-label and Pois(b/2)
    opposite-label children, down to ``depth``.
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative", details={"depth": depth})
    if a <= 0 or b <= 0:
        raise ValidationError("a and b must be positive", details={"a": a, "b": b})
    _check_tree_cap((a + b) / 2, depth, node_cap)
    rng = np.random.default_rng(seed)
    if root_label is None:
        root_label = 1 if rng.random() < 0.5 else -1

    def offspring(parent_labels, rng):
        same = rng.poisson(a / 2, size=parent_labels.size)
        other = rng.poisson(b / 2, size=parent_labels.size)
        return same, parent_labels, other, -parent_labels

    return _grow_tree(int(root_label), depth, offspring, channel, rng)


def sample_single_tree(
    params: SingleCommunityParams,
    channel: SideInfoChannel,
    depth: int,
    seed: int,
    root_label: Optional[int] = None,
    node_cap: float = DEFAULT_TREE_NODE_CAP
) -> LabeledTree:
    """
    Single-community tree: a label-1 parent has Pois(Kp) label-1 children, a
    label-0 parent Pois(Kq); every parent has Pois((n−K)q) label-0 children.
    The root is Bernoulli(K/n) unless ``root_label`` is given.
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative", details={"depth": depth})
    k, n, p, q = params.k, params.n, params.p, params.q
    _check_tree_cap(k * p + (n - k) * q, depth, node_cap)
    rng = np.random.default_rng(seed)
    if root_label is None:
        root_label = 1 if rng.random() < k / n else 0

    def offspring(parent_labels, rng):
        rate_one = np.where(parent_labels == 1, k * p, k * q)
        ones = rng.poisson(rate_one)
        zeros = rng.poisson((n - k) * q, size=parent_labels.size)
        size = parent_labels.size
        return ones, np.ones(size, dtype=np.int8), zeros, np.zeros(size, dtype=np.int8)

    return _grow_tree(int(root_label), depth, offspring, channel, rng)
