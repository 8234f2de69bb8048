"""Model parameters and graph/tree containers"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from scipy import sparse


class SymmetricSbmParams(BaseModel):
    """Binary symmetric SBM: edge probability a/n within, b/n across communities"""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {"n": 100000, "a": 160.0, "b": 100.0}
            ]
        }
    )

    n: int = Field(..., ge=2, description="Number of nodes")
    a: float = Field(..., gt=0, description="Within-community rate (edge probability a/n)")
    b: float = Field(..., gt=0, description="Across-community rate (edge probability b/n)")

    @model_validator(mode="after")
    def validate_rates(self) -> "SymmetricSbmParams":
        if not self.a > self.b:
            raise ValueError(f"a must exceed b (a={self.a}, b={self.b})")
        if self.a > self.n:
            raise ValueError(f"a/n must not exceed 1 (a={self.a}, n={self.n})")
        return self

    @computed_field
    @property
    def beta(self) -> float:
        return 0.5 * math.log(self.a / self.b)

    @computed_field
    @property
    def mu(self) -> float:
        return (self.a - self.b) / math.sqrt(self.b)

    @property
    def average_degree(self) -> float:
        return (self.a + self.b) / 2


class SingleCommunityParams(BaseModel):
    """Single hidden community of size K: edge probability p inside, q elsewhere"""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {"n": 10000, "k": 1000, "p": 0.004, "q": 0.002}
            ]
        }
    )

    n: int = Field(..., ge=1, description="Number of nodes")
    k: int = Field(..., ge=1, description="Community size K")
    p: float = Field(..., gt=0, le=1, description="In-community edge probability")
    q: float = Field(..., gt=0, le=1, description="Background edge probability")

    @model_validator(mode="after")
    def validate_community(self) -> "SingleCommunityParams":
        if self.k > self.n:
            raise ValueError(f"K must not exceed n (K={self.k}, n={self.n})")
        if self.p < self.q:
            raise ValueError(f"p must be at least q (p={self.p}, q={self.q})")
        return self

    @computed_field
    @property
    def lam(self) -> float:
        """λ = K²(p−q)² / ((n−K) q); infinite when K = n and p > q."""
        if self.k == self.n:
            return 0.0 if self.p == self.q else math.inf
        return self.k ** 2 * (self.p - self.q) ** 2 / ((self.n - self.k) * self.q)

    @computed_field
    @property
    def threshold_nu(self) -> float:
        """ν = log((n−K)/K); −∞ when K = n."""
        if self.k == self.n:
            return -math.inf
        return math.log((self.n - self.k) / self.k)

    @property
    def rho(self) -> float:
        return self.p / self.q

    @property
    def k_frac(self) -> float:
        return self.k / self.n

    @property
    def prior_shift(self) -> float:
        """K(p − q), subtracted once per node in the single-model recursion."""
        return self.k * (self.p - self.q)

    @property
    def average_degree(self) -> float:
        return self.k_frac * (self.k * self.p + (self.n - self.k) * self.q) + \
            (1 - self.k_frac) * self.n * self.q


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph in CSR form with sorted neighbor lists."""
    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        """Symmetrize, drop self-loops and duplicates, sort neighbors."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        keep = u != v
        u, v = u[keep], v[keep]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.ones(rows.size, dtype=np.int8)
        adj = sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
        adj.sum_duplicates()
        adj.sort_indices()
        indptr = adj.indptr.astype(np.int64)
        indices = adj.indices.astype(np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return cls(n=int(n), indptr=indptr, indices=indices)

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edge_list(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def average_degree(self) -> float:
        return 2.0 * self.num_edges / self.n if self.n else 0.0


@dataclass(frozen=True)
class LabeledTree:
    """Branching-process tree in breadth-first order; node 0 is the root."""
    parent: np.ndarray
    depth: np.ndarray
    label: np.ndarray
    symbol: np.ndarray
    max_depth: int

    @property
    def size(self) -> int:
        return int(self.parent.size)

    @property
    def root_label(self) -> int:
        return int(self.label[0])

    def children_counts(self) -> np.ndarray:
        counts = np.zeros(self.size, dtype=np.int64)
        if self.size > 1:
            counts += np.bincount(self.parent[1:], minlength=self.size)
        return counts

    def to_graph(self) -> Graph:
        """Re-encode the tree as an undirected graph (edges = parent links)."""
        child = np.arange(1, self.size, dtype=np.int64)
        return Graph.from_edges(self.size, self.parent[1:], child)


@dataclass(frozen=True)
class SampledGraph:
    """A sampled graph with its ground truth and side information."""
    graph: Graph
    labels: np.ndarray
    symbols: np.ndarray
    community: Optional[np.ndarray] = None
