"""
Shared numerical kernels.

Q-function, Gauss-Hermite expectations against a standard normal, discrete
mixture expectations, bracketed bisection and a Levenberg-Marquardt fitter.
All functions are pure and safe for concurrent use.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import optimize, special

from app.core.exceptions import NumericalError, ValidationError

DEFAULT_QUADRATURE_NODES = 64
PROBABILITY_TOL = 1e-12


def q_function(x):
    """Upper tail of the standard normal, Q(x) = P(Z > x)."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def normal_cdf(x):
    """Standard normal CDF written through the same erfc kernel as Q."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))


def binary_entropy_bits(p: float) -> float:
    """H_b(p) in bits, with H_b(0) = H_b(1) = 0."""
    return float(special.entr(p) + special.entr(1.0 - p)) / np.log(2.0)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and normalized weights for expectations against N(0, 1)."""
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def expect(self, f: Callable[[np.ndarray], np.ndarray]):
        """E_Z[f(Z)]; ``f`` maps the node vector to shape (n_nodes, ...)."""
        values = np.asarray(f(self.nodes), dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))


@lru_cache(maxsize=16)
def quadrature_rule(n_nodes: int = DEFAULT_QUADRATURE_NODES) -> QuadratureRule:
    """Probabilists' Gauss-Hermite rule with weights normalized to sum to one."""
    if n_nodes < 1:
        raise ValidationError("n_nodes must be positive", details={"n_nodes": n_nodes})
    nodes, weights = hermegauss(n_nodes)
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights)


def gauss_hermite_expect(f: Callable[[np.ndarray], np.ndarray], n_nodes: int = DEFAULT_QUADRATURE_NODES):
    """E_Z[f(Z)] for standard normal Z with an ``n_nodes`` point rule."""
    return quadrature_rule(n_nodes).expect(f)


def monte_carlo_expect(
    f: Callable[[np.ndarray], np.ndarray],
    num_samples: int,
    seed: int
) -> tuple:
    """Monte Carlo estimate of E_Z[f(Z)] and its standard error, for audits."""
    rng = np.random.default_rng(seed)
    values = np.asarray(f(rng.standard_normal(num_samples)), dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(num_samples))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution: ``probs[k]`` is the mass placed on ``values[k]``."""
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1:
            raise ValidationError(
                "values and probs must be 1-D arrays of equal length",
                details={"values_shape": values.shape, "probs_shape": probs.shape}
            )
        if np.any(probs < 0):
            raise ValidationError("probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValidationError(
                "probabilities must sum to 1",
                details={"sum": total}
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    def mass_where(self, mask: np.ndarray) -> float:
        return float(self.probs[mask].sum())


def mixture_expect(f: Callable[[np.ndarray], np.ndarray], dist: DiscreteDistribution):
    """Σ_k p_k f(x_k); ``f`` is evaluated once on the value vector."""
    values = np.asarray(f(dist.values), dtype=float)
    return np.tensordot(dist.probs, values, axes=(0, 0))


@dataclass(frozen=True)
class BisectionResult:
    root: float
    iterations: int
    bracket: tuple


def bisect_monotone(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float
) -> BisectionResult:
    """
    Bracketed bisection for a sign change of ``g`` in [lo, hi].

    Raises:
        ValidationError: If the endpoints do not bracket a root
    """
    if not lo < hi:
        raise ValidationError("bisection needs lo < hi", details={"lo": lo, "hi": hi})
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return BisectionResult(root=lo, iterations=0, bracket=(lo, lo))
    if g_hi == 0.0:
        return BisectionResult(root=hi, iterations=0, bracket=(hi, hi))
    if np.sign(g_lo) == np.sign(g_hi):
        raise ValidationError(
            "bisection endpoints have the same sign",
            details={"lo": lo, "hi": hi, "g_lo": float(g_lo), "g_hi": float(g_hi)}
        )
    max_iter = max(1, int(np.ceil(np.log2((hi - lo) / tol))))
    root, info = optimize.bisect(
        g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
        maxiter=max_iter + 2, full_output=True, disp=False
    )
    return BisectionResult(root=float(root), iterations=int(info.iterations), bracket=(lo, hi))


@dataclass(frozen=True)
class FitResult:
    params: np.ndarray
    residual_norm: float
    max_abs_residual: float
    rank_deficient: bool
    success: bool
    message: str


def damped_least_squares_fit(
    x: Sequence[float],
    y: Sequence[float],
    model: Callable[..., np.ndarray],
    init: Sequence[float],
    bounds_check: Optional[Callable[[np.ndarray], bool]] = None
) -> FitResult:
    """
    Levenberg-Marquardt fit of ``model(x, *params)`` to ``y``.

    Rank deficiency of the Jacobian at the solution is reported through
    ``rank_deficient``; the damped solution is still returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    init = np.asarray(init, dtype=float)
    if x.shape != y.shape:
        raise ValidationError("x and y must have the same shape")
    if x.size < init.size:
        raise ValidationError(
            "Levenberg-Marquardt needs at least as many samples as parameters",
            details={"samples": int(x.size), "parameters": int(init.size)}
        )

    def residuals(params):
        return model(x, *params) - y

    result = optimize.least_squares(
        residuals, init, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000
    )
    params = result.x
    if bounds_check is not None and not bounds_check(params):
        raise NumericalError("fitted parameters left the admissible region",
                             details={"params": params.tolist()})
    rank = np.linalg.matrix_rank(result.jac) if result.jac.size else 0
    res = result.fun
    return FitResult(
        params=params,
        residual_norm=float(np.linalg.norm(res)),
        max_abs_residual=float(np.max(np.abs(res))) if res.size else 0.0,
        rank_deficient=bool(rank < init.size),
        success=bool(result.success),
        message=str(result.message),
    )
