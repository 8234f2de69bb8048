"""
EXIT-chart analysis.

J maps the DE state to the mutual information (in bits) between a node's
label and its belief. The transfer map of one BP iteration is
T = J ∘ g ∘ J⁻¹, where g is the DE update. Curves, crossings and staircases
are all evaluated in the DE state domain and mapped through J, so iterating
T from J(0) reproduces J(ν_t) of the DE trace.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import optimize, special

from app.core.exceptions import NumericalError, ValidationError
from app.models.analysis_models import (
    Crossing,
    ExitCurve,
    Inversion,
    JTable,
    ModelKind,
    ScanPoint,
    ScanReport,
    Staircase,
)
from app.models.channel_models import LlrModel, SideInfoChannel
from app.services.channels import flip_channel, llr_spec, llr_values
from app.services.devo import (
    de_iterate_single,
    de_iterate_symmetric,
    single_update,
    symmetric_update,
)
from app.services.numerics import (
    DEFAULT_QUADRATURE_NODES,
    binary_entropy_bits,
    bisect_monotone,
    damped_least_squares_fit,
)

DEFAULT_J_GRID_SIZE = 200
DEFAULT_CURVE_GRID_SIZE = 512
DEFAULT_CROSSING_TOL = 1e-9
MONOTONE_JITTER = 1e-9
CURVE_HEADROOM = 1.05
NU_MAX_FLOOR = 1.0
Z_LIMIT = 12.0
Z_PANELS = 16
Z_PANEL_NODES = 32
FIT_TOL = 1e-2
LN2 = np.log(2.0)

SCAN_PARAMETERS = {
    ModelKind.SYMMETRIC: ("mu", "alpha", "epsilon"),
    ModelKind.SINGLE: ("lambda", "alpha", "epsilon"),
}


@lru_cache(maxsize=1)
def _z_rule() -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [−12, 12] with the N(0, 1) density folded into the weights."""
    nodes, weights = leggauss(Z_PANEL_NODES)
    edges = np.linspace(-Z_LIMIT, Z_LIMIT, Z_PANELS + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    z = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel() * np.exp(-z ** 2 / 2) / np.sqrt(2 * np.pi)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def _discrete_information(prior: float, plus: np.ndarray, minus: np.ndarray) -> float:
    """I(x; y) in bits for a binary label with P(x = +) = prior observed through a discrete channel."""
    joint_plus = prior * plus
    joint_minus = (1 - prior) * minus
    marginal = joint_plus + joint_minus
    seen = marginal > 0
    posterior = joint_plus[seen] / marginal[seen]
    conditional = float(np.sum(marginal[seen] * (special.entr(posterior) + special.entr(1 - posterior)))) / LN2
    return binary_entropy_bits(prior) - conditional


def _mixture_information(
    prior: float,
    centers_plus: np.ndarray,
    centers_minus: np.ndarray,
    weights_plus: np.ndarray,
    weights_minus: np.ndarray,
    sigma: float
) -> float:
    """
    I(x; Γ) in bits when Γ | x=± is a mixture of N(center, σ²) components.

    H(x | Γ) is integrated component by component with y = c + σz; the
    posterior term log2(1 + e^{B−A}) is kept in log-sum-exp form.
    """
    z, wz = _z_rule()
    centers = np.concatenate([centers_plus, centers_minus])
    own_weight = np.concatenate([prior * weights_plus, (1 - prior) * weights_minus])
    is_plus = np.arange(centers.size) < centers_plus.size

    y = centers[None, :] + sigma * z[:, None]
    scale = 2 * sigma ** 2
    log_plus = special.logsumexp(-(y[:, :, None] - centers_plus[None, None, :]) ** 2 / scale,
                                 b=weights_plus, axis=-1)
    log_minus = special.logsumexp(-(y[:, :, None] - centers_minus[None, None, :]) ** 2 / scale,
                                  b=weights_minus, axis=-1)
    log_plus = log_plus + np.log(prior)
    log_minus = log_minus + np.log(1 - prior)
    own = np.where(is_plus[None, :], log_plus, log_minus)
    other = np.where(is_plus[None, :], log_minus, log_plus)
    with np.errstate(invalid="ignore"):
        integrand = np.logaddexp(0.0, other - own) / LN2
    integrand = np.where(own_weight[None, :] > 0, integrand, 0.0)
    conditional = float(wz @ integrand @ own_weight)
    i_max = binary_entropy_bits(prior)
    return float(np.clip(i_max - conditional, 0.0, i_max))


def j_symmetric(nu: float, channel: SideInfoChannel) -> float:
    """
    J(ν) = 1 − H(x | Γ) with Γ | ± ~ Σ_m α±,m N(±ν + h_m, ν), in bits.

    ν = 0 reduces to I(x; y) of the side-information channel.
    """
    if not np.isfinite(nu) or nu < 0:
        raise ValidationError("nu must be finite and nonnegative", details={"nu": nu})
    if nu == 0:
        return _discrete_information(0.5, channel.plus, channel.minus)
    h = llr_values(channel, LlrModel.SYMMETRIC_HALF_LOG)
    return _mixture_information(0.5, nu + h, -nu + h, channel.plus, channel.minus, np.sqrt(nu))


def j_single(v: float, k_frac: float, channel: SideInfoChannel, mean_scale: float = 0.5) -> float:
    """
    J(v) = H_b(K/n) − H(x | Γ) with Γ | 1 ~ N(s·v + U₁, v), Γ | 0 ~ N(−s·v + U₀, v), in bits.

    ``mean_scale`` s = ½ matches the DE state; s = 1 gives the ±v centering.
    """
    if not np.isfinite(v) or v < 0:
        raise ValidationError("v must be finite and nonnegative", details={"v": v})
    if not 0 < k_frac < 1:
        raise ValidationError("K/n must lie in (0, 1)", details={"k_frac": k_frac})
    if v == 0:
        return _discrete_information(k_frac, channel.plus, channel.minus)
    h = llr_values(channel, LlrModel.SINGLE_FULL_LOG)
    shift = mean_scale * v
    return _mixture_information(k_frac, shift + h, -shift + h, channel.plus, channel.minus, np.sqrt(v))


def j_fit_model(nu, j0, i_max, h1, h2, h3):
    """J0 + (I_max − J0)·(1 − 2^{−H1·ν^{H2}})^{H3}."""
    nu = np.asarray(nu, dtype=float)
    return j0 + (i_max - j0) * (1.0 - np.exp2(-h1 * nu ** h2)) ** h3


def j_fitted(table: JTable, nu):
    """Smoothed J from the table's Levenberg-Marquardt fit."""
    if table.fit is None:
        raise ValidationError("table was built without a fit")
    return j_fit_model(nu, table.i_start, table.i_max, *table.fit.params)


def j_evaluator(
    model: ModelKind,
    channel: SideInfoChannel,
    k_frac: Optional[float] = None,
    mean_scale: float = 0.5
) -> Tuple[Callable[[float], float], float]:
    """The exact J of a model with its saturation level I_max."""
    if model == ModelKind.SYMMETRIC:
        return (lambda nu: j_symmetric(nu, channel)), 1.0
    if k_frac is None:
        raise ValidationError("the single-community J needs K/n")
    return (lambda v: j_single(v, k_frac, channel, mean_scale)), binary_entropy_bits(k_frac)


def build_j_table(
    model: ModelKind,
    channel: SideInfoChannel,
    nu_max: float,
    grid_size: int = DEFAULT_J_GRID_SIZE,
    k_frac: Optional[float] = None,
    mean_scale: float = 0.5,
    fit: bool = False
) -> JTable:
    """
    Tabulate J on {0} ∪ geomspace(ν_max·1e-4, ν_max).

    Raises:
        NumericalError: If J decreases by more than the jitter tolerance, or a
            requested fit misses the table by more than its tolerance
    """
    if not nu_max > 0:
        raise ValidationError("nu_max must be positive", details={"nu_max": nu_max})
    if grid_size < 3:
        raise ValidationError("grid_size must be at least 3", details={"grid_size": grid_size})
    evaluate, i_max = j_evaluator(model, channel, k_frac, mean_scale)
    grid = np.concatenate([[0.0], np.geomspace(nu_max * 1e-4, nu_max, grid_size - 1)])
    values = np.array([evaluate(nu) for nu in grid])

    drops = np.diff(values)
    if np.any(drops < -MONOTONE_JITTER):
        worst = int(np.argmin(drops))
        raise NumericalError(
            "J table is not monotone",
            details={"nu": float(grid[worst + 1]), "drop": float(drops[worst])}
        )
    values = np.maximum.accumulate(values)
    grid.setflags(write=False)
    values.setflags(write=False)

    fit_result = None
    if fit and i_max - values[0] > MONOTONE_JITTER:
        j0 = float(values[0])
        fit_result = damped_least_squares_fit(
            grid, values,
            lambda x, h1, h2, h3: j_fit_model(x, j0, i_max, h1, h2, h3),
            init=(0.5, 0.9, 1.1),
            bounds_check=lambda p: bool(np.all(p > 0)),
        )
        if fit_result.max_abs_residual > FIT_TOL:
            raise NumericalError(
                "J fit residual exceeds tolerance",
                details={"max_abs_residual": fit_result.max_abs_residual, "tolerance": FIT_TOL}
            )

    return JTable(model=model, nu_grid=grid, values=values, i_max=i_max, evaluate=evaluate, fit=fit_result)


def j_inverse(table: JTable, i_target: float) -> Inversion:
    """
    ν with J(ν) = i_target: bracketed by the table, refined by Brent's method
    on the exact J. Targets outside the table are clamped and flagged.
    """
    values, grid = table.values, table.nu_grid
    if i_target <= values[0]:
        return Inversion(nu=0.0, clamped=bool(i_target < values[0] - 1e-12))
    if i_target >= values[-1]:
        return Inversion(nu=float(grid[-1]), clamped=bool(i_target > values[-1] + 1e-12))

    idx = int(np.searchsorted(values, i_target))
    lo, hi = float(grid[idx - 1]), float(grid[idx])

    def gap(nu):
        return table.evaluate(nu) - i_target

    g_lo, g_hi = gap(lo), gap(hi)
    if g_hi == 0:
        return Inversion(nu=hi)
    if np.sign(g_lo) == np.sign(g_hi):
        # flat stretch left by jitter removal
        return Inversion(nu=lo if abs(g_lo) <= abs(g_hi) else hi)
    nu = optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    return Inversion(nu=float(nu))


@dataclass(frozen=True)
class TransferMap:
    """One BP iteration seen in the information domain, T = J ∘ g ∘ J⁻¹."""
    model: ModelKind
    table: JTable
    update: Callable[[float], float]
    params: Dict[str, float] = field(default_factory=dict)

    @property
    def i_max(self) -> float:
        return self.table.i_max

    def j(self, nu: float) -> float:
        return self.table.evaluate(nu)

    def __call__(self, i_in: float) -> float:
        return self.j(self.update(j_inverse(self.table, i_in).nu))


def symmetric_transfer_map(
    mu: float,
    channel: SideInfoChannel,
    grid_size: int = DEFAULT_J_GRID_SIZE,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
    fit: bool = False
) -> TransferMap:
    """Transfer map of the symmetric model, J tabulated up to 1.05·μ²/4."""
    if mu < 0:
        raise ValidationError("mu must be nonnegative", details={"mu": mu})
    u_plus = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG).plus_dist
    nu_max = max(CURVE_HEADROOM * mu ** 2 / 4, NU_MAX_FLOOR)
    table = build_j_table(ModelKind.SYMMETRIC, channel, nu_max, grid_size, fit=fit)
    return TransferMap(
        model=ModelKind.SYMMETRIC,
        table=table,
        update=lambda nu: symmetric_update(nu, mu, u_plus, n_nodes),
        params={"mu": mu},
    )


def single_transfer_map(
    lam: float,
    k_frac: float,
    channel: SideInfoChannel,
    grid_size: int = DEFAULT_J_GRID_SIZE,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
    mean_scale: float = 0.5,
    fit: bool = False
) -> TransferMap:
    """Transfer map of the single-community model, J tabulated up to 1.05·λe^ν."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative", details={"lambda": lam})
    if not 0 < k_frac < 1:
        raise ValidationError("K/n must lie in (0, 1)", details={"k_frac": k_frac})
    threshold_nu = float(np.log((1 - k_frac) / k_frac))
    u_one = llr_spec(channel, LlrModel.SINGLE_FULL_LOG).plus_dist
    nu_max = max(CURVE_HEADROOM * lam * np.exp(threshold_nu), NU_MAX_FLOOR)
    table = build_j_table(ModelKind.SINGLE, channel, nu_max, grid_size, k_frac=k_frac,
                          mean_scale=mean_scale, fit=fit)
    return TransferMap(
        model=ModelKind.SINGLE,
        table=table,
        update=lambda v: single_update(v, lam, threshold_nu, u_one, n_nodes),
        params={"lambda": lam, "k_frac": k_frac, "threshold_nu": threshold_nu},
    )


def transfer_symmetric(i_in: float, mu: float, channel: SideInfoChannel, table: JTable,
                       n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """I_out = J(μ²/4·h(J⁻¹(I_in)))."""
    u_plus = llr_spec(channel, LlrModel.SYMMETRIC_HALF_LOG).plus_dist
    nu = j_inverse(table, i_in).nu
    return table.evaluate(symmetric_update(nu, mu, u_plus, n_nodes))


def transfer_single(i_in: float, lam: float, k_frac: float, channel: SideInfoChannel, table: JTable,
                    n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """I_out = J(λ·E[1/(e^{−ν} + e^{−(v/2 + √v Z) − U₁})]) with v = J⁻¹(I_in)."""
    threshold_nu = float(np.log((1 - k_frac) / k_frac))
    u_one = llr_spec(channel, LlrModel.SINGLE_FULL_LOG).plus_dist
    v = j_inverse(table, i_in).nu
    return table.evaluate(single_update(v, lam, threshold_nu, u_one, n_nodes))


def _refine_sign_changes(gap: Callable[[float], float], grid: np.ndarray, gaps: np.ndarray,
                         xtol: float) -> List[float]:
    """Roots of ``gap`` at grid zeros and inside every sign change of consecutive grid values."""
    roots = []
    for k in range(grid.size):
        if gaps[k] == 0:
            roots.append(float(grid[k]))
        elif k + 1 < grid.size and gaps[k + 1] != 0 and np.sign(gaps[k]) != np.sign(gaps[k + 1]):
            roots.append(bisect_monotone(gap, float(grid[k]), float(grid[k + 1]), xtol).root)
    return roots


def _slope(fn: Callable[[float], float], x: float, lower: float = 0.0) -> float:
    step = 1e-5 * max(1.0, abs(x))
    left = max(x - step, lower)
    return (fn(x + step) - fn(left)) / (x + step - left)


def find_crossings(tmap: TransferMap, curve: ExitCurve, tol: float = DEFAULT_CROSSING_TOL) -> List[Crossing]:
    """
    Fixed points of T located as sign changes of g(ν) − ν on the curve's
    grid and refined by bisection. T'(I*) equals g'(ν*) at a fixed point.
    The first crossing at or above the starting point is the operating point.
    """
    grid = np.asarray(curve.nu_in)
    gaps = np.asarray(curve.nu_out) - grid

    def gap(nu):
        return tmap.update(nu) - nu

    xtol = max(tol * 1e-2, 1e-14)
    crossings = []
    for nu_star in _refine_sign_changes(gap, grid, gaps, xtol):
        i_star = tmap.j(nu_star)
        slope = _slope(tmap.update, nu_star)
        crossings.append(Crossing(
            i=i_star,
            nu=nu_star,
            residual=abs(tmap.j(tmap.update(nu_star)) - i_star),
            slope=slope,
            stable=slope < 1.0,
        ))
    if crossings:
        crossings[0] = crossings[0].model_copy(update={"operating_point": True})
    return crossings


def find_fixed_points(transfer: Callable[[float], float], lo: float = 0.0, hi: float = 1.0,
                      grid_size: int = DEFAULT_CURVE_GRID_SIZE, tol: float = DEFAULT_CROSSING_TOL) -> List[Crossing]:
    """Fixed points of an arbitrary transfer map on [lo, hi], located directly in the information domain."""
    grid = np.linspace(lo, hi, grid_size)
    gaps = np.array([transfer(i) for i in grid]) - grid

    def gap(i):
        return transfer(i) - i

    crossings = []
    for i_star in _refine_sign_changes(gap, grid, gaps, max(tol * 1e-2, 1e-14)):
        slope = _slope(transfer, i_star, lower=lo)
        crossings.append(Crossing(
            i=i_star, nu=None, residual=abs(gap(i_star)), slope=slope, stable=slope < 1.0
        ))
    if crossings:
        crossings[0] = crossings[0].model_copy(update={"operating_point": True})
    return crossings


def _settle(values: List[float], tol: float) -> int:
    final = values[-1]
    for k, value in enumerate(values):
        if abs(value - final) < tol:
            return k
    return len(values) - 1


def staircase_map(transfer: Callable[[float], float], i_start: float,
                  max_steps: int = 200, tol: float = 1e-9) -> Staircase:
    """Iterate I ← T(I) from ``i_start`` until |ΔI| < tol or ``max_steps``."""
    values = [float(i_start)]
    converged = False
    for _ in range(max_steps):
        values.append(float(transfer(values[-1])))
        if abs(values[-1] - values[-2]) < tol:
            converged = True
            break
    return Staircase(values=values, steps=_settle(values, tol), converged=converged)


def staircase(tmap: TransferMap, i_start: Optional[float] = None,
              max_steps: int = 200, tol: float = 1e-9) -> Staircase:
    """
    Staircase of the transfer map, iterated in the DE state domain so that
    step t equals J(ν_t) of the matching DE trace.
    """
    if i_start is None:
        nu = 0.0
        i_start = tmap.j(0.0)
    else:
        nu = j_inverse(tmap.table, i_start).nu
    values = [float(i_start)]
    converged = False
    for _ in range(max_steps):
        nu = tmap.update(nu)
        values.append(tmap.j(nu))
        if abs(values[-1] - values[-2]) < tol:
            converged = True
            break
    return Staircase(values=values, steps=_settle(values, tol), converged=converged)


def build_exit_curve(
    tmap: TransferMap,
    grid_size: int = DEFAULT_CURVE_GRID_SIZE,
    crossing_tol: float = DEFAULT_CROSSING_TOL,
    staircase_steps: int = 200,
    extra_params: Optional[Dict[str, float]] = None
) -> ExitCurve:
    """
    Sample I_out against I_in on a ν grid uniform over [0, ν_max], then attach
    fixed points and the staircase from J(0).
    """
    if grid_size < 2:
        raise ValidationError("grid_size must be at least 2", details={"grid_size": grid_size})
    nu_in = np.linspace(0.0, tmap.table.nu_max, grid_size)
    nu_out = np.array([tmap.update(nu) for nu in nu_in])
    curve = ExitCurve(
        model=tmap.model,
        params={**tmap.params, **(extra_params or {})},
        i_max=tmap.i_max,
        nu_in=nu_in.tolist(),
        nu_out=nu_out.tolist(),
        i_in=[tmap.j(nu) for nu in nu_in],
        i_out=[tmap.j(nu) for nu in nu_out],
    )
    crossings = find_crossings(tmap, curve, crossing_tol)
    stairs = staircase(tmap, max_steps=staircase_steps, tol=crossing_tol * 10)
    return curve.model_copy(update={"crossings": crossings, "staircase": stairs})


def _operating_point(model: ModelKind, values: Dict[str, Optional[float]], t_max: int, de_tol: float,
                     n_nodes: int, mean_scale: float) -> Tuple[float, float, int, bool, float]:
    """(I_op, state, DE iterations, converged, I_max) from DE run to convergence."""
    channel = flip_channel(values["alpha"], values.get("epsilon"))
    if model == ModelKind.SYMMETRIC:
        trace = de_iterate_symmetric(values["mu"], channel, t_max=t_max, tol=de_tol, n_nodes=n_nodes)
        state = trace.nu_bar
        return j_symmetric(state, channel), state, trace.iterations, trace.converged, 1.0
    k_frac = values["k_frac"]
    threshold_nu = float(np.log((1 - k_frac) / k_frac))
    trace = de_iterate_single(values["lambda"], threshold_nu, channel, t_max=t_max, tol=de_tol, n_nodes=n_nodes)
    state = trace.v_bar
    return (j_single(state, k_frac, channel, mean_scale), state, trace.iterations, trace.converged,
            binary_entropy_bits(k_frac))


def threshold_scan(
    model: ModelKind,
    scan_parameter: str,
    lo: float,
    hi: float,
    fixed: Dict[str, Optional[float]],
    bisect_tol: float = 1e-3,
    escape_fraction: float = 0.5,
    min_jump_fraction: float = 0.1,
    t_max: int = 20000,
    de_tol: float = 1e-10,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
    mean_scale: float = 0.5
) -> ScanReport:
    """
    Bisect ``scan_parameter`` over [lo, hi] on "the operating point escaped",
    i.e. J(state reached by DE from 0) ≥ escape_fraction·I_max.

    A transition is reported only when the operating point jumps by at least
    min_jump_fraction·I_max across the final bracket; a level crossing of a
    continuous operating point reports no transition.
    """
    if scan_parameter not in SCAN_PARAMETERS[model]:
        raise ValidationError(
            f"cannot scan {scan_parameter!r} in the {model.value} model",
            details={"allowed": list(SCAN_PARAMETERS[model])}
        )
    if not lo < hi:
        raise ValidationError("scan range needs lo < hi", details={"lo": lo, "hi": hi})
    if bisect_tol <= 0:
        raise ValidationError("bisect_tol must be positive", details={"bisect_tol": bisect_tol})
    required = ("mu", "alpha") if model == ModelKind.SYMMETRIC else ("lambda", "alpha", "k_frac")
    missing = [name for name in required if name != scan_parameter and fixed.get(name) is None]
    if missing:
        raise ValidationError("scan is missing fixed parameters", details={"missing": missing})

    evaluations: List[ScanPoint] = []
    i_max_seen = []

    def probe(value: float) -> ScanPoint:
        values = {**fixed, scan_parameter: value}
        i_op, state, iterations, converged, i_max = _operating_point(
            model, values, t_max, de_tol, n_nodes, mean_scale
        )
        i_max_seen.append(i_max)
        point = ScanPoint(
            value=value,
            i_operating=i_op,
            nu_operating=state,
            escaped=i_op >= escape_fraction * i_max,
            de_iterations=iterations,
            de_converged=converged,
        )
        evaluations.append(point)
        return point

    p_lo, p_hi = probe(lo), probe(hi)
    history = [(lo, hi)]
    base = dict(
        model=model, scan_parameter=scan_parameter, range=(lo, hi),
        fixed={k: v for k, v in fixed.items() if k != scan_parameter},
    )
    if p_lo.escaped == p_hi.escaped:
        return ScanReport(
            **base, transition=False, bracket_history=history, evaluations=evaluations,
            reason="escape predicate is constant over the range",
        )

    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        p_mid = probe(mid)
        if p_mid.escaped == p_lo.escaped:
            lo, p_lo = mid, p_mid
        else:
            hi, p_hi = mid, p_mid
        history.append((lo, hi))

    i_max = i_max_seen[-1]
    jump = abs(p_hi.i_operating - p_lo.i_operating)
    transition = jump >= min_jump_fraction * i_max
    return ScanReport(
        **base,
        transition=transition,
        critical_value=0.5 * (lo + hi) if transition else None,
        bracket=(lo, hi),
        bracket_history=history,
        evaluations=evaluations,
        jump=jump,
        iterations_lo=p_lo.de_iterations,
        iterations_hi=p_hi.de_iterations,
        reason="operating point jumps across the bracket" if transition
        else "operating point crosses the escape level continuously",
    )
