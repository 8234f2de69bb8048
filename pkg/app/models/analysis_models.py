"""Density-evolution traces, J tables, EXIT curves and scan/validation reports"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.services.numerics import FitResult


class ModelKind(str, Enum):
    """Which block model an analysis refers to"""
    SYMMETRIC = "symmetric"
    SINGLE = "single"


class DeTraceSymmetric(BaseModel):
    """ν_0 = 0, ν_1, ... of ν_{t+1} = μ²/4·h(ν_t) with the predicted error at each step."""
    mu: float = Field(..., ge=0)
    nu_seq: List[float] = Field(..., min_length=1)
    predicted_errors: List[float] = Field(default_factory=list)
    converged: bool
    iterations: int = Field(..., ge=0)

    @property
    def nu_bar(self) -> float:
        return self.nu_seq[-1]

    @property
    def bound(self) -> float:
        """μ²/4, the largest value any ν_t can take."""
        return self.mu ** 2 / 4

    def state_at(self, t: int) -> float:
        """ν_t; past the end of a converged trace the fixed point is returned."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t < len(self.nu_seq):
            return self.nu_seq[t]
        if not self.converged:
            raise ValueError(f"trace stops at t={len(self.nu_seq) - 1} without converging")
        return self.nu_bar

    def gaussian_moments(self, t: int, label: int) -> Tuple[float, float]:
        """Predicted (mean, variance) of the root's incoming sum Φ given the root label."""
        nu = self.state_at(t)
        return (nu if label > 0 else -nu), nu


class DeTraceSingle(BaseModel):
    """v_0 = 0, v_1, ... of the single-community recursion with predicted errors."""
    lam: float = Field(..., ge=0)
    threshold_nu: float
    v_seq: List[float] = Field(..., min_length=1)
    predicted_errors: List[float] = Field(default_factory=list)
    type_i_rates: List[float] = Field(default_factory=list)
    type_ii_rates: List[float] = Field(default_factory=list)
    converged: bool
    iterations: int = Field(..., ge=0)

    @property
    def v_bar(self) -> float:
        return self.v_seq[-1]

    @property
    def bound(self) -> float:
        """λ·e^ν, the largest value any v_t can take."""
        return self.lam * float(np.exp(self.threshold_nu))

    def state_at(self, t: int) -> float:
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t < len(self.v_seq):
            return self.v_seq[t]
        if not self.converged:
            raise ValueError(f"trace stops at t={len(self.v_seq) - 1} without converging")
        return self.v_bar

    def b(self, t: int) -> float:
        """b_t ≜ v_{t+1}/λ, so that the label-0 mean of ψ^{t+1} is −λ b_t / 2."""
        if self.lam == 0:
            return 0.0
        return self.state_at(t + 1) / self.lam

    def gaussian_moments(self, t: int, label: int) -> Tuple[float, float]:
        """Predicted (mean, variance) of ψ at the root: (±v_t/2, v_t)."""
        v = self.state_at(t)
        return (v / 2 if label == 1 else -v / 2), v


@dataclass(frozen=True)
class JTable:
    """
    J tabulated on a grid with a zero point followed by geometric spacing.

    ``evaluate`` is the exact J the table was built from; inversion brackets
    with the table and refines against it.
    """
    model: ModelKind
    nu_grid: np.ndarray
    values: np.ndarray
    i_max: float
    evaluate: Callable[[float], float]
    fit: Optional[FitResult] = None

    @property
    def nu_max(self) -> float:
        return float(self.nu_grid[-1])

    @property
    def i_start(self) -> float:
        """J(0), the information carried by side information alone."""
        return float(self.values[0])


@dataclass(frozen=True)
class Inversion:
    nu: float
    clamped: bool = False


class Crossing(BaseModel):
    """A fixed point of the transfer map."""
    i: float = Field(..., description="Information level I* with T(I*) = I*")
    nu: Optional[float] = Field(None, ge=0, description="DE state at the fixed point, when the map has one")
    residual: float = Field(..., description="|T(I*) − I*| after refinement")
    slope: float = Field(..., description="T'(I*), equal to the DE map derivative at the fixed point")
    stable: bool
    operating_point: bool = False


class Staircase(BaseModel):
    """Trajectory I_0, I_1, ... of the transfer map from a starting level."""
    values: List[float]
    steps: int = Field(..., ge=0, description="Index at which the trajectory settles within tol")
    converged: bool


class ExitCurve(BaseModel):
    """I_out against I_in for one parameter set, with fixed points and staircase."""
    model: ModelKind
    params: Dict[str, Optional[float]]
    i_max: float
    nu_in: List[float]
    nu_out: List[float]
    i_in: List[float]
    i_out: List[float]
    crossings: List[Crossing] = Field(default_factory=list)
    staircase: Optional[Staircase] = None

    @property
    def operating_point(self) -> Optional[Crossing]:
        for crossing in self.crossings:
            if crossing.operating_point:
                return crossing
        return None


class ScanPoint(BaseModel):
    value: float
    i_operating: float
    nu_operating: float
    escaped: bool
    de_iterations: int
    de_converged: bool


class ScanReport(BaseModel):
    """Result of bisecting one parameter for the escape transition."""
    model: ModelKind
    scan_parameter: str
    range: Tuple[float, float]
    fixed: Dict[str, Optional[float]]
    transition: bool
    critical_value: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None
    bracket_history: List[Tuple[float, float]] = Field(default_factory=list)
    evaluations: List[ScanPoint] = Field(default_factory=list)
    jump: Optional[float] = Field(None, description="Operating point gap across the final bracket, in bits")
    iterations_lo: Optional[int] = None
    iterations_hi: Optional[int] = None
    reason: str = ""


class LabelMoments(BaseModel):
    """Monte Carlo moments of the root's incoming sum for one root label."""
    label: int
    samples: int
    mean: float
    variance: float
    predicted_mean: float
    predicted_variance: float
    mean_tolerance: float
    variance_tolerance: float
    ks_statistic: Optional[float] = None
    mean_ok: bool
    variance_ok: bool
    ks_ok: Optional[bool] = None


class McValidationReport(BaseModel):
    """Monte Carlo check of the Gaussian approximation on sampled trees."""
    model: ModelKind
    depth: int
    samples_per_label: int
    slack: float
    ks_tolerance: float
    labels: List[LabelMoments]
    change_of_measure: float
    change_of_measure_se: float
    change_of_measure_ok: bool
    nodes_touched: int

    @property
    def passed(self) -> bool:
        moments_ok = all(
            m.mean_ok and m.variance_ok and m.ks_ok is not False for m in self.labels
        )
        return moments_ok and self.change_of_measure_ok
