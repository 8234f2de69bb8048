"""Pydantic run configuration shared by every command"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.analysis_models import ModelKind


class RunConfig(BaseModel):
    """Parameters of one command invocation.

    Built from a JSON config file overlaid with command-line flags. Any of
    (a, b), (μ, b) or (μ, a) determines the symmetric model; the single model
    accepts (p, q) or λ with either q or p/q, always together with K/n.
    """
    model_config = ConfigDict(
        populate_by_name=True,
        extra="forbid",
        json_schema_extra={
            "examples": [
                {"model": "symmetric", "n": 100000, "mu": 6.0, "b": 100.0,
                 "alpha": 0.4, "epsilon": 0.1, "iters": 2, "seed": 1},
                {"model": "single", "n": 10000, "k_frac": 0.1, "lambda": 0.245,
                 "p_over_q": 2.0, "alpha": 0.4, "iters": 3, "seed": 7},
            ]
        }
    )

    model: ModelKind = Field(default=ModelKind.SYMMETRIC, description="Block model")
    n: Optional[int] = Field(default=None, ge=2, description="Number of nodes")

    a: Optional[float] = Field(default=None, gt=0, description="Within-community rate")
    b: Optional[float] = Field(default=None, gt=0, description="Across-community rate")
    mu: Optional[float] = Field(default=None, ge=0, description="(a − b)/√b")

    k_frac: Optional[float] = Field(default=None, gt=0, lt=1, description="Community fraction K/n")
    lam: Optional[float] = Field(default=None, ge=0, alias="lambda", description="K²(p−q)²/((n−K)q)")
    p_over_q: Optional[float] = Field(default=None, ge=1, description="Ratio p/q")
    p: Optional[float] = Field(default=None, gt=0, le=1, description="In-community edge probability")
    q: Optional[float] = Field(default=None, gt=0, le=1, description="Background edge probability")

    alpha: Optional[float] = Field(default=None, gt=0, le=0.5, description="Side-information flip probability")
    epsilon: Optional[float] = Field(
        default=None, ge=0, le=1,
        description="Probability the side information is revealed; omitted means always revealed"
    )

    iters: int = Field(default=2, ge=0, description="BP iterations t")
    seed: int = Field(default=0, ge=0, description="Master random seed")
    out: Optional[Path] = Field(default=None, description="Output root; a run directory is created inside")
    grid: Optional[int] = Field(default=None, ge=3, description="Grid points for EXIT curves")
    fit_j: bool = Field(default=False, description="Also fit the three-parameter J to each table")
    tol: Optional[float] = Field(default=None, gt=0, description="DE fixed-point tolerance")
    threads: Optional[int] = Field(default=None, ge=1, le=256, description="Worker cap")

    vary: Dict[str, List[float]] = Field(default_factory=dict, description="Curve families for exit")
    scan_param: Optional[str] = Field(default=None, description="Parameter bisected by scan")
    scan_range: Optional[Tuple[float, float]] = Field(default=None, description="Scan interval")
    bisect_tol: float = Field(default=1e-3, gt=0, description="Bracket width at which a scan stops")

    input_dir: Optional[Path] = Field(default=None, description="Run directory produced by generate")
    quick: bool = Field(default=False, description="Run the short validation subset")
    inject_fault: Optional[str] = Field(default=None, description="Deliberate fault for validation self-test")

    @field_validator("vary")
    @classmethod
    def validate_vary(cls, v: Dict[str, List[float]]) -> Dict[str, List[float]]:
        allowed = {"mu", "alpha", "epsilon", "lambda", "k_frac"}
        unknown = sorted(set(v) - allowed)
        if unknown:
            raise ValueError(f"cannot vary {unknown}; choose from {sorted(allowed)}")
        if any(not values for values in v.values()):
            raise ValueError("every varied parameter needs at least one value")
        return v

    @model_validator(mode="after")
    def validate_scan_range(self) -> "RunConfig":
        if self.scan_range is not None and not self.scan_range[0] < self.scan_range[1]:
            raise ValueError(f"scan range must satisfy lo < hi, got {self.scan_range}")
        return self
