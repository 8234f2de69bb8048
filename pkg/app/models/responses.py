"""Pydantic report models written by each command"""

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app.models.analysis_models import ModelKind
from app.models.bp_models import CommunityError


class RunManifest(BaseModel):
    """Everything needed to reproduce a run bit-exactly"""
    run_id: str = Field(..., description="Unique identifier, also the run directory name")
    run_dir: str = ""
    command: str
    seed: int
    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    params: Dict[str, Any] = Field(default_factory=dict, description="Resolved model and channel parameters")
    run_config: Dict[str, Any] = Field(default_factory=dict, description="The RunConfig as given")
    settings: Dict[str, Any] = Field(default_factory=dict, description="Numerical settings in effect")
    files: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    metrics: Dict[str, Any] = Field(default_factory=dict)
    duration_s: float = 0.0

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "run_id": "bp-s1-3f2a9c1e",
                    "command": "bp",
                    "seed": 1,
                    "params": {"n": 100000, "a": 160.0, "b": 100.0, "mu": 6.0, "t": 2},
                    "files": ["beliefs.csv", "estimates.csv", "report.json"],
                    "warnings": [],
                    "duration_s": 12.4
                }
            ]
        }
    }


class BpReport(BaseModel):
    """Empirical BP error next to the density-evolution prediction"""
    model: ModelKind
    t: int
    n: int
    num_edges: int
    average_degree: float
    clamp_count: int
    coupling_ok: bool = Field(..., description="(avg degree)^t ≤ n / margin")
    misclassification_rate: Optional[float] = Field(None, description="Raw fraction of wrong labels")
    misclassification_rate_flip_min: Optional[float] = Field(
        None, description="Minimum over the global sign flip"
    )
    community_error: Optional[CommunityError] = Field(None, description="Top-K estimator")
    map_community_error: Optional[CommunityError] = Field(None, description="Threshold estimator Γ ≥ ν")
    map_size: Optional[int] = None
    predicted_error: float = Field(..., description="DE prediction at the same t")
    predicted_type_i: Optional[float] = None
    predicted_type_ii: Optional[float] = None
    de_state: float


class DeReport(BaseModel):
    model: ModelKind
    params: Dict[str, float]
    fixed_point: float
    converged: bool
    iterations: int
    final_predicted_error: float


class CurveEntry(BaseModel):
    params: Dict[str, Optional[float]]
    csv: str
    summary: str
    operating_point: Optional[float] = None
    operating_point_stable: Optional[bool] = None
    crossings: int
    staircase_steps: Optional[int] = None
    j_fit_max_residual: Optional[float] = Field(None, description="Largest |J_fit − J| on the table grid, in bits")
    j_fit_rank_deficient: Optional[bool] = None


class ExitReport(BaseModel):
    model: ModelKind
    curves: List[CurveEntry]


class CheckResult(BaseModel):
    """One named check of the validation suite"""
    name: str
    passed: bool
    measured: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


class ValidationReport(BaseModel):
    seed: int
    quick: bool
    inject_fault: Optional[str] = None
    passed: bool
    checks: List[CheckResult]

    @property
    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]


class ErrorReport(BaseModel):
    """Error payload printed to stderr before a nonzero exit"""
    error_type: str
    message: str
    exit_code: int
    details: Dict[str, Any] = Field(default_factory=dict)
