"""Pydantic models and array containers"""

from app.models.analysis_models import ExitCurve, JTable, ModelKind, ScanReport
from app.models.channel_models import LlrModel, SideInfoChannel
from app.models.graph_models import Graph, LabeledTree, SampledGraph, SingleCommunityParams, SymmetricSbmParams
from app.models.requests import RunConfig
from app.models.responses import (
    BpReport,
    DeReport,
    ErrorReport,
    ExitReport,
    RunManifest,
    ValidationReport,
)

__all__ = [
    "ModelKind",
    "LlrModel",
    "SideInfoChannel",
    "SymmetricSbmParams",
    "SingleCommunityParams",
    "Graph",
    "LabeledTree",
    "SampledGraph",
    "JTable",
    "ExitCurve",
    "ScanReport",
    "RunConfig",
    "RunManifest",
    "BpReport",
    "DeReport",
    "ExitReport",
    "ValidationReport",
    "ErrorReport",
]
