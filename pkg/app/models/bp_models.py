"""Belief propagation state and error containers"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field


@dataclass(frozen=True)
class BpState:
    """Messages (one per directed edge, CSR order) and beliefs after ``iterations`` rounds."""
    messages: np.ndarray
    beliefs: np.ndarray
    iterations: int
    clamp_count: int = 0


@dataclass(frozen=True)
class TreeLlr:
    """Exact LLR Γ for every node of a tree; ``side`` holds h."""
    gamma: np.ndarray
    side: np.ndarray

    @property
    def root(self) -> float:
        return float(self.gamma[0])

    @property
    def incoming(self) -> np.ndarray:
        """Γ − h: Φ in the symmetric model, ψ in the single model."""
        return self.gamma - self.side


class CommunityError(BaseModel):
    """Error of an estimated community against the hidden one"""
    symmetric_difference_ratio: float = Field(..., ge=0, description="|Ĉ △ C*| / K")
    false_inclusions: int = Field(..., ge=0, description="Nodes outside C* that were included")
    misses: int = Field(..., ge=0, description="Members of C* that were left out")
    type_i_rate: Optional[float] = Field(None, description="false_inclusions / (n − K)")
    type_ii_rate: float = Field(..., ge=0, le=1, description="misses / K")
    per_node_error: Optional[float] = Field(
        None, description="(K/n)·type_ii_rate + ((n−K)/n)·type_i_rate"
    )
