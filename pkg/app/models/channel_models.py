"""Side-information channel models

Symbols with zero probability under both labels are accepted (the erasure/flip
channel at epsilon = 0 or 1 has them); they are never sampled and their LLR is 0.
"""

from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from app.services.numerics import DiscreteDistribution

PROBABILITY_TOL = 1e-12


class LlrModel(str, Enum):
    """LLR convention of a model"""
    SYMMETRIC_HALF_LOG = "symmetric_half_log"
    SINGLE_FULL_LOG = "single_full_log"


class SideInfoChannel(BaseModel):
    """M-ary channel with label-conditional likelihoods.

    ``plus_likelihoods[m]`` is P(y = m | label +1) in the symmetric model and
    P(y = m | label 1) in the single-community model; ``minus_likelihoods``
    conditions on label -1 (resp. 0).
    """

    plus_likelihoods: Tuple[float, ...] = Field(
        ...,
        min_length=1,
        description="P(symbol | positive label), one entry per symbol"
    )
    minus_likelihoods: Tuple[float, ...] = Field(
        ...,
        min_length=1,
        description="P(symbol | negative label), one entry per symbol"
    )
    symbols: Tuple[str, ...] = Field(
        default=(),
        description="Optional symbol names, for reports"
    )

    @model_validator(mode="after")
    def validate_likelihoods(self) -> "SideInfoChannel":
        plus = np.asarray(self.plus_likelihoods, dtype=float)
        minus = np.asarray(self.minus_likelihoods, dtype=float)
        if plus.size != minus.size:
            raise ValueError(
                f"likelihood vectors differ in length ({plus.size} vs {minus.size})"
            )
        if np.any(plus < 0) or np.any(minus < 0):
            raise ValueError("likelihoods must be nonnegative")
        for name, vec in (("plus_likelihoods", plus), ("minus_likelihoods", minus)):
            if abs(vec.sum() - 1.0) > PROBABILITY_TOL:
                raise ValueError(f"{name} must sum to 1, got {vec.sum()!r}")
        if not np.any((plus > 0) & (minus > 0)):
            raise ValueError("at least one symbol must be possible under both labels")
        one_sided = (plus == 0) ^ (minus == 0)
        if np.any(one_sided):
            raise ValueError(
                f"symbols {np.flatnonzero(one_sided).tolist()} have zero probability under exactly "
                "one label, which gives an infinite LLR"
            )
        if self.symbols and len(self.symbols) != plus.size:
            raise ValueError("symbols must name every alphabet letter")
        return self

    @computed_field
    @property
    def alphabet_size(self) -> int:
        return len(self.plus_likelihoods)

    @property
    def plus(self) -> np.ndarray:
        return np.asarray(self.plus_likelihoods, dtype=float)

    @property
    def minus(self) -> np.ndarray:
        return np.asarray(self.minus_likelihoods, dtype=float)

    def to_json_dict(self) -> dict:
        """``{m, alpha_plus, alpha_minus}`` serialization."""
        return {
            "m": self.alphabet_size,
            "alpha_plus": list(self.plus_likelihoods),
            "alpha_minus": list(self.minus_likelihoods),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SideInfoChannel":
        channel = cls(
            plus_likelihoods=tuple(payload["alpha_plus"]),
            minus_likelihoods=tuple(payload["alpha_minus"]),
        )
        if "m" in payload and int(payload["m"]) != channel.alphabet_size:
            raise ValueError(f"m={payload['m']} does not match {channel.alphabet_size} likelihoods")
        return channel

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {
                    "plus_likelihoods": [0.06, 0.04, 0.9],
                    "minus_likelihoods": [0.04, 0.06, 0.9],
                    "symbols": ["+", "-", "erased"]
                }
            ]
        }
    )


class LlrSpec(BaseModel):
    """Per-symbol LLRs and their label-conditional distributions."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: LlrModel
    values: Tuple[float, ...]
    plus_probs: Tuple[float, ...]
    minus_probs: Tuple[float, ...]

    @property
    def plus_dist(self) -> DiscreteDistribution:
        """Distribution of the LLR given the positive label (U+ or U1)."""
        return DiscreteDistribution(np.asarray(self.values), np.asarray(self.plus_probs))

    @property
    def minus_dist(self) -> DiscreteDistribution:
        """Distribution of the LLR given the negative label (U- or U0)."""
        return DiscreteDistribution(np.asarray(self.values), np.asarray(self.minus_probs))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def components(self) -> List[tuple]:
        """(value, plus_prob, minus_prob) per symbol."""
        return list(zip(self.values, self.plus_probs, self.minus_probs))
