"""
Side-information channels: construction, sampling and LLR lookup.
"""
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import ValidationError
from app.models.channel_models import LlrModel, LlrSpec, SideInfoChannel


def make_channel(plus: Sequence[float], minus: Sequence[float], symbols: Sequence[str] = ()) -> SideInfoChannel:
    """Build a channel, converting pydantic errors to ``ValidationError``."""
    try:
        return SideInfoChannel(
            plus_likelihoods=tuple(float(v) for v in plus),
            minus_likelihoods=tuple(float(v) for v in minus),
            symbols=tuple(symbols),
        )
    except PydanticValidationError as e:
        raise ValidationError(
            "Invalid side-information channel",
            details={"errors": [err["msg"] for err in e.errors()]}
        ) from e


def erasure_flip_channel(epsilon: float, alpha: float) -> SideInfoChannel:
    """
    Three-symbol channel: the label is revealed with probability epsilon and,
    when revealed, flipped with probability alpha.

    Symbols are ordered (+, -, erased).
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(
            "epsilon must lie in [0, 1]",
            details={"parameter": "epsilon", "value": epsilon}
        )
    if not 0.0 < alpha < 0.5:
        raise ValidationError(
            "alpha must lie in (0, 0.5) for the erasure/flip channel",
            details={"parameter": "alpha", "value": alpha}
        )
    plus = (epsilon * (1 - alpha), epsilon * alpha, 1 - epsilon)
    minus = (epsilon * alpha, epsilon * (1 - alpha), 1 - epsilon)
    return make_channel(plus, minus, ("+", "-", "erased"))


def binary_flip_channel(alpha: float) -> SideInfoChannel:
    """Two-symbol channel reporting the label flipped with probability alpha."""
    if not 0.0 < alpha <= 0.5:
        raise ValidationError(
            "alpha must lie in (0, 0.5] for the binary flip channel",
            details={"parameter": "alpha", "value": alpha}
        )
    return make_channel((1 - alpha, alpha), (alpha, 1 - alpha), ("1", "0"))


def llr_values(channel: SideInfoChannel, model: LlrModel) -> np.ndarray:
    """Per-symbol LLRs; half-log for the symmetric model, full log for the single model."""
    plus, minus = channel.plus, channel.minus
    used = (plus > 0) & (minus > 0)
    values = np.zeros(channel.alphabet_size)
    values[used] = np.log(plus[used]) - np.log(minus[used])
    if model == LlrModel.SYMMETRIC_HALF_LOG:
        values *= 0.5
    return values


def llr_spec(channel: SideInfoChannel, model: LlrModel) -> LlrSpec:
    """LLR values with their label-conditional distributions (U+/U- or U1/U0)."""
    return LlrSpec(
        model=model,
        values=tuple(llr_values(channel, model).tolist()),
        plus_probs=channel.plus_likelihoods,
        minus_probs=channel.minus_likelihoods,
    )


def llr_of(channel: SideInfoChannel, symbol: int, model: LlrModel) -> float:
    """LLR of one symbol under the given model convention."""
    if not 0 <= int(symbol) < channel.alphabet_size:
        raise ValidationError(
            "symbol index out of range",
            details={"symbol": int(symbol), "alphabet_size": channel.alphabet_size}
        )
    return float(llr_values(channel, model)[int(symbol)])


def node_llrs(channel: SideInfoChannel, symbols: np.ndarray, model: LlrModel) -> np.ndarray:
    """Vectorized lookup of per-node side-information LLRs h_i."""
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= channel.alphabet_size):
        raise ValidationError(
            "symbol index out of range",
            details={"alphabet_size": channel.alphabet_size}
        )
    return llr_values(channel, model)[symbols]


def sample_side_info(labels: np.ndarray, channel: SideInfoChannel, seed) -> np.ndarray:
    """
    Draw one symbol per node, independently given its label.

    Labels may be {+1, -1} or {1, 0}; +1 and 1 select ``plus_likelihoods``.
    ``seed`` may be an integer or a ``numpy.random.Generator`` owned by the caller.
    """
    labels = np.asarray(labels)
    if labels.size and not np.all(np.isin(labels, (-1, 0, 1))):
        raise ValidationError("labels must be in {+1, -1} or {1, 0}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    positive = labels == 1
    cdf_plus = np.cumsum(channel.plus)
    cdf_minus = np.cumsum(channel.minus)
    u = rng.random(labels.shape)
    symbols = np.where(
        positive,
        np.searchsorted(cdf_plus, u, side="right"),
        np.searchsorted(cdf_minus, u, side="right"),
    )
    # cumsum may end a hair below 1
    return np.minimum(symbols, channel.alphabet_size - 1).astype(np.int64)


def change_of_measure_sum(channel: SideInfoChannel) -> float:
    """Σ_m α+_m (α-_m / α+_m) over symbols with α+_m > 0; exactly 1 for a valid channel."""
    plus, minus = channel.plus, channel.minus
    used = plus > 0
    return float(np.sum(plus[used] * (minus[used] / plus[used])))


def flip_channel(alpha: float, epsilon: Optional[float] = None) -> SideInfoChannel:
    """Binary flip channel when ``epsilon`` is None, else the erasure/flip channel."""
    if epsilon is None:
        return binary_flip_channel(alpha)
    return erasure_flip_channel(epsilon, alpha)
