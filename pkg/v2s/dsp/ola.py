"""
Frame-synchronous waveform assembly.

The decoder emits one segment of ``2N`` samples per video frame. Segment ``t``
starts at sample ``t * N``; where two segments overlap the output is their
sample-wise mean, and the trailing ``N`` samples of the last segment are
dropped so ``T`` segments always give exactly ``T * N`` samples.
"""
from typing import Optional, Sequence, Union

import torch

from ..core.types import DEFAULT_SAMPLE_RATE, Waveform
from ..errors import ShapeError


def _stack(segments: Union[torch.Tensor, Sequence]) -> torch.Tensor:
    if isinstance(segments, torch.Tensor):
        return segments
    segments = [torch.as_tensor(s) for s in segments]
    if not segments:
        raise ShapeError("overlap-add needs at least one segment")
    lengths = {s.shape[-1] for s in segments}
    if len(lengths) != 1:
        raise ShapeError(f"all segments must have the same length, got lengths {sorted(lengths)}")
    return torch.stack(segments, dim=-2)


def _check(segments: torch.Tensor, n: Optional[int]) -> int:
    if segments.ndim < 2 or segments.shape[-2] < 1:
        raise ShapeError(f"expected segments of shape (..., T, 2N) with T >= 1, got {tuple(segments.shape)}")
    length = segments.shape[-1]
    if n is None:
        if length % 2:
            raise ShapeError(f"segment length {length} is odd; cannot split into two halves")
        n = length // 2
    if length != 2 * n:
        raise ShapeError(f"segments must have length 2N = {2 * n}, got {length}")
    return n


def overlap_add_tensor(segments: torch.Tensor, n: Optional[int] = None) -> torch.Tensor:
    """``(..., T, 2N)`` segments to ``(..., T * N)`` samples with 50 % overlap averaging."""
    n = _check(segments, n)
    head, tail = segments[..., :n], segments[..., n:]
    blended = torch.cat([head[..., :1, :], (head[..., 1:, :] + tail[..., :-1, :]) / 2], dim=-2)
    return blended.flatten(-2)


def concatenate_heads(segments: torch.Tensor, n: Optional[int] = None) -> torch.Tensor:
    """No-overlap variant: keep the first ``N`` samples of every segment."""
    n = _check(segments, n)
    return segments[..., :n].flatten(-2)


def overlap_add(
    segments: Union[torch.Tensor, Sequence], n: Optional[int] = None, sample_rate: int = DEFAULT_SAMPLE_RATE
) -> Waveform:
    """
    Assemble a single waveform from ``T`` segments of length ``2N``.

    Raises:
        ShapeError: segments of differing length, or not of length ``2N``.
    """
    stacked = _stack(segments)
    if stacked.ndim != 2:
        raise ShapeError(f"expected (T, 2N) segments for one waveform, got {tuple(stacked.shape)}")
    return Waveform(overlap_add_tensor(stacked, n), sample_rate)
