"""
Objective speech metrics: STOI, mel-cepstral distance and word error rate.
"""
import math
import warnings
from typing import List, Sequence, Tuple, Union

import numpy as np
import torch
from pystoi import stoi as _pystoi

from ..dsp.spectral import MfccParams, SignalLike, as_samples, mfcc
from ..errors import MetricError

STOI_FS = 10000
STOI_FRAME = 256
STOI_SEGMENT = 30
MCD_SCALE = 10.0 / math.log(10.0) * math.sqrt(2.0)

Words = Union[str, Sequence[str]]


def _as_numpy(x: SignalLike) -> np.ndarray:
    return as_samples(x).detach().cpu().double().numpy()


def _pair(x: SignalLike, y: SignalLike, what: str) -> Tuple[np.ndarray, np.ndarray]:
    x, y = _as_numpy(x), _as_numpy(y)
    if x.shape != y.shape:
        raise MetricError(f"{what}: signals differ in length ({x.shape[-1]} vs {y.shape[-1]} samples)")
    return x, y


def stoi_min_samples(sample_rate: int = 16000) -> int:
    """Shortest input, in samples, that holds one 30-frame analysis segment at 10 kHz."""
    at_10k = (STOI_SEGMENT + 1) * (STOI_FRAME // 2) + STOI_FRAME
    return int(math.ceil(at_10k * sample_rate / STOI_FS))


def stoi(clean: SignalLike, degraded: SignalLike, sample_rate: int = 16000) -> float:
    """
    Short-time objective intelligibility of ``degraded`` against ``clean``.

    Raises:
        MetricError: unequal lengths, or too little non-silent signal for one analysis segment.
    """
    x, y = _pair(clean, degraded, "stoi")
    if x.shape[-1] < stoi_min_samples(sample_rate):
        raise MetricError(
            f"stoi: {x.shape[-1]} samples is shorter than one analysis segment ({stoi_min_samples(sample_rate)} samples)"
        )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        score = _pystoi(x, y, sample_rate, extended=False)
    for w in caught:
        if "Not enough STFT frames" in str(w.message):
            raise MetricError("stoi: not enough non-silent frames for one analysis segment")
    return float(score)


def mcd_from_mfcc(reference: np.ndarray, estimate: np.ndarray) -> float:
    """MCD between two ``(C, L)`` MFCC matrices, ignoring the 0th coefficient."""
    reference, estimate = np.asarray(reference, dtype=np.float64), np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise MetricError(f"mcd: MFCC matrices differ in shape {reference.shape} vs {estimate.shape}")
    diff = reference[1:] - estimate[1:]
    return float(MCD_SCALE * np.mean(np.sqrt(np.sum(diff**2, axis=0))))


def mcd(reference: SignalLike, estimate: SignalLike, params: MfccParams = MfccParams()) -> float:
    """Mel-cepstral distance in dB; no time warping."""
    x, y = _pair(reference, estimate, "mcd")
    return mcd_from_mfcc(mfcc(torch.from_numpy(x), params).numpy(), mfcc(torch.from_numpy(y), params).numpy())


def _words(words: Words) -> List[str]:
    tokens = words.split() if isinstance(words, str) else list(words)
    return [w.casefold() for w in tokens]


def edit_operations(reference: Words, hypothesis: Words) -> Tuple[int, int, int]:
    """
    Minimum-edit alignment of word sequences.

    Returns:
        (substitutions, deletions, insertions); among equal-cost alignments a
        substitution is preferred over a deletion plus an insertion.
    """
    ref, hyp = _words(reference), _words(hypothesis)
    n, m = len(ref), len(hyp)
    cost = np.zeros((n + 1, m + 1), dtype=np.int64)
    cost[:, 0] = np.arange(n + 1)
    cost[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1])
            cost[i, j] = min(sub, cost[i - 1, j] + 1, cost[i, j - 1] + 1)
    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and cost[i, j] == cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            s += int(ref[i - 1] != hyp[j - 1])
            i, j = i - 1, j - 1
        elif i > 0 and cost[i, j] == cost[i - 1, j] + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return s, d, ins


def wer(reference_words: Words, hypothesis_words: Words) -> float:
    """``(S + D + I) / N`` over word tokens."""
    ref = _words(reference_words)
    if not ref:
        raise MetricError("wer: the reference is empty")
    return sum(edit_operations(ref, hypothesis_words)) / len(ref)
