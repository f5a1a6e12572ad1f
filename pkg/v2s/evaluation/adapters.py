"""
Adapters for external scorers (PESQ, ASR) and the built-in oracle
recognizer for the synthetic tone corpus.
"""
import logging
import re
from typing import List, Optional, Sequence

import numpy as np

from ..core.types import Waveform
from ..data.adapter import run_tool
from ..data.synthetic import DEFAULT_TONES
from ..errors import AdapterError

logpy = logging.getLogger(__name__)

_NUMBER = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")
SILENCE_RMS = 0.01


def pesq_adapter(command_template: Optional[str], ref_path, deg_path, timeout: Optional[float] = 300) -> Optional[float]:
    """
    Score ``deg_path`` against ``ref_path`` with a user-supplied PESQ tool
    (placeholders ``{ref}`` and ``{deg}``); the last number it prints is the
    score. Returns None when unconfigured or when the tool fails.
    """
    if not command_template:
        return None
    try:
        output = run_tool(command_template, {"ref": str(ref_path), "deg": str(deg_path)}, timeout)
    except AdapterError as e:
        logpy.warning(f"PESQ failed for {deg_path}: {e}")
        return None
    numbers = _NUMBER.findall(output)
    if not numbers:
        logpy.warning(f"PESQ printed no score for {deg_path}: {output.strip()!r}")
        return None
    return float(numbers[-1])


def asr_adapter(command_template: Optional[str], wav_path, timeout: Optional[float] = 300) -> Optional[List[str]]:
    """Words printed by a user-supplied recognizer run on ``{in}``; None when it fails."""
    if not command_template:
        return None
    try:
        output = run_tool(command_template, {"in": str(wav_path)}, timeout)
    except AdapterError as e:
        logpy.warning(f"ASR failed for {wav_path}: {e}")
        return None
    return output.split()


def oracle_asr(
    waveform: Waveform,
    tones: Sequence[float] = DEFAULT_TONES,
    samples_per_frame: int = 640,
    silence_rms: float = SILENCE_RMS,
) -> List[str]:
    """
    Recognizer for the synthetic corpus: every non-silent frame-length
    segment becomes the index of the tone nearest its Hann-windowed DFT peak.
    """
    samples = waveform.samples.detach().cpu().double().numpy()
    tones = np.asarray(tones, dtype=np.float64)
    window = np.hanning(samples_per_frame)
    freqs = np.fft.rfftfreq(samples_per_frame, d=1.0 / waveform.sample_rate)
    words = []
    for start in range(0, len(samples) - samples_per_frame + 1, samples_per_frame):
        segment = samples[start : start + samples_per_frame]
        if np.sqrt(np.mean(segment**2)) < silence_rms:
            continue
        peak = freqs[np.argmax(np.abs(np.fft.rfft(segment * window)))]
        words.append(str(int(np.argmin(np.abs(tones - peak)))))
    return words
