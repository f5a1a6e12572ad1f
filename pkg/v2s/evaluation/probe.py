"""
Silent-speaker probe: synthesize audio for a mouth that never moves and
measure how quiet the output is.
"""
import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import torch

from ..core.types import VideoClip, Waveform
from ..data.augment import center_crop
from ..data.io import load_video, save_audio
from ..data.manifest import ManifestRecord
from ..models.inference import generate
from .diagnostics import waveform_figure

logpy = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


@dataclass(frozen=True)
class ProbeReport:
    seconds: float
    num_samples: int
    rms: float
    peak: float

    def to_dict(self) -> dict:
        return asdict(self)


def rms(waveform: Waveform) -> float:
    return float(torch.sqrt(torch.mean(waveform.samples.double() ** 2)))


def static_clip(seconds: float, image_size: int = 96, frame_rate: int = 25) -> VideoClip:
    """All-black frames, the rest frame of the synthetic corpus."""
    frames = int(round(seconds * frame_rate))
    return VideoClip(torch.zeros(frames, image_size, image_size), frame_rate)


def _state(checkpoint):
    from ..training.checkpoint import load_checkpoint

    if isinstance(checkpoint, (str, os.PathLike)):
        return load_checkpoint(checkpoint)
    return checkpoint


def silent_probe(checkpoint, seconds: float = 5.0, out_dir: Optional[PathLike] = None) -> ProbeReport:
    """
    Args:
        checkpoint: checkpoint directory or a loaded TrainState.
        out_dir: when given, receives ``silent.wav``, ``silent.png`` and ``silent.json``.
    """
    state = _state(checkpoint)
    config = state.config
    state.generator.eval()
    clip = static_clip(seconds, config.image_size, config.frame_rate)
    waveform = generate(state.generator, clip, config.sample_rate)
    report = ProbeReport(
        seconds=seconds,
        num_samples=len(waveform),
        rms=rms(waveform),
        peak=float(waveform.samples.abs().max()),
    )
    logpy.info(f"silent probe: rms={report.rms:.6f} peak={report.peak:.6f} over {report.num_samples} samples")
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_audio(waveform, out_dir / "silent.wav")
        waveform_figure(waveform, out_dir / "silent.png")
        (out_dir / "silent.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return report


def voiced_rms(checkpoint, records: Sequence[ManifestRecord]) -> float:
    """Mean RMS of the model's output on ``records`` (centre-cropped)."""
    state = _state(checkpoint)
    config = state.config
    state.generator.eval()
    values = []
    for record in records:
        clip = center_crop(load_video(record.video_path, config.frame_rate, config.image_size))
        values.append(rms(generate(state.generator, clip, config.sample_rate)))
    return float(np.mean(values)) if values else 0.0
