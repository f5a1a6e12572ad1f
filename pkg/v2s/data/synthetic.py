"""
Synthetic audiovisual corpus.

Every clip is a random sequence of tones, one per video frame. The audio is
a phase-continuous sine per 640-sample segment; the frame shows a white
horizontal bar whose vertical position encodes the tone index. Rest frames
are black and silent.
"""
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import torch
from tqdm import tqdm

from ..core.config import samples_per_frame
from ..core.rng import Rng
from ..core.types import VideoClip, Waveform
from ..errors import ConfigurationError
from .io import save_audio, save_video
from .manifest import ManifestRecord, write_manifest

logpy = logging.getLogger(__name__)

REST = -1
DEFAULT_TONES = (400.0, 600.0, 800.0, 1000.0, 1200.0, 1400.0, 1600.0, 1800.0)
BASE_AMPLITUDE = 0.5


@dataclass(frozen=True)
class SyntheticSpec:
    num_clips: int
    frames_per_clip: int = 25
    tones: Tuple[float, ...] = DEFAULT_TONES
    seed: int = 0
    rest_probability: float = 0.0
    num_speakers: int = 1
    split_mode: str = "seen"
    image_size: int = 96
    sample_rate: int = 16000
    frame_rate: int = 25

    def __post_init__(self):
        object.__setattr__(self, "tones", tuple(float(t) for t in self.tones))
        if self.num_clips < 1:
            raise ConfigurationError(f"num_clips must be ≥ 1, got {self.num_clips}")
        if self.frames_per_clip < 1:
            raise ConfigurationError(f"frames_per_clip must be ≥ 1, got {self.frames_per_clip}")
        if not self.tones:
            raise ConfigurationError("at least one tone is required")
        nyquist = self.sample_rate / 2
        for tone in self.tones:
            if not 0 < tone < nyquist:
                raise ConfigurationError(f"tone {tone} Hz must lie in (0, {nyquist}) Hz")
        if not 0 <= self.rest_probability < 1:
            raise ConfigurationError(f"rest_probability must be in [0, 1), got {self.rest_probability}")
        if not 1 <= self.num_speakers <= 10:
            raise ConfigurationError(f"num_speakers must be in [1, 10], got {self.num_speakers}")
        if self.split_mode not in ("seen", "unseen"):
            raise ConfigurationError(f"split_mode must be 'seen' or 'unseen', got {self.split_mode!r}")
        if self.split_mode == "unseen" and self.num_speakers < 3:
            raise ConfigurationError("split_mode 'unseen' needs num_speakers ≥ 3")
        samples_per_frame(self.sample_rate, self.frame_rate)

    @property
    def samples_per_frame(self) -> int:
        return samples_per_frame(self.sample_rate, self.frame_rate)


def speaker_amplitude(speaker: int) -> float:
    return BASE_AMPLITUDE * (1 - 0.1 * speaker)


def speaker_brightness(speaker: int) -> float:
    return 1 - 0.1 * speaker


def tone_sequence(spec: SyntheticSpec, rng: Rng) -> List[int]:
    """Tone index per frame, :data:`REST` for rest frames."""
    sequence = []
    for _ in range(spec.frames_per_clip):
        if spec.rest_probability > 0 and rng.bernoulli(spec.rest_probability):
            sequence.append(REST)
        else:
            sequence.append(rng.randint(0, len(spec.tones) - 1))
    return sequence


def bar_geometry(num_tones: int, image_size: int) -> Tuple[int, List[int]]:
    """Bar height and the top row of the bar for every tone index."""
    height = max(2, image_size // (2 * num_tones))
    span = image_size - height
    tops = [int(round(i * span / max(1, num_tones - 1))) for i in range(num_tones)]
    return height, tops


def render_frame(index: int, spec: SyntheticSpec, speaker: int = 0) -> np.ndarray:
    frame = np.zeros((spec.image_size, spec.image_size), dtype=np.float32)
    if index != REST:
        height, tops = bar_geometry(len(spec.tones), spec.image_size)
        frame[tops[index] : tops[index] + height, :] = speaker_brightness(speaker)
    return frame


def render_video(sequence: List[int], spec: SyntheticSpec, speaker: int = 0) -> VideoClip:
    frames = np.stack([render_frame(i, spec, speaker) for i in sequence])
    return VideoClip(torch.from_numpy(frames), spec.frame_rate)


def render_audio(sequence: List[int], spec: SyntheticSpec, speaker: int = 0) -> Waveform:
    n = spec.samples_per_frame
    t = np.arange(n, dtype=np.float64)
    amplitude = speaker_amplitude(speaker)
    phase = 0.0
    segments = []
    for index in sequence:
        if index == REST:
            segments.append(np.zeros(n))
            continue
        omega = 2 * math.pi * spec.tones[index] / spec.sample_rate
        segments.append(amplitude * np.sin(phase + omega * t))
        phase = math.fmod(phase + omega * n, 2 * math.pi)
    return Waveform(torch.from_numpy(np.concatenate(segments)).float(), spec.sample_rate)


def transcript(sequence: List[int]) -> str:
    return " ".join(str(i) for i in sequence if i != REST)


def decode_bar_positions(clip: VideoClip, num_tones: int) -> List[int]:
    """Invert :func:`render_frame`: the tone index of every frame, REST for dark frames."""
    height, tops = bar_geometry(num_tones, clip.height)
    rows = clip.frames.mean(dim=2)
    indices = []
    for row in rows:
        if float(row.max()) < 0.25:
            indices.append(REST)
            continue
        scores = [float(row[top : top + height].mean()) for top in tops]
        indices.append(int(np.argmax(scores)))
    return indices


def _assign_splits(spec: SyntheticSpec, speakers: List[int]) -> List[str]:
    n = spec.num_clips
    if spec.split_mode == "unseen":
        test_speaker, val_speaker = spec.num_speakers - 1, spec.num_speakers - 2
        return ["test" if s == test_speaker else "val" if s == val_speaker else "train" for s in speakers]
    n_test = int(n * 0.05 + 0.5)
    n_val = int(n * 0.05 + 0.5)
    n_train = n - n_val - n_test
    return ["train"] * n_train + ["val"] * n_val + ["test"] * n_test


def make_synthetic_corpus(spec: SyntheticSpec, out_dir: Union[str, os.PathLike]) -> Path:
    """
    Write videos, WAVs, transcripts and ``manifest.jsonl`` under ``out_dir``.

    Returns:
        Path: the manifest path.
    """
    out_dir = Path(out_dir)
    for sub in ("video", "audio", "transcripts"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    rng = Rng(spec.seed)
    speakers = [i % spec.num_speakers for i in range(spec.num_clips)]
    splits = _assign_splits(spec, speakers)
    records = []
    for i in tqdm(range(spec.num_clips), desc="synthesizing clips", disable=None):
        clip_id = f"clip{i:05d}"
        speaker = speakers[i]
        sequence = tone_sequence(spec, rng.spawn(i))
        video_rel, audio_rel = f"video/{clip_id}.v2sf", f"audio/{clip_id}.wav"
        save_video(render_video(sequence, spec, speaker), out_dir / video_rel)
        save_audio(render_audio(sequence, spec, speaker), out_dir / audio_rel)
        words = transcript(sequence)
        (out_dir / "transcripts" / f"{clip_id}.txt").write_text(words + "\n", encoding="utf-8")
        records.append(ManifestRecord(clip_id, video_rel, audio_rel, words, f"spk{speaker}", splits[i]))
    manifest = write_manifest(records, out_dir / "manifest.jsonl")
    counts = {s: splits.count(s) for s in ("train", "val", "test")}
    logpy.info(f"Wrote {spec.num_clips} synthetic clips to {out_dir} ({counts})")
    return manifest
