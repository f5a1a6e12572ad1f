"""
File formats.

Audio is RIFF WAV, mono, 16-bit PCM; a sample ``s`` reads as ``s / 32768``.
Video is the raw-frame ``V2SF`` container::

    b"V2SF" | u8 version (=1) | u16 T | u16 H | u16 W | T*H*W bytes

little-endian, 8-bit intensities, row-major within a frame, frames in order.
"""
import logging
import os
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np
import soundfile as sf
import torch

from ..core.types import DEFAULT_FRAME_RATE, DEFAULT_SAMPLE_RATE, VideoClip, Waveform
from ..errors import FormatError

logpy = logging.getLogger(__name__)

V2SF_MAGIC = b"V2SF"
V2SF_VERSION = 1
V2SF_HEADER = struct.Struct("<4sBHHH")
PCM_SCALE = 32768.0

PathLike = Union[str, os.PathLike]


def _audio_format(rate: int) -> str:
    return f"mono 16-bit PCM WAV at {rate} Hz"


def load_audio(path: PathLike, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    path = Path(path)
    expected = _audio_format(sample_rate)
    if not path.is_file():
        raise FormatError(f"audio file not found: {path}")
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise FormatError(f"{path}: unreadable header, expected {expected}") from e
    if info.format != "WAV" or info.subtype != "PCM_16":
        raise FormatError(f"{path}: {info.format}/{info.subtype}, expected {expected}")
    if info.channels != 1:
        raise FormatError(f"{path}: {info.channels} channels, expected {expected}")
    if info.samplerate != sample_rate:
        raise FormatError(f"{path}: sample rate {info.samplerate} Hz, expected {expected}")
    data, _ = sf.read(str(path), dtype="int16", always_2d=False)
    return Waveform(torch.from_numpy(data.astype(np.float32) / PCM_SCALE), sample_rate)


def quantize_audio(samples) -> np.ndarray:
    samples = torch.as_tensor(samples).detach().cpu().double().numpy()
    return np.clip(np.round(samples * PCM_SCALE), -32768, 32767).astype(np.int16)


def save_audio(waveform: Waveform, path: PathLike) -> Path:
    path = Path(path)
    sf.write(str(path), quantize_audio(waveform.samples), waveform.sample_rate, subtype="PCM_16", format="WAV")
    return path


def load_video(path: PathLike, frame_rate: int = DEFAULT_FRAME_RATE, image_size: Optional[int] = None) -> VideoClip:
    """
    Read a V2SF container.

    Raises:
        FormatError: bad magic, unsupported version, size mismatch, or frames
            that are not ``image_size`` square when ``image_size`` is given.
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"video file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < V2SF_HEADER.size:
        raise FormatError(f"{path}: truncated header, expected a V2SF container")
    magic, version, t, h, w = V2SF_HEADER.unpack_from(raw)
    if magic != V2SF_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected a V2SF container")
    if version != V2SF_VERSION:
        raise FormatError(f"{path}: V2SF version {version}, expected version {V2SF_VERSION}")
    if t == 0 or h == 0 or w == 0:
        raise FormatError(f"{path}: empty V2SF container ({t}x{h}x{w})")
    payload = len(raw) - V2SF_HEADER.size
    if payload != t * h * w:
        raise FormatError(f"{path}: {payload} payload bytes, header promises {t}x{h}x{w} = {t * h * w}")
    if image_size is not None and (h, w) != (image_size, image_size):
        raise FormatError(f"{path}: frames are {h}x{w}, expected {image_size}x{image_size}")
    frames = np.frombuffer(raw, dtype=np.uint8, offset=V2SF_HEADER.size).reshape(t, h, w)
    return VideoClip(torch.from_numpy(frames.astype(np.float32) / 255.0), frame_rate)


def save_video(clip: VideoClip, path: PathLike) -> Path:
    path = Path(path)
    if max(clip.num_frames, clip.height, clip.width) > 0xFFFF:
        raise FormatError(f"clip of {clip.num_frames}x{clip.height}x{clip.width} does not fit a V2SF header")
    frames = np.clip(np.round(clip.frames.detach().cpu().double().numpy() * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(V2SF_HEADER.pack(V2SF_MAGIC, V2SF_VERSION, clip.num_frames, clip.height, clip.width))
        f.write(frames.tobytes(order="C"))
    return path
