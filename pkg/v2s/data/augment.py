"""
Training-time video augmentation and critic window sampling.

One crop window of ``round(0.9 * H) x round(0.9 * W)`` is applied to every
frame of a clip and rescaled back to ``H x W``; the whole clip is then
mirrored with probability 0.5. Evaluation uses the centred window and never
flips.
"""
from typing import Tuple

import torch
import torchvision.transforms.functional as TF
from torchvision.transforms import InterpolationMode

from ..core.rng import Rng
from ..core.types import VideoClip, Waveform
from ..errors import ShapeError

CROP_FRACTION = 0.9


def crop_size(height: int, width: int, fraction: float = CROP_FRACTION) -> Tuple[int, int]:
    return int(round(fraction * height)), int(round(fraction * width))


def crop_and_resize(clip: VideoClip, top: int, left: int, size: Tuple[int, int]) -> VideoClip:
    frames = TF.crop(clip.frames, top=top, left=left, height=size[0], width=size[1])
    frames = TF.resize(
        frames, [clip.height, clip.width], interpolation=InterpolationMode.BILINEAR, antialias=True
    )
    return VideoClip(frames.clamp(0.0, 1.0), clip.frame_rate)


def center_crop(clip: VideoClip, fraction: float = CROP_FRACTION) -> VideoClip:
    size = crop_size(clip.height, clip.width, fraction)
    return crop_and_resize(clip, (clip.height - size[0]) // 2, (clip.width - size[1]) // 2, size)


def hflip(clip: VideoClip) -> VideoClip:
    return VideoClip(TF.hflip(clip.frames), clip.frame_rate)


def augment(clip: VideoClip, rng: Rng, train: bool = True) -> VideoClip:
    if not train:
        return center_crop(clip)
    size = crop_size(clip.height, clip.width)
    top = rng.randint(0, clip.height - size[0])
    left = rng.randint(0, clip.width - size[1])
    out = crop_and_resize(clip, top, left, size)
    if rng.bernoulli(0.5):
        out = hflip(out)
    return out


def _window(x: torch.Tensor, start: int, length: int) -> torch.Tensor:
    piece = x[..., start : start + length]
    if piece.shape[-1] < length:
        piece = torch.nn.functional.pad(piece, (0, length - piece.shape[-1]))
    return piece


def window_start(num_samples: int, clip_samples: int, rng: Rng) -> int:
    if num_samples <= clip_samples:
        return 0
    return rng.randint(0, num_samples - clip_samples)


def sample_clip_window(
    real: Waveform, fake: Waveform, rng: Rng, clip_seconds: float = 1.0
) -> Tuple[Waveform, Waveform]:
    """
    Cut the same randomly placed window from both waveforms; inputs shorter
    than ``clip_seconds`` are right-padded with zeros.
    """
    if len(real) != len(fake):
        raise ShapeError(f"real and fake waveforms differ in length: {len(real)} vs {len(fake)}")
    if len(real) < 1:
        raise ShapeError("cannot sample a window from an empty waveform")
    length = int(round(clip_seconds * real.sample_rate))
    start = window_start(len(real), length, rng)
    return (
        Waveform(_window(real.samples, start, length), real.sample_rate),
        Waveform(_window(fake.samples, start, length), fake.sample_rate),
    )


def sample_clip_windows(
    real: torch.Tensor, fake: torch.Tensor, rng: Rng, clip_samples: int
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Batched :func:`sample_clip_window` on ``(B, n)`` tensors, one window per row."""
    if real.shape != fake.shape:
        raise ShapeError(f"real and fake batches differ in shape: {tuple(real.shape)} vs {tuple(fake.shape)}")
    starts = [window_start(real.shape[-1], clip_samples, rng) for _ in range(real.shape[0])]
    real_clips = torch.stack([_window(r, s, clip_samples) for r, s in zip(real, starts)])
    fake_clips = torch.stack([_window(f, s, clip_samples) for f, s in zip(fake, starts)])
    return real_clips, fake_clips
