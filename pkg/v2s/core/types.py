"""
Immutable domain values passed between modules.

Tensors held by these types must not be mutated after construction; every
operation that changes data returns a new value.
"""
from dataclasses import dataclass

import torch

from ..errors import ShapeError

DEFAULT_FRAME_RATE = 25
DEFAULT_SAMPLE_RATE = 16000
DEFAULT_IMAGE_SIZE = 96


@dataclass(frozen=True)
class VideoClip:
    """
    Single-channel mouth-ROI frames.

    :param frames: float tensor of shape ``(T, H, W)`` with values in [0, 1]
    :param frame_rate: frames per second
    """

    frames: torch.Tensor
    frame_rate: int = DEFAULT_FRAME_RATE

    def __post_init__(self):
        frames = torch.as_tensor(self.frames)
        if not torch.is_floating_point(frames):
            frames = frames.float()
        if frames.ndim != 3:
            raise ShapeError(f"VideoClip frames must have shape (T, H, W), got {tuple(frames.shape)}")
        if frames.shape[0] < 1:
            raise ShapeError("VideoClip needs at least one frame")
        if frames.numel() and (frames.min() < 0.0 or frames.max() > 1.0):
            raise ValueError("VideoClip intensities must lie in [0, 1]")
        if self.frame_rate <= 0:
            raise ValueError(f"frame_rate must be > 0, got {self.frame_rate}")
        object.__setattr__(self, "frames", frames)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def seconds(self) -> float:
        return self.num_frames / self.frame_rate


@dataclass(frozen=True)
class Waveform:
    """
    Mono audio with amplitudes in [-1, 1].

    :param samples: 1-D float tensor
    :param sample_rate: Hz
    """

    samples: torch.Tensor
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = torch.as_tensor(self.samples)
        if not torch.is_floating_point(samples):
            samples = samples.float()
        if samples.ndim != 1:
            raise ShapeError(f"Waveform samples must be 1-D, got shape {tuple(samples.shape)}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if samples.numel() and (samples.min() < -1.0 or samples.max() > 1.0):
            raise ValueError("Waveform samples must lie in [-1, 1]")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def clamped(cls, samples, sample_rate: int = DEFAULT_SAMPLE_RATE) -> "Waveform":
        """Build from real audio, clamping any out-of-range samples."""
        return cls(torch.as_tensor(samples).clamp(-1.0, 1.0), sample_rate)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def seconds(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class FeatureSequence:
    """Per-frame visual features, shape ``(T, D)``."""

    features: torch.Tensor

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ShapeError(f"FeatureSequence must be (T, D), got {tuple(self.features.shape)}")

    @property
    def num_frames(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class NormalizedSpectrogram:
    """Critic-ready log-power spectrogram, shape ``(F, L)``, values in [-1, 1]."""

    values: torch.Tensor

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ShapeError(f"NormalizedSpectrogram must be (F, L), got {tuple(self.values.shape)}")
        if self.values.numel() and (self.values.min() < -1.0 or self.values.max() > 1.0):
            raise ValueError("NormalizedSpectrogram values must lie in [-1, 1]")

    @property
    def num_bins(self) -> int:
        return self.values.shape[0]

    @property
    def num_frames(self) -> int:
        return self.values.shape[1]
