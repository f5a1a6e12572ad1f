"""
Wasserstein critics. Neither network uses batch or weight normalization:
batch statistics couple the samples of a batch and break the per-sample
input gradient that the gradient penalty constrains.
"""
from typing import Sequence, Tuple

import torch
import torch.nn as nn
from einops import rearrange

from ..errors import ShapeError
from .resnet import RESNET18_WIDTHS, ResNetTrunk, no_norm, scaled

WAVE_CRITIC_WIDTHS = (16, 64, 256, 1024, 1024, 1024)


def _groups(in_channels: int, out_channels: int) -> int:
    groups = max(1, in_channels // 4)
    if in_channels % groups or out_channels % groups:
        return 1
    return groups


class WaveCriticNet(nn.Module):
    """
    Seven 1-D convolutions, each followed by Leaky ReLU (slope 0.2), and a
    3-tap convolution head averaged over time into one score per clip.

    :param clip_samples: exact input length accepted (one second at 16 kHz)
    """

    def __init__(
        self,
        clip_samples: int = 16000,
        width_scale: float = 1.0,
        widths: Sequence[int] = WAVE_CRITIC_WIDTHS,
        kernel_size: int = 41,
        stride: int = 4,
        slope: float = 0.2,
    ):
        super().__init__()
        self.clip_samples = clip_samples
        widths = [scaled(w, width_scale) for w in widths]
        layers = [nn.Conv1d(1, widths[0], kernel_size=15, padding=7), nn.LeakyReLU(slope)]
        for c_in, c_out in zip(widths[:4], widths[1:5]):
            layers += [
                nn.Conv1d(c_in, c_out, kernel_size, stride=stride, padding=kernel_size // 2, groups=_groups(c_in, c_out)),
                nn.LeakyReLU(slope),
            ]
        layers += [nn.Conv1d(widths[4], widths[5], kernel_size=5, padding=2), nn.LeakyReLU(slope)]
        layers += [nn.Conv1d(widths[5], widths[5], kernel_size=3, padding=1), nn.LeakyReLU(slope)]
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv1d(widths[5], 1, kernel_size=3, padding=1)

    def forward(self, clips: torch.Tensor) -> torch.Tensor:
        """``(B, clip_samples)`` waveforms to ``(B,)`` scores."""
        if clips.ndim != 2 or clips.shape[-1] != self.clip_samples:
            raise ShapeError(f"wave critic expects (B, {self.clip_samples}) clips, got {tuple(clips.shape)}")
        x = self.body(rearrange(clips, "b n -> b 1 n"))
        return self.head(x).mean(dim=(1, 2))


class PowerCriticNet(nn.Module):
    """
    ResNet-18 over a normalized log-power spectrogram treated as a
    single-channel image, with a 2-D convolutional front-end and a linear
    scalar head.

    :param spec_shape: ``(F, L)`` accepted, (257, 98) for one second of audio
    """

    def __init__(self, spec_shape: Tuple[int, int] = (257, 98), width_scale: float = 1.0):
        super().__init__()
        self.spec_shape = tuple(spec_shape)
        frontend_width = scaled(64, width_scale)
        self.frontend = nn.Sequential(
            nn.Conv2d(1, frontend_width, kernel_size=7, stride=2, padding=3),
            nn.ReLU(True),
            nn.MaxPool2d(kernel_size=3, stride=2, padding=1),
        )
        self.resnet = ResNetTrunk(frontend_width, [scaled(w, width_scale) for w in RESNET18_WIDTHS], norm_layer=no_norm)
        self.head = nn.Linear(self.resnet.out_features, 1)

    def forward(self, specs: torch.Tensor) -> torch.Tensor:
        """``(B, F, L)`` spectrograms to ``(B,)`` scores."""
        if specs.ndim != 3 or tuple(specs.shape[-2:]) != self.spec_shape:
            raise ShapeError(f"power critic expects (B, {self.spec_shape[0]}, {self.spec_shape[1]}), got {tuple(specs.shape)}")
        x = self.frontend(rearrange(specs, "b f l -> b 1 f l"))
        return self.head(self.resnet(x)).squeeze(-1)
