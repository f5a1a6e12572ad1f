"""
Video-to-waveform generator: a spatio-temporal front-end and ResNet-18 encode
each frame, a two-layer bidirectional GRU correlates the frame features over
time, and a stack of six transposed 1-D convolutions turns every frame
feature into a ``2N``-sample waveform segment that is overlap-added.
"""
import logging
from typing import Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F
from einops import rearrange

from ..dsp.ola import concatenate_heads, overlap_add_tensor
from ..errors import ShapeError
from .resnet import RESNET18_WIDTHS, ResNetTrunk, scaled

logpy = logging.getLogger(__name__)

DECODER_STRIDES = (5, 4, 4, 4, 2, 2)


class VideoEncoder(nn.Module):
    def __init__(self, image_size: int = 96, frontend_frames: int = 5, width_scale: float = 1.0):
        super().__init__()
        if frontend_frames % 2 == 0:
            raise ValueError(f"frontend_frames must be odd to be centred, got {frontend_frames}")
        self.image_size = image_size
        self.frontend_frames = frontend_frames
        frontend_width = scaled(64, width_scale)
        self.frontend = nn.Sequential(
            nn.Conv3d(1, frontend_width, kernel_size=(frontend_frames, 7, 7), stride=(1, 2, 2), padding=(0, 3, 3), bias=False),
            nn.BatchNorm3d(frontend_width),
            nn.ReLU(True),
            nn.MaxPool3d(kernel_size=(1, 3, 3), stride=(1, 2, 2), padding=(0, 1, 1)),
        )
        self.resnet = ResNetTrunk(frontend_width, [scaled(w, width_scale) for w in RESNET18_WIDTHS])
        self.out_features = self.resnet.out_features

    def forward(self, video: torch.Tensor) -> torch.Tensor:
        """``(B, T, H, W)`` frames to ``(B, T, D0)`` frame features."""
        if video.ndim != 4 or tuple(video.shape[-2:]) != (self.image_size, self.image_size):
            raise ShapeError(
                f"expected video of shape (B, T, {self.image_size}, {self.image_size}), got {tuple(video.shape)}"
            )
        batch = video.shape[0]
        pad = self.frontend_frames // 2
        x = rearrange(video, "b t h w -> b 1 t h w")
        # replicate edge frames so every output frame sees a centred window
        x = F.pad(x, (0, 0, 0, 0, pad, pad), mode="replicate")
        x = self.frontend(x)
        x = rearrange(x, "b c t h w -> (b t) c h w")
        x = self.resnet(x)
        return rearrange(x, "(b t) d -> b t d", b=batch)


class WaveformDecoder(nn.Module):
    """
    Upsamples each frame feature (treated as a length-1 sequence of ``D``
    channels) by ``prod(strides)`` samples. Every layer but the last is
    followed by batch normalization and ReLU; the last by tanh.
    """

    def __init__(self, in_features: int, strides: Sequence[int] = DECODER_STRIDES):
        super().__init__()
        widths = [in_features] + [max(1, in_features // 2 ** (i + 1)) for i in range(len(strides) - 1)] + [1]
        layers = []
        for i, stride in enumerate(strides):
            padding = (stride + 1) // 2
            layers.append(
                nn.ConvTranspose1d(
                    widths[i],
                    widths[i + 1],
                    kernel_size=2 * stride,
                    stride=stride,
                    padding=padding,
                    output_padding=2 * padding - stride,
                    bias=i == len(strides) - 1,
                )
            )
            if i < len(strides) - 1:
                layers += [nn.BatchNorm1d(widths[i + 1]), nn.ReLU(True)]
            else:
                layers.append(nn.Tanh())
        self.net = nn.Sequential(*layers)
        self.segment_length = 1
        for s in strides:
            self.segment_length *= s

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """``(B, T, D)`` to ``(B, T, segment_length)`` segments."""
        batch = features.shape[0]
        x = rearrange(features, "b t d -> (b t) d 1")
        x = self.net(x)
        return rearrange(x, "(b t) 1 n -> b t n", b=batch)


class GeneratorNet(nn.Module):
    def __init__(
        self,
        image_size: int = 96,
        frontend_frames: int = 5,
        width_scale: float = 1.0,
        samples_per_frame: int = 640,
        overlap: bool = True,
    ):
        super().__init__()
        self.encoder = VideoEncoder(image_size, frontend_frames, width_scale)
        hidden = scaled(256, width_scale)
        self.temporal = nn.GRU(
            self.encoder.out_features, hidden, num_layers=2, batch_first=True, bidirectional=True
        )
        self.feature_dim = 2 * hidden
        self.decoder = WaveformDecoder(self.feature_dim)
        if self.decoder.segment_length != 2 * samples_per_frame:
            raise ShapeError(
                f"decoder upsamples by {self.decoder.segment_length}, need 2N = {2 * samples_per_frame}"
            )
        self.samples_per_frame = samples_per_frame
        self.overlap = overlap

    def encode_frames(self, video: torch.Tensor) -> torch.Tensor:
        """Pre-GRU features, local to ``frontend_frames`` neighbouring frames."""
        return self.encoder(video)

    def encode(self, video: torch.Tensor) -> torch.Tensor:
        features, _ = self.temporal(self.encode_frames(video))
        return features

    def decode(self, features: torch.Tensor) -> torch.Tensor:
        segments = self.decoder(features)
        if self.overlap:
            return overlap_add_tensor(segments, self.samples_per_frame)
        return concatenate_heads(segments, self.samples_per_frame)

    def forward(self, video: torch.Tensor) -> torch.Tensor:
        """``(B, T, H, W)`` video to ``(B, T * N)`` waveform."""
        return self.decode(self.encode(video))

    @classmethod
    def from_config(cls, config) -> "GeneratorNet":
        return cls(
            image_size=config.image_size,
            frontend_frames=config.frontend_frames,
            width_scale=config.model_width_scale,
            samples_per_frame=config.samples_per_frame,
            overlap=config.enable_overlap,
        )
