"""
Perceptual feature loss.

A :class:`PerceptualExtractor` wraps a frozen network mapping waveforms
``(B, 1, n)`` to feature maps ``(B, C, L)``. A pre-trained speech encoder
exported as TorchScript can be plugged in through ``pase_checkpoint``; without
one, :func:`fallback_extractor` provides a randomly initialized strided
convolution stack. The fallback is not a pre-trained speech encoder: it only
gives the perceptual term a fixed, deterministic feature space.
"""
import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

import torch
import torch.nn as nn
from einops import rearrange
from torch import Tensor

from ...core.rng import Rng
from ...dsp.spectral import SignalLike, as_samples
from ...errors import ConfigurationError, ShapeError
from ...util import disabled_train, freeze

logpy = logging.getLogger(__name__)

# (out_channels, kernel, stride); total stride 160 samples = 10 ms at 16 kHz
FALLBACK_LAYERS: Tuple[Tuple[int, int, int], ...] = ((64, 20, 10), (64, 8, 4), (64, 4, 2), (100, 4, 2))


class PerceptualExtractor(nn.Module):
    train = disabled_train

    def __init__(self, net: nn.Module, identifier: str, deterministic: bool = True):
        super().__init__()
        self.net = freeze(net)
        self.identifier = identifier
        self.deterministic = deterministic

    def forward(self, x: SignalLike) -> Tensor:
        """Waveform(s) ``(n,)`` or ``(B, n)`` to features ``(B, frames, feature_dim)``."""
        x = as_samples(x)
        if x.ndim == 1:
            x = x.unsqueeze(0)
        features = self.net(rearrange(x, "b n -> b 1 n"))
        return rearrange(features, "b c l -> b l c")

    def __repr__(self) -> str:
        return f"PerceptualExtractor({self.identifier!r})"


def _fallback_net(layers: Sequence[Tuple[int, int, int]]) -> nn.Sequential:
    modules, in_channels = [], 1
    for out_channels, kernel, stride in layers:
        modules += [nn.Conv1d(in_channels, out_channels, kernel, stride=stride), nn.LeakyReLU(0.2)]
        in_channels = out_channels
    return nn.Sequential(*modules[:-1])


def fallback_extractor(seed: int = 1234, layers: Sequence[Tuple[int, int, int]] = FALLBACK_LAYERS) -> PerceptualExtractor:
    with Rng(seed).torch_scope():
        net = _fallback_net(layers)
    return PerceptualExtractor(net, identifier=f"fallback-conv(seed={seed})")


def load_extractor(path) -> PerceptualExtractor:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"pase_checkpoint not found: {path}")
    try:
        net = torch.jit.load(str(path), map_location="cpu")
    except RuntimeError as e:
        raise ConfigurationError(f"pase_checkpoint {path} is not a TorchScript module: {e}") from e
    logpy.info(f"Loaded perceptual extractor from {path}")
    return PerceptualExtractor(net, identifier=f"torchscript:{path.name}")


def build_extractor(pase_checkpoint: Optional[str] = None, seed: int = 1234) -> PerceptualExtractor:
    if pase_checkpoint:
        return load_extractor(pase_checkpoint)
    logpy.info("No pase_checkpoint given, using the fallback convolutional extractor")
    return fallback_extractor(seed)


def pase_loss(extractor: PerceptualExtractor, x: SignalLike, x_hat: SignalLike) -> Tensor:
    """Mean absolute difference between the extractor features of ``x`` and ``x_hat``."""
    x, x_hat = as_samples(x), as_samples(x_hat)
    if x.shape != x_hat.shape:
        raise ShapeError(f"signals differ in shape: {tuple(x.shape)} vs {tuple(x_hat.shape)}")
    return torch.mean(torch.abs(extractor(x) - extractor(x_hat)))
