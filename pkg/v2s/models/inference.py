"""Single-clip entry points around the networks, working on domain values."""
import logging
import time

import torch

from ..core.rng import Rng
from ..core.types import FeatureSequence, NormalizedSpectrogram, VideoClip, Waveform
from ..errors import ShapeError
from .critics import PowerCriticNet, WaveCriticNet
from .generator import GeneratorNet

logpy = logging.getLogger(__name__)


def _device(net: torch.nn.Module) -> torch.device:
    return next(net.parameters()).device


def _video_batch(net: GeneratorNet, clip: VideoClip) -> torch.Tensor:
    size = net.encoder.image_size
    if (clip.height, clip.width) != (size, size):
        raise ShapeError(f"expected {size}x{size} frames, got {clip.height}x{clip.width}")
    return clip.frames.unsqueeze(0).to(_device(net))


@torch.no_grad()
def encode(net: GeneratorNet, clip: VideoClip) -> FeatureSequence:
    """Post-GRU features, one ``D``-vector per frame."""
    return FeatureSequence(net.encode(_video_batch(net, clip))[0].cpu())


@torch.no_grad()
def encode_frames(net: GeneratorNet, clip: VideoClip) -> FeatureSequence:
    """Pre-GRU features, each depending only on a centred window of frames."""
    return FeatureSequence(net.encode_frames(_video_batch(net, clip))[0].cpu())


@torch.no_grad()
def decode(net: GeneratorNet, features: FeatureSequence, sample_rate: int = 16000) -> Waveform:
    if features.dim != net.feature_dim:
        raise ShapeError(f"expected features of dimension {net.feature_dim}, got {features.dim}")
    samples = net.decode(features.features.unsqueeze(0).to(_device(net)))[0].cpu()
    return Waveform(samples, sample_rate)


@torch.no_grad()
def generate(net: GeneratorNet, clip: VideoClip, sample_rate: int = 16000) -> Waveform:
    start = time.perf_counter()
    samples = net(_video_batch(net, clip))[0].cpu()
    logpy.debug(f"synthesized {clip.num_frames} frames in {(time.perf_counter() - start) * 1e3:.1f} ms")
    return Waveform(samples, sample_rate)


def critic_wave(net: WaveCriticNet, clip: Waveform) -> torch.Tensor:
    """Scalar score of one clip; differentiable w.r.t. ``clip.samples``."""
    return net(clip.samples.unsqueeze(0).to(_device(net)))[0]


def critic_power(net: PowerCriticNet, spec: NormalizedSpectrogram) -> torch.Tensor:
    return net(spec.values.unsqueeze(0).to(_device(net)))[0]


def build_networks(config, rng: Rng):
    """Construct (generator, wave critic, power critic) from ``config``, seeded by ``rng``."""
    from ..dsp.spectral import StftParams

    stft = StftParams(sample_rate=config.sample_rate)
    with rng.spawn(1).torch_scope():
        generator = GeneratorNet.from_config(config)
    with rng.spawn(2).torch_scope():
        wave_critic = WaveCriticNet(config.clip_samples, config.model_width_scale)
    with rng.spawn(3).torch_scope():
        power_critic = PowerCriticNet((stft.num_bins, stft.num_frames(config.clip_samples)), config.model_width_scale)
    device = torch.device(config.device)
    return generator.to(device), wave_critic.to(device), power_critic.to(device)
