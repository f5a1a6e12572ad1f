"""
Spectral front-ends shared by the losses, the power critic and the metrics.

All functions take a :class:`~v2s.core.Waveform` or a tensor whose last axis
is time (leading axes are batch axes) and are differentiable end to end.
Framing uses no centre padding: a signal of ``n`` samples yields
``1 + (n - win) // hop`` frames, each Hann-windowed and zero-padded to
``fft_size`` points.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import librosa
import numpy as np
import scipy.fft
import torch

from ..core.types import NormalizedSpectrogram, Waveform
from ..errors import ConfigurationError, ShapeError

LOG_FLOOR = 1e-10
STD_FLOOR = 1e-8
CLIP_SIGMAS = 3.0

SignalLike = Union[Waveform, torch.Tensor, np.ndarray]


@dataclass(frozen=True)
class StftParams:
    window_ms: float = 25.0
    hop_ms: float = 10.0
    fft_size: int = 512
    sample_rate: int = 16000

    def __post_init__(self):
        if self.win_length > self.fft_size:
            raise ConfigurationError(f"window of {self.win_length} samples exceeds fft_size={self.fft_size}")
        if self.hop_length > self.win_length:
            raise ConfigurationError(f"hop of {self.hop_length} samples exceeds window of {self.win_length}")

    @property
    def win_length(self) -> int:
        return int(round(self.window_ms * self.sample_rate / 1000))

    @property
    def hop_length(self) -> int:
        return int(round(self.hop_ms * self.sample_rate / 1000))

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    def num_frames(self, num_samples: int) -> int:
        return 1 + (num_samples - self.win_length) // self.hop_length


@dataclass(frozen=True)
class MfccParams:
    num_coefficients: int = 25
    num_mel_bands: int = 40
    mel_fmin: float = 0.0
    mel_fmax: float = 8000.0
    stft: StftParams = field(default_factory=StftParams)

    def __post_init__(self):
        if self.num_coefficients > self.num_mel_bands:
            raise ConfigurationError(
                f"num_coefficients={self.num_coefficients} exceeds num_mel_bands={self.num_mel_bands}"
            )


def as_samples(x: SignalLike) -> torch.Tensor:
    if isinstance(x, Waveform):
        return x.samples
    return torch.as_tensor(x)


def frame_signal(x: SignalLike, params: StftParams = StftParams()) -> torch.Tensor:
    """Split ``(..., n)`` into ``(..., L, win_length)`` overlapping frames."""
    x = as_samples(x)
    if x.shape[-1] < params.win_length:
        raise ShapeError(
            f"signal of {x.shape[-1]} samples is shorter than the minimum length of {params.win_length} samples"
        )
    return x.unfold(-1, params.win_length, params.hop_length)


def _complex_stft(x: SignalLike, params: StftParams) -> torch.Tensor:
    frames = frame_signal(x, params)
    window = torch.hann_window(params.win_length, periodic=True, dtype=frames.dtype, device=frames.device)
    spec = torch.fft.rfft(frames * window, n=params.fft_size, dim=-1)
    return spec.transpose(-1, -2)


def power_spectrum(x: SignalLike, params: StftParams = StftParams()) -> torch.Tensor:
    """Squared STFT magnitude, ``(..., F, L)``."""
    spec = _complex_stft(x, params)
    return spec.real**2 + spec.imag**2


def stft_magnitude(x: SignalLike, params: StftParams = StftParams()) -> torch.Tensor:
    """STFT magnitude, ``(..., F, L)`` with ``F = fft_size // 2 + 1``."""
    return _complex_stft(x, params).abs()


def log_power_spectrogram(
    x: SignalLike, params: StftParams = StftParams(), floor: float = LOG_FLOOR
) -> torch.Tensor:
    """``ln(max(|STFT(x)|^2, floor))``, ``(..., F, L)``."""
    if not floor > 0:
        raise ConfigurationError(f"log floor must be > 0, got {floor}")
    return torch.log(torch.clamp(power_spectrum(x, params), min=floor))


def normalize_batch(logspec: torch.Tensor) -> torch.Tensor:
    """
    Standardize each ``(F, L)`` matrix by its own mean and std, clip to
    [-3, 3] and rescale to [-1, 1]. Leading axes are batch axes.
    """
    mean = logspec.mean(dim=(-2, -1), keepdim=True)
    std = logspec.std(dim=(-2, -1), unbiased=False, keepdim=True).clamp_min(STD_FLOOR)
    return torch.clamp((logspec - mean) / std, -CLIP_SIGMAS, CLIP_SIGMAS) / CLIP_SIGMAS


def normalize_for_critic(logspec: torch.Tensor) -> NormalizedSpectrogram:
    logspec = torch.as_tensor(logspec)
    if logspec.ndim != 2:
        raise ShapeError(f"expected an (F, L) matrix, got shape {tuple(logspec.shape)}")
    return NormalizedSpectrogram(normalize_batch(logspec))


def critic_spectrogram(x: SignalLike, params: StftParams = StftParams()) -> torch.Tensor:
    """Waveform(s) to normalized log-power spectrogram(s), the power critic's input."""
    return normalize_batch(log_power_spectrogram(x, params))


@lru_cache(maxsize=8)
def _mel_filterbank_np(params: MfccParams) -> np.ndarray:
    nyquist = params.stft.sample_rate / 2
    if params.mel_fmax > nyquist:
        raise ConfigurationError(f"mel_fmax={params.mel_fmax} Hz exceeds the Nyquist frequency {nyquist} Hz")
    if not 0 <= params.mel_fmin < params.mel_fmax:
        raise ConfigurationError(f"need 0 <= mel_fmin < mel_fmax, got {params.mel_fmin}, {params.mel_fmax}")
    fb = librosa.filters.mel(
        sr=params.stft.sample_rate,
        n_fft=params.stft.fft_size,
        n_mels=params.num_mel_bands,
        fmin=params.mel_fmin,
        fmax=params.mel_fmax,
        htk=True,
        norm=None,
        dtype=np.float64,
    )
    if not (fb.sum(axis=1) > 0).all():
        raise ConfigurationError(
            f"{params.num_mel_bands} mel bands are too many for fft_size={params.stft.fft_size}: some filters are empty"
        )
    return fb


@lru_cache(maxsize=8)
def _dct_matrix_np(num_coefficients: int, num_bands: int) -> np.ndarray:
    # rows are orthonormal DCT-II basis vectors
    return scipy.fft.dct(np.eye(num_bands), type=2, norm="ortho", axis=0)[:num_coefficients]


def mel_filterbank(params: MfccParams = MfccParams()) -> torch.Tensor:
    """Triangular HTK-mel filterbank, ``(num_mel_bands, F)`` in float64."""
    return torch.from_numpy(_mel_filterbank_np(params).copy())


def mel_center_frequencies(params: MfccParams = MfccParams()) -> np.ndarray:
    """Centre frequency (Hz) of every band; monotonically increasing."""
    return librosa.mel_frequencies(
        n_mels=params.num_mel_bands + 2, fmin=params.mel_fmin, fmax=params.mel_fmax, htk=True
    )[1:-1]


def mel_spectrogram(x: SignalLike, params: MfccParams = MfccParams()) -> torch.Tensor:
    """Log mel-band energies ``(..., num_mel_bands, L)``, floored at 1e-10 before the log."""
    power = power_spectrum(x, params.stft)
    fb = torch.from_numpy(_mel_filterbank_np(params)).to(dtype=power.dtype, device=power.device)
    return torch.log(torch.clamp(torch.matmul(fb, power), min=LOG_FLOOR))


def mfcc(x: SignalLike, params: MfccParams = MfccParams()) -> torch.Tensor:
    """Orthonormal DCT-II of the log mel energies, first ``num_coefficients`` rows: ``(..., C, L)``."""
    logmel = mel_spectrogram(x, params)
    dct = torch.from_numpy(_dct_matrix_np(params.num_coefficients, params.num_mel_bands))
    return torch.matmul(dct.to(dtype=logmel.dtype, device=logmel.device), logmel)
