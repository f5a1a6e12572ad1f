import torch
from torch import Tensor

from ...dsp.spectral import MfccParams, SignalLike, StftParams, as_samples, log_power_spectrogram, mfcc
from ...errors import ShapeError


def _pair(x: SignalLike, x_hat: SignalLike):
    x, x_hat = as_samples(x), as_samples(x_hat)
    if x.shape != x_hat.shape:
        raise ShapeError(f"signals differ in shape: {tuple(x.shape)} vs {tuple(x_hat.shape)}")
    return x, x_hat


def power_loss(x: SignalLike, x_hat: SignalLike, params: StftParams = StftParams()) -> Tensor:
    """Mean absolute difference of the (unnormalized) log-power spectrograms."""
    x, x_hat = _pair(x, x_hat)
    return torch.mean(torch.abs(log_power_spectrogram(x, params) - log_power_spectrogram(x_hat, params)))


def mfcc_loss(x: SignalLike, x_hat: SignalLike, params: MfccParams = MfccParams()) -> Tensor:
    """Mean absolute difference of the ``C x L`` MFCC matrices."""
    x, x_hat = _pair(x, x_hat)
    return torch.mean(torch.abs(mfcc(x, params) - mfcc(x_hat, params)))
