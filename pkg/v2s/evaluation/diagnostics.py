"""
Spectrogram diagnostics and figures.
"""
import os
from pathlib import Path
from typing import Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from ..core.types import Waveform
from ..dsp.spectral import MfccParams, SignalLike, as_samples, mel_spectrogram
from ..errors import MetricError

PathLike = Union[str, os.PathLike]


def _log_mel(x: SignalLike, params: MfccParams) -> np.ndarray:
    return mel_spectrogram(as_samples(x).detach().cpu().double(), params).numpy()


def difference_image(diff: np.ndarray) -> Image.Image:
    """Grayscale rendering: 0 is white, the largest difference black, low bands at the bottom."""
    peak = float(diff.max()) if diff.size else 0.0
    if peak <= 0:
        pixels = np.full(diff.shape, 255, dtype=np.uint8)
    else:
        pixels = np.round(255.0 - 255.0 * diff / peak).astype(np.uint8)
    return Image.fromarray(np.ascontiguousarray(np.flipud(pixels)))


def spectrogram_difference(
    x: SignalLike, x_hat: SignalLike, image_path: Optional[PathLike] = None, params: MfccParams = MfccParams()
) -> Tuple[np.ndarray, Image.Image]:
    """
    ``|mel_spectrogram(x) - mel_spectrogram(x_hat)|`` and its grayscale image,
    saved as PNG when ``image_path`` is given.
    """
    a, b = as_samples(x), as_samples(x_hat)
    if a.shape != b.shape:
        raise MetricError(f"spectrogram_difference: signals differ in length ({a.shape[-1]} vs {b.shape[-1]})")
    diff = np.abs(_log_mel(a, params) - _log_mel(b, params))
    image = difference_image(diff)
    if image_path is not None:
        image.save(str(image_path))
    return diff, image


def mel_spectrogram_figure(real: Waveform, fake: Waveform, path: PathLike, params: MfccParams = MfccParams()) -> Path:
    """Real, synthesized and difference mel spectrograms side by side."""
    diff, _ = spectrogram_difference(real, fake, params=params)
    panels = [("real", _log_mel(real, params)), ("synthesized", _log_mel(fake, params)), ("|difference|", diff)]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5), constrained_layout=True)
    for ax, (title, data) in zip(axes, panels):
        im = ax.imshow(data, origin="lower", aspect="auto", cmap="gray_r" if title.startswith("|") else "magma")
        ax.set_title(title)
        ax.set_xlabel("frame")
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("mel band")
    fig.savefig(str(path), dpi=100)
    plt.close(fig)
    return Path(path)


def waveform_figure(waveform: Waveform, path: PathLike, params: MfccParams = MfccParams()) -> Path:
    """Waveform above its log mel spectrogram."""
    samples = waveform.samples.detach().cpu().numpy()
    t = np.arange(len(samples)) / waveform.sample_rate
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 5), constrained_layout=True)
    top.plot(t, samples, linewidth=0.5)
    top.set_ylim(-1, 1)
    top.set_xlim(0, t[-1] if len(t) else 1)
    top.set_ylabel("amplitude")
    if len(samples) >= params.stft.win_length:
        bottom.imshow(_log_mel(waveform, params), origin="lower", aspect="auto", cmap="magma")
    bottom.set_ylabel("mel band")
    bottom.set_xlabel("frame")
    fig.savefig(str(path), dpi=100)
    plt.close(fig)
    return Path(path)
