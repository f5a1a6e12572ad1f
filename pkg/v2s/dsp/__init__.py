__all__ = [
    "LOG_FLOOR",
    "MfccParams",
    "StftParams",
    "concatenate_heads",
    "critic_spectrogram",
    "frame_signal",
    "log_power_spectrogram",
    "mel_center_frequencies",
    "mel_filterbank",
    "mel_spectrogram",
    "mfcc",
    "normalize_batch",
    "normalize_for_critic",
    "overlap_add",
    "overlap_add_tensor",
    "power_spectrum",
    "stft_magnitude",
]

from .ola import concatenate_heads, overlap_add, overlap_add_tensor
from .spectral import (
    LOG_FLOOR,
    MfccParams,
    StftParams,
    critic_spectrogram,
    frame_signal,
    log_power_spectrogram,
    mel_center_frequencies,
    mel_filterbank,
    mel_spectrogram,
    mfcc,
    normalize_batch,
    normalize_for_critic,
    power_spectrum,
    stft_magnitude,
)
