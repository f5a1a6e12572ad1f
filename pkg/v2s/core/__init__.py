__all__ = [
    "ABLATION_TOGGLES",
    "FeatureSequence",
    "LossWeights",
    "NormalizedSpectrogram",
    "Rng",
    "TrainConfig",
    "VideoClip",
    "Waveform",
    "dump_config",
    "load_config",
    "samples_per_frame",
    "save_config",
    "validate_config",
]

from .config import (
    ABLATION_TOGGLES,
    LossWeights,
    TrainConfig,
    dump_config,
    load_config,
    samples_per_frame,
    save_config,
    validate_config,
)
from .rng import Rng
from .types import FeatureSequence, NormalizedSpectrogram, VideoClip, Waveform
