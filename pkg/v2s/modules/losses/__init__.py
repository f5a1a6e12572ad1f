__all__ = [
    "InterpolatedSample",
    "LossParts",
    "LossToggles",
    "PerceptualExtractor",
    "build_extractor",
    "critic_loss",
    "fallback_extractor",
    "generator_adversarial_loss",
    "gradient_penalty",
    "load_extractor",
    "mfcc_loss",
    "pase_loss",
    "power_loss",
    "total_generator_loss",
]

from .adversarial import InterpolatedSample, critic_loss, generator_adversarial_loss, gradient_penalty
from .perceptual import PerceptualExtractor, build_extractor, fallback_extractor, load_extractor, pase_loss
from .spectral import mfcc_loss, power_loss
from .total import LossParts, LossToggles, total_generator_loss
