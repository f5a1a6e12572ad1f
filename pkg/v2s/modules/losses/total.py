from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

from torch import Tensor

from ...core.config import LossWeights

Scalar = Union[Tensor, float]


class LossParts(NamedTuple):
    adv: Scalar = 0.0
    pase: Scalar = 0.0
    power: Scalar = 0.0
    mfcc: Scalar = 0.0


@dataclass(frozen=True)
class LossToggles:
    adversarial: bool = True
    pase: bool = True
    power: bool = True
    mfcc: bool = True

    @classmethod
    def from_config(cls, config) -> "LossToggles":
        return cls(
            adversarial=config.enable_wave_critic or config.enable_power_critic,
            pase=config.enable_pase_loss,
            power=config.enable_power_loss,
            mfcc=config.enable_mfcc_loss,
        )


def total_generator_loss(weights: LossWeights, parts, toggles: Optional[LossToggles] = None) -> Scalar:
    """
    ``alpha_adv * adv + alpha_pase * pase + alpha_power * power + alpha_mfcc * mfcc``.
    Disabled terms are skipped, not multiplied by zero.
    """
    parts = LossParts(*parts)
    toggles = toggles or LossToggles()
    total = 0.0
    if toggles.adversarial:
        total = total + weights.alpha_adv * parts.adv
    if toggles.pase:
        total = total + weights.alpha_pase * parts.pase
    if toggles.power:
        total = total + weights.alpha_power * parts.power
    if toggles.mfcc:
        total = total + weights.alpha_mfcc * parts.mfcc
    return total
