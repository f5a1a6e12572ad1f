import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Optional

import torch

from ..core.config import TrainConfig
from ..core.rng import Rng
from ..models.critics import PowerCriticNet, WaveCriticNet
from ..models.generator import GeneratorNet
from ..models.inference import build_networks
from ..modules.losses.perceptual import PerceptualExtractor, build_extractor
from ..util import count_params

logpy = logging.getLogger(__name__)


def _adam(module: torch.nn.Module, config: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(
        module.parameters(), lr=config.learning_rate, betas=(config.adam_beta1, config.adam_beta2)
    )


@dataclass
class TrainState:
    """
    Everything a training run needs to continue bit-identically: the three
    networks with their Adam moments, the step counters, the number of
    batches drawn from the data stream and the training random stream.
    """

    config: TrainConfig
    generator: GeneratorNet
    wave_critic: WaveCriticNet
    power_critic: PowerCriticNet
    gen_opt: torch.optim.Adam
    wave_opt: torch.optim.Adam
    power_opt: torch.optim.Adam
    extractor: PerceptualExtractor
    rng: Rng
    gen_step: int = 0
    critic_step: int = 0
    batches_drawn: int = 0
    history: Deque[float] = field(default_factory=deque)

    @property
    def device(self) -> torch.device:
        return torch.device(self.config.device)

    def record_loss(self, value: float) -> None:
        self.history.append(value)

    def modules(self) -> dict:
        return {"generator": self.generator, "wave_critic": self.wave_critic, "power_critic": self.power_critic}

    def optimizers(self) -> dict:
        return {"generator": self.gen_opt, "wave_critic": self.wave_opt, "power_critic": self.power_opt}


def build_state(config: TrainConfig, extractor: Optional[PerceptualExtractor] = None) -> TrainState:
    rng = Rng(config.seed)
    generator, wave_critic, power_critic = build_networks(config, rng)
    for net in (generator, wave_critic, power_critic):
        count_params(net, verbose=True)
    if extractor is None:
        extractor = build_extractor(config.pase_checkpoint, config.pase_seed)
    return TrainState(
        config=config,
        generator=generator,
        wave_critic=wave_critic,
        power_critic=power_critic,
        gen_opt=_adam(generator, config),
        wave_opt=_adam(wave_critic, config),
        power_opt=_adam(power_critic, config),
        extractor=extractor.to(config.device),
        rng=rng.spawn(100),
        history=deque(maxlen=config.loss_history),
    )
