"""
Training configuration.

A :class:`TrainConfig` is stored on disk either as flat ``key = value`` text
(``#`` starts a comment) or as YAML. Both are merged through OmegaConf onto the
structured defaults below, so unknown keys and badly typed values are rejected
while reading.
"""
import dataclasses
import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Union

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from ..errors import ConfigurationError

logpy = logging.getLogger(__name__)

ABLATION_TOGGLES = {
    "wave_critic": "enable_wave_critic",
    "power_critic": "enable_power_critic",
    "pase": "enable_pase_loss",
    "power": "enable_power_loss",
    "mfcc": "enable_mfcc_loss",
    "overlap": "enable_overlap",
}


def samples_per_frame(sample_rate: int, frame_rate: int) -> int:
    """
    Number of audio samples generated per video frame.

    Raises:
        ConfigurationError: if ``frame_rate`` does not divide ``sample_rate``.
    """
    if frame_rate <= 0 or sample_rate <= 0 or sample_rate % frame_rate != 0:
        raise ConfigurationError(
            f"sample_rate={sample_rate} Hz is not an integer multiple of frame_rate={frame_rate} fps"
        )
    return sample_rate // frame_rate


@dataclass(frozen=True)
class LossWeights:
    alpha_adv: float = 1.0
    alpha_pase: float = 140.0
    alpha_power: float = 50.0
    alpha_mfcc: float = 0.4
    gp_lambda: float = 10.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ConfigurationError(f"{f.name} must be >= 0, got {getattr(self, f.name)}")


@dataclass
class TrainConfig:
    # optimisation
    learning_rate: float = 1e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.99
    lr_warmup_steps: int = 0
    critic_steps_per_gen_step: int = 6
    clip_seconds: float = 1.0
    batch_size: int = 8
    total_gen_steps: int = 1000
    seed: int = 0

    # ablation toggles
    enable_wave_critic: bool = True
    enable_power_critic: bool = True
    enable_pase_loss: bool = True
    enable_power_loss: bool = True
    enable_mfcc_loss: bool = True
    enable_overlap: bool = True

    # loss weights
    alpha_adv: float = 1.0
    alpha_pase: float = 140.0
    alpha_power: float = 50.0
    alpha_mfcc: float = 0.4
    gp_lambda: float = 10.0

    # model / signal geometry
    model_width_scale: float = 1.0
    image_size: int = 96
    frame_rate: int = 25
    sample_rate: int = 16000
    frontend_frames: int = 5
    pase_checkpoint: Optional[str] = None
    pase_seed: int = 1234

    # bookkeeping
    device: str = "cpu"
    checkpoint_interval: int = 0
    log_interval: int = 10
    num_workers: int = 0
    loss_history: int = 100
    log_wall_time: bool = True

    @property
    def loss_weights(self) -> LossWeights:
        return LossWeights(self.alpha_adv, self.alpha_pase, self.alpha_power, self.alpha_mfcc, self.gp_lambda)

    @property
    def samples_per_frame(self) -> int:
        return samples_per_frame(self.sample_rate, self.frame_rate)

    @property
    def clip_samples(self) -> int:
        return int(round(self.clip_seconds * self.sample_rate))

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def validate_config(config: TrainConfig) -> List[str]:
    """
    Check every TrainConfig invariant.

    Returns:
        List[str]: one message per violation, naming the field; empty when valid.
    """
    violations = []
    if not config.learning_rate > 0:
        violations.append("learning_rate must be > 0")
    if config.critic_steps_per_gen_step < 1:
        violations.append("critic_steps_per_gen_step must be ≥ 1")
    if not 0 < config.model_width_scale <= 1:
        violations.append("model_width_scale must be in (0, 1]")
    if not 0 <= config.adam_beta1 < 1:
        violations.append("adam_beta1 must be in [0, 1)")
    if not 0 <= config.adam_beta2 < 1:
        violations.append("adam_beta2 must be in [0, 1)")
    if not config.clip_seconds > 0:
        violations.append("clip_seconds must be > 0")
    if config.batch_size < 1:
        violations.append("batch_size must be ≥ 1")
    if config.total_gen_steps < 0:
        violations.append("total_gen_steps must be ≥ 0")
    for name in ("alpha_adv", "alpha_pase", "alpha_power", "alpha_mfcc", "gp_lambda"):
        if getattr(config, name) < 0:
            violations.append(f"{name} must be ≥ 0")
    if config.frontend_frames not in (3, 5, 7):
        violations.append("frontend_frames must be one of 3, 5, 7")
    if config.image_size < 16:
        violations.append("image_size must be ≥ 16")
    if config.frame_rate <= 0 or config.sample_rate <= 0 or config.sample_rate % config.frame_rate:
        violations.append("sample_rate must be a positive integer multiple of frame_rate")
    elif config.sample_rate // config.frame_rate != 640:
        violations.append("sample_rate / frame_rate must equal 640 (the decoder upsamples by 1280)")
    for name in ("checkpoint_interval", "log_interval", "num_workers", "lr_warmup_steps"):
        if getattr(config, name) < 0:
            violations.append(f"{name} must be ≥ 0")
    if config.loss_history < 1:
        violations.append("loss_history must be ≥ 1")
    return violations


def _parse_flat(text: str, source: str) -> List[str]:
    dotlist = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{lineno}: missing key")
        dotlist.append(f"{key}={value}")
    return dotlist


def load_config(path: Union[str, os.PathLike], overrides: Optional[List[str]] = None) -> TrainConfig:
    """
    Read a TrainConfig from a ``key = value`` file or a YAML file.

    Args:
        path: config file; ``.yaml``/``.yml`` is read as YAML, anything else as flat text.
        overrides: extra ``key=value`` strings applied last (e.g. from the command line).

    Raises:
        ConfigurationError: unreadable file, unknown key or badly typed value.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    schema = OmegaConf.structured(TrainConfig)
    try:
        if path.suffix in (".yaml", ".yml"):
            loaded = OmegaConf.load(path)
        else:
            loaded = OmegaConf.from_dotlist(_parse_flat(path.read_text(encoding="utf-8"), str(path)))
        merged = OmegaConf.merge(schema, loaded, OmegaConf.from_dotlist(list(overrides or [])))
    except OmegaConfBaseException as e:
        raise ConfigurationError(f"{path}: {e}") from e
    config = OmegaConf.to_object(merged)
    logpy.info(f"Loaded config from {path}")
    return config


def _format_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: TrainConfig) -> str:
    lines = ["# v2s training configuration"]
    for f in fields(config):
        lines.append(f"{f.name} = {_format_value(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def save_config(config: TrainConfig, path: Union[str, os.PathLike]) -> None:
    path = Path(path)
    if path.suffix in (".yaml", ".yml"):
        OmegaConf.save(config=OmegaConf.structured(config), f=str(path))
    else:
        path.write_text(dump_config(config), encoding="utf-8")
