__all__ = [
    "TrainResult",
    "TrainState",
    "build_state",
    "critic_update",
    "generator_update",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "validate",
]

from .checkpoint import load_checkpoint, save_checkpoint
from .state import TrainState, build_state
from .trainer import TrainResult, critic_update, generator_update, train, validate
