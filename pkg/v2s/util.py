import hashlib
import logging
from typing import Iterable

import torch
import torch.nn as nn

logpy = logging.getLogger(__name__)


def count_params(model: nn.Module, verbose: bool = False) -> int:
    total_params = sum(p.numel() for p in model.parameters() if p.requires_grad)
    if verbose:
        logpy.info(f"{model.__class__.__name__} has {total_params * 1.e-6:.2f} M params.")
    return total_params


def disabled_train(self, mode=True):
    """Overwrite model.train with this function to make sure train/eval mode
    does not change anymore."""
    return self


def freeze(model: nn.Module) -> nn.Module:
    for param in model.parameters():
        param.requires_grad = False
    model.eval()
    return model


@torch.no_grad()
def parameter_checksum(parameters: Iterable[torch.Tensor]) -> str:
    """Hash of the raw bytes of every tensor, in iteration order."""
    digest = hashlib.sha256()
    for p in parameters:
        digest.update(p.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


def is_finite(x) -> bool:
    if isinstance(x, torch.Tensor):
        return bool(torch.isfinite(x).all())
    return x == x and x not in (float("inf"), float("-inf"))
