"""
Wasserstein objectives: critic loss, gradient penalty and the generator's
adversarial term. Critics are callables mapping a ``(B, ...)`` batch to
``(B,)`` scores.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import torch
from einops import rearrange
from torch import Tensor
from torch.autograd import grad as torch_grad

from ...core.rng import Rng
from ...errors import GradientError, ShapeError

Critic = Callable[[Tensor], Tensor]


def _scores(D: Critic, batch: Tensor) -> Tensor:
    if batch.shape[0] == 0:
        raise ShapeError("critic batch is empty")
    scores = D(batch)
    if not isinstance(scores, Tensor):
        raise TypeError(f"critic must return a tensor, got {type(scores).__name__}")
    if scores.shape != (batch.shape[0],):
        raise ShapeError(f"critic must return one score per item, got shape {tuple(scores.shape)}")
    return scores


def critic_loss(D: Critic, real_batch: Tensor, fake_batch: Tensor) -> Tensor:
    """``mean D(fake) - mean D(real)``; the critic minimizes it."""
    if real_batch.shape[0] != fake_batch.shape[0]:
        raise ShapeError(f"real and fake batches differ in size: {real_batch.shape[0]} vs {fake_batch.shape[0]}")
    return _scores(D, fake_batch).mean() - _scores(D, real_batch).mean()


@dataclass(frozen=True)
class InterpolatedSample:
    """``x_hat = eps * real + (1 - eps) * fake`` with one ``eps`` per batch element."""

    x_hat: Tensor
    epsilon: Tensor

    @classmethod
    def draw(cls, real: Tensor, fake: Tensor, rng: Rng) -> "InterpolatedSample":
        if real.shape != fake.shape:
            raise ShapeError(f"real and fake must have the same shape, got {tuple(real.shape)} and {tuple(fake.shape)}")
        eps = rng.uniform(real.shape[0], dtype=real.dtype).to(real.device)
        eps = eps.view(-1, *([1] * (real.ndim - 1)))
        return cls(eps * real.detach() + (1 - eps) * fake.detach(), eps.flatten())


def gradient_penalty(D: Critic, real: Tensor, fake: Tensor, rng: Rng, lam: float = 10.0) -> Tensor:
    """
    ``lam * mean((||grad_x_hat D(x_hat)||_2 - 1)^2)`` over random interpolants
    between paired real and fake items.
    """
    if lam < 0:
        raise ValueError(f"gradient penalty weight must be >= 0, got {lam}")
    x_hat = InterpolatedSample.draw(real, fake, rng).x_hat.requires_grad_(True)
    output = _scores(D, x_hat)
    if not output.requires_grad:
        raise GradientError("critic output is not differentiable with respect to its input")
    gradients = torch_grad(
        outputs=output,
        inputs=x_hat,
        grad_outputs=torch.ones_like(output),
        create_graph=True,
        retain_graph=True,
        only_inputs=True,
        allow_unused=True,
    )[0]
    if gradients is None:
        # output built from parameters only: constant in the input
        gradients = torch.zeros_like(x_hat)
    gradients = rearrange(gradients, "b ... -> b (...)")
    return lam * ((gradients.norm(2, dim=1) - 1) ** 2).mean()


def generator_adversarial_loss(
    D_wave: Optional[Critic], D_power: Optional[Critic], fake_wave_clip: Tensor, fake_spec: Tensor
) -> Tensor:
    """``-mean D_wave(fake clips) - mean D_power(fake specs)``; a ``None`` critic contributes nothing."""
    loss = fake_wave_clip.new_zeros(())
    if D_wave is not None:
        loss = loss - _scores(D_wave, fake_wave_clip).mean()
    if D_power is not None:
        loss = loss - _scores(D_power, fake_spec).mean()
    return loss
