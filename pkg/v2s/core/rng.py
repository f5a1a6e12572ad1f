"""
Explicit random streams.

Every random draw in v2s goes through an :class:`Rng` handle; nothing reads
the ambient torch/numpy/random global generators. Two handles built from the
same ``(seed, stream)`` pair produce identical draw sequences.
"""
from contextlib import contextmanager
from typing import Sequence

import numpy as np
import torch


def _mix(seed: int, *keys: int) -> int:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


class Rng:
    """
    A seeded random stream backed by a private ``torch.Generator``.

    :param seed: experiment seed
    :param stream: stream id; distinct streams of one seed are independent
    """

    def __init__(self, seed: int, stream: int = 0) -> None:
        self.seed = int(seed)
        self.stream = int(stream)
        self.generator = torch.Generator(device="cpu")
        self.generator.manual_seed(_mix(self.seed, self.stream))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream={self.stream})"

    def spawn(self, *keys: int) -> "Rng":
        """Derive an independent child stream keyed by ``keys``."""
        return Rng(self.seed, _mix(self.stream, *keys))

    def uniform(self, *shape: int, dtype=torch.float32) -> torch.Tensor:
        return torch.rand(shape, generator=self.generator, dtype=dtype)

    def normal(self, *shape: int, dtype=torch.float32) -> torch.Tensor:
        return torch.randn(shape, generator=self.generator, dtype=dtype)

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in ``[low, high]`` (both inclusive)."""
        return int(torch.randint(low, high + 1, (1,), generator=self.generator).item())

    def bernoulli(self, p: float) -> bool:
        return bool(torch.rand((), generator=self.generator, dtype=torch.float64).item() < p)

    def permutation(self, n: int) -> torch.Tensor:
        return torch.randperm(n, generator=self.generator)

    def choice(self, options: Sequence, size: int) -> list:
        idx = torch.randint(0, len(options), (size,), generator=self.generator)
        return [options[i] for i in idx.tolist()]

    def get_state(self) -> torch.Tensor:
        return self.generator.get_state()

    def set_state(self, state: torch.Tensor) -> None:
        self.generator.set_state(state)

    @contextmanager
    def torch_scope(self):
        """
        Run a block (e.g. ``nn.Module`` construction, whose initializers draw
        from the global generator) with the global torch generator seeded from
        this stream, restoring the previous global state afterwards.
        """
        seed = self.randint(0, 2**62)
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            yield
