"""
Adversarial training loop.

Each generator step is preceded by ``critic_steps_per_gen_step`` critic
steps. Every step draws a fresh batch from the seeded data stream and critic
steps see freshly synthesized fakes, so a run is fully determined by its
config, its data and the number of batches drawn so far.
"""
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import torch
from tqdm import tqdm

from ..core.config import TrainConfig, validate_config
from ..data.augment import sample_clip_windows
from ..data.dataset import AudioVisualDataset, batch_stream
from ..data.manifest import ManifestRecord, split_records
from ..dsp.spectral import StftParams, critic_spectrogram
from ..errors import ConfigurationError, NonFiniteLossError
from ..modules.losses import (
    LossParts,
    LossToggles,
    critic_loss,
    generator_adversarial_loss,
    gradient_penalty,
    mfcc_loss,
    pase_loss,
    power_loss,
    total_generator_loss,
)
from ..util import is_finite
from .checkpoint import load_checkpoint, save_checkpoint
from .lr_scheduler import LambdaWarmUpScheduler, set_lr
from .metrics_log import MetricsWriter
from .state import TrainState, build_state

logpy = logging.getLogger(__name__)


@contextmanager
def frozen(*modules: torch.nn.Module):
    """Temporarily stop gradients from reaching the parameters of ``modules``."""
    flags = [[p.requires_grad for p in m.parameters()] for m in modules]
    for m in modules:
        m.requires_grad_(False)
    try:
        yield
    finally:
        for m, mflags in zip(modules, flags):
            for p, flag in zip(m.parameters(), mflags):
                p.requires_grad_(flag)


def _check(term: str, value: torch.Tensor, step: int) -> float:
    value = float(value)
    if not is_finite(value):
        raise NonFiniteLossError(term, step, value)
    return value


def _scheduler(state: TrainState) -> LambdaWarmUpScheduler:
    return LambdaWarmUpScheduler(state.config.lr_warmup_steps)


def synthesize_batch(state: TrainState, video: torch.Tensor) -> torch.Tensor:
    """Fakes for a critic step, detached from the generator."""
    with torch.no_grad():
        return state.generator(video.to(state.device)).detach()


def critic_update(state: TrainState, real_batch: torch.Tensor, fake_batch: torch.Tensor) -> Dict[str, float]:
    """
    One Adam step on each enabled critic minimizing ``critic_loss + gradient_penalty``
    on aligned one-second windows of ``real_batch`` and ``fake_batch`` (both ``(B, n)``).
    """
    config = state.config
    step = state.critic_step + 1
    metrics: Dict[str, float] = {"optimizer_steps": 0}
    real_clips, fake_clips = sample_clip_windows(
        real_batch.to(state.device), fake_batch.detach().to(state.device), state.rng, config.clip_samples
    )
    critics = []
    if config.enable_wave_critic:
        critics.append(("wave", state.wave_critic, state.wave_opt, real_clips, fake_clips))
    if config.enable_power_critic:
        stft = StftParams(sample_rate=config.sample_rate)
        critics.append(
            ("power", state.power_critic, state.power_opt, critic_spectrogram(real_clips, stft), critic_spectrogram(fake_clips, stft))
        )
    if not critics:
        logpy.warning(f"critic step {step}: all critics are disabled, nothing to update")
        metrics["warning"] = "all critics disabled"
    for name, net, opt, real, fake in critics:
        loss = critic_loss(net, real, fake)
        gp = gradient_penalty(net, real, fake, state.rng, config.gp_lambda)
        metrics[f"loss_critic_{name}"] = _check(f"critic_{name}", loss, step)
        metrics[f"gp_{name}"] = _check(f"gp_{name}", gp, step)
        set_lr(opt, config.learning_rate, _scheduler(state), state.critic_step // config.critic_steps_per_gen_step)
        opt.zero_grad(set_to_none=True)
        (loss + gp).backward()
        opt.step()
        metrics["optimizer_steps"] += 1
    state.critic_step = step
    return metrics


def generator_update(state: TrainState, video: torch.Tensor, real: torch.Tensor) -> Dict[str, float]:
    """
    One Adam step on the generator. Adversarial terms see aligned one-second
    windows; the perceptual, power and MFCC losses see whole utterances.
    """
    config = state.config
    step = state.gen_step + 1
    toggles = LossToggles.from_config(config)
    stft = StftParams(sample_rate=config.sample_rate)
    video, real = video.to(state.device), real.to(state.device)
    state.generator.train()
    with frozen(state.wave_critic, state.power_critic):
        fake = state.generator(video)
        adv = pase = power = mfcc = fake.new_zeros(())
        if toggles.adversarial:
            real_clips, fake_clips = sample_clip_windows(real, fake, state.rng, config.clip_samples)
            adv = generator_adversarial_loss(
                state.wave_critic if config.enable_wave_critic else None,
                state.power_critic if config.enable_power_critic else None,
                fake_clips,
                critic_spectrogram(fake_clips, stft) if config.enable_power_critic else None,
            )
        if toggles.pase:
            pase = pase_loss(state.extractor, real, fake)
        if toggles.power:
            power = power_loss(real, fake, stft)
        if toggles.mfcc:
            mfcc = mfcc_loss(real, fake)
        parts = LossParts(adv, pase, power, mfcc)
        total = total_generator_loss(config.loss_weights, parts, toggles)
        metrics = {
            "loss_adv": _check("adv", adv, step),
            "loss_pase": _check("pase", pase, step),
            "loss_power": _check("power", power, step),
            "loss_mfcc": _check("mfcc", mfcc, step),
        }
        metrics["loss_total"] = _check("total", total, step)
        state.gen_opt.zero_grad(set_to_none=True)
        if isinstance(total, torch.Tensor) and total.requires_grad:
            set_lr(state.gen_opt, config.learning_rate, _scheduler(state), state.gen_step)
            total.backward()
            state.gen_opt.step()
    state.gen_step = step
    state.record_loss(metrics["loss_total"])
    return metrics


@torch.no_grad()
def validate(state: TrainState, records: Sequence[ManifestRecord]) -> Dict[str, float]:
    """Mean power, MFCC and perceptual L1 losses and MCD over ``records`` (centre-cropped)."""
    from ..evaluation.metrics import mcd

    if not records:
        return {}
    config = state.config
    dataset = _dataset(config, records, train=False)
    totals = {"val_power": [], "val_mfcc": [], "val_pase": [], "val_mcd": []}
    was_training = state.generator.training
    state.generator.eval()
    try:
        for i in range(len(dataset)):
            item = dataset[i]
            real = item["audio"].to(state.device)
            fake = state.generator(item["video"].unsqueeze(0).to(state.device))[0]
            totals["val_power"].append(float(power_loss(real, fake, StftParams(sample_rate=config.sample_rate))))
            totals["val_mfcc"].append(float(mfcc_loss(real, fake)))
            totals["val_pase"].append(float(pase_loss(state.extractor, real, fake)))
            totals["val_mcd"].append(mcd(real.cpu(), fake.cpu()))
    finally:
        state.generator.train(was_training)
    means = {k: float(np.mean(v)) for k, v in totals.items()}
    logpy.info("validation: " + ", ".join(f"{k}={v:.4f}" for k, v in means.items()))
    return means


def _dataset(config: TrainConfig, records: Sequence[ManifestRecord], train: bool) -> AudioVisualDataset:
    return AudioVisualDataset(
        records,
        seed=config.seed,
        image_size=config.image_size,
        frame_rate=config.frame_rate,
        sample_rate=config.sample_rate,
        samples_per_frame=config.samples_per_frame,
        train=train,
    )


@dataclass
class TrainResult:
    state: TrainState
    checkpoint: Path
    metrics: Path


def train(
    config: TrainConfig,
    records: Sequence[ManifestRecord],
    out_dir: Union[str, os.PathLike],
    resume: Optional[Union[str, os.PathLike]] = None,
    state: Optional[TrainState] = None,
) -> TrainResult:
    """
    Train until ``config.total_gen_steps`` generator steps, writing
    ``metrics.csv`` and checkpoints under ``out_dir``.

    Raises:
        ConfigurationError: invalid config or an empty train split.
        NonFiniteLossError: a loss term became NaN or infinite.
    """
    violations = validate_config(config)
    if violations:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(violations))
    train_records = split_records(records, "train")
    if not train_records:
        raise ConfigurationError("the manifest has no train records")
    val_records = split_records(records, "val")
    out_dir = Path(out_dir)
    ckpt_dir = out_dir / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)

    if state is None:
        state = load_checkpoint(resume, config) if resume else build_state(config)
    stream = iter(
        batch_stream(
            _dataset(config, train_records, train=True),
            config.batch_size,
            seed=config.seed,
            start=state.batches_drawn,
            num_workers=config.num_workers,
        )
    )
    resume_at = {"gen": state.gen_step, "critic": state.critic_step} if resume else None
    logpy.info(
        f"Training from generator step {state.gen_step} to {config.total_gen_steps} "
        f"on {len(train_records)} clips ({config.critic_steps_per_gen_step} critic steps per generator step)"
    )

    def next_batch():
        batch = next(stream)
        state.batches_drawn += 1
        return batch

    def wall_ms(start: float) -> float:
        return round((time.perf_counter() - start) * 1e3, 3) if config.log_wall_time else 0.0

    writer = MetricsWriter(out_dir / "metrics.csv", resume_at=resume_at)
    progress = tqdm(total=config.total_gen_steps, initial=state.gen_step, desc="generator steps", disable=None)
    try:
        while state.gen_step < config.total_gen_steps:
            for _ in range(config.critic_steps_per_gen_step):
                start = time.perf_counter()
                batch = next_batch()
                fake = synthesize_batch(state, batch["video"])
                metrics = critic_update(state, batch["audio"], fake)
                writer.write({"step": state.critic_step, "phase": "critic", **metrics, "wall_ms": wall_ms(start)})
            start = time.perf_counter()
            batch = next_batch()
            metrics = generator_update(state, batch["video"], batch["audio"])
            writer.write({"step": state.gen_step, "phase": "gen", **metrics, "wall_ms": wall_ms(start)})
            progress.update(1)

            if config.log_interval and state.gen_step % config.log_interval == 0:
                logpy.info(f"step {state.gen_step}: mean total loss {np.mean(list(state.history)):.4f}")
            if config.checkpoint_interval and state.gen_step % config.checkpoint_interval == 0:
                save_checkpoint(state, ckpt_dir / f"step{state.gen_step:06d}")
                validate(state, val_records)
    except NonFiniteLossError as e:
        logpy.error(f"aborting: {e}")
        raise
    finally:
        progress.close()
        writer.close()

    final = save_checkpoint(state, ckpt_dir / "final")
    return TrainResult(state=state, checkpoint=final, metrics=writer.path)
