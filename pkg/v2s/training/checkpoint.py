"""
Checkpoints.

A checkpoint is a directory with one safetensors file per network (weights
and Adam moments), ``trainer.safetensors`` (random stream state, counters
and loss history) and the run's ``config.conf``. Non-tensor values ride in
each file's metadata as a single JSON string, which keeps the files
byte-identical across save/load/save cycles.
"""
import json
import logging
import os
import struct
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import torch
from safetensors.torch import load as load_safetensors_bytes
from safetensors.torch import save as save_safetensors_bytes

from ..core.config import TrainConfig, dump_config, load_config
from ..core.rng import Rng
from ..errors import CheckpointError, CheckpointIntegrityError, CheckpointVersionError, ConfigurationError
from .state import TrainState, build_state

logpy = logging.getLogger(__name__)

FORMAT_VERSION = 1
META_KEY = "v2s"
NETWORKS = ("generator", "wave_critic", "power_critic")
ARCH_FIELDS = (
    "model_width_scale",
    "image_size",
    "frontend_frames",
    "enable_overlap",
    "sample_rate",
    "frame_rate",
    "clip_seconds",
)

PathLike = Union[str, os.PathLike]


def _write(path: Path, tensors: Dict[str, torch.Tensor], meta: dict) -> None:
    meta = {"format_version": FORMAT_VERSION, **meta}
    tensors = {k: v.detach().cpu().contiguous() for k, v in tensors.items()}
    data = save_safetensors_bytes(tensors, metadata={META_KEY: json.dumps(meta, sort_keys=True)})
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _read(path: Path) -> Tuple[Dict[str, torch.Tensor], dict]:
    if not path.is_file():
        raise CheckpointError(f"checkpoint file not found: {path}")
    raw = path.read_bytes()
    try:
        tensors = load_safetensors_bytes(raw)
        (header_len,) = struct.unpack_from("<Q", raw)
        header = json.loads(raw[8 : 8 + header_len])
        meta = json.loads(header["__metadata__"][META_KEY])
    except Exception as e:
        raise CheckpointIntegrityError(f"{path}: corrupt or truncated checkpoint file ({e})") from e
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: checkpoint format version {version}, this build reads version {FORMAT_VERSION}"
        )
    return tensors, meta


def _flatten_optimizer(opt: torch.optim.Optimizer) -> Tuple[Dict[str, torch.Tensor], dict]:
    state_dict = opt.state_dict()
    tensors, scalars = {}, {}
    for idx, entries in state_dict["state"].items():
        for key, value in entries.items():
            if isinstance(value, torch.Tensor):
                tensors[f"optim.state.{idx}.{key}"] = value
            else:
                scalars[f"{idx}.{key}"] = value
    return tensors, {"param_groups": state_dict["param_groups"], "optim_scalars": scalars}


def _unflatten_optimizer(tensors: Dict[str, torch.Tensor], meta: dict) -> dict:
    state: Dict[int, dict] = {}
    for name, value in tensors.items():
        if not name.startswith("optim.state."):
            continue
        idx, key = name[len("optim.state.") :].split(".", 1)
        state.setdefault(int(idx), {})[key] = value
    for name, value in meta["optim_scalars"].items():
        idx, key = name.split(".", 1)
        state.setdefault(int(idx), {})[key] = value
    return {"state": state, "param_groups": meta["param_groups"]}


def save_checkpoint(state: TrainState, path: PathLike) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for name in NETWORKS:
        module, opt = state.modules()[name], state.optimizers()[name]
        tensors = {f"model.{k}": v for k, v in module.state_dict().items()}
        opt_tensors, opt_meta = _flatten_optimizer(opt)
        tensors.update(opt_tensors)
        _write(path / f"{name}.safetensors", tensors, {"module": name, **opt_meta})
    _write(
        path / "trainer.safetensors",
        {"rng_state": state.rng.get_state()},
        {
            "gen_step": state.gen_step,
            "critic_step": state.critic_step,
            "batches_drawn": state.batches_drawn,
            "history": list(state.history),
            "rng_seed": state.rng.seed,
            "rng_stream": state.rng.stream,
        },
    )
    (path / "config.conf").write_text(dump_config(state.config), encoding="utf-8")
    logpy.info(f"Saved checkpoint at generator step {state.gen_step} to {path}")
    return path


def _check_architecture(stored: TrainConfig, config: TrainConfig, path: Path) -> None:
    changed = [f for f in ARCH_FIELDS if getattr(stored, f) != getattr(config, f)]
    if changed:
        raise CheckpointError(f"{path}: config changes architecture field(s) {', '.join(changed)} of the checkpoint")


def load_checkpoint(path: PathLike, config: Optional[TrainConfig] = None, extractor=None) -> TrainState:
    """
    Rebuild a :class:`TrainState` from ``path``.

    Args:
        config: run configuration; defaults to the one stored in the checkpoint.
            It may change schedule fields but not the architecture.

    Raises:
        CheckpointError: missing files or an incompatible config.
        CheckpointIntegrityError: truncated or corrupt files.
        CheckpointVersionError: files written by another format version.
    """
    path = Path(path)
    if not path.is_dir():
        raise CheckpointError(f"checkpoint directory not found: {path}")
    try:
        stored = load_config(path / "config.conf")
    except ConfigurationError as e:
        raise CheckpointIntegrityError(f"{path}: unreadable stored config ({e})") from e
    if config is None:
        config = stored
    else:
        _check_architecture(stored, config, path)
    state = build_state(config, extractor)
    for name in NETWORKS:
        tensors, meta = _read(path / f"{name}.safetensors")
        weights = {k[len("model.") :]: v for k, v in tensors.items() if k.startswith("model.")}
        try:
            state.modules()[name].load_state_dict(weights, strict=True)
            state.optimizers()[name].load_state_dict(_unflatten_optimizer(tensors, meta))
        except (RuntimeError, KeyError, ValueError) as e:
            raise CheckpointIntegrityError(f"{path / name}.safetensors does not match the network: {e}") from e
    tensors, meta = _read(path / "trainer.safetensors")
    state.rng = Rng(meta["rng_seed"], meta["rng_stream"])
    state.rng.set_state(tensors["rng_state"])
    state.gen_step = meta["gen_step"]
    state.critic_step = meta["critic_step"]
    state.batches_drawn = meta["batches_drawn"]
    state.history.clear()
    state.history.extend(meta["history"])
    logpy.info(f"Loaded checkpoint at generator step {state.gen_step} from {path}")
    return state
