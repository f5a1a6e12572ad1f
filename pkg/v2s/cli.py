"""
Command-line entry point.

Usage:
    python -m v2s make-synthetic --out data/synth --clips 20 --seed 7
    python -m v2s train --config configs/desk.conf --manifest data/synth/manifest.jsonl --out-dir runs/desk
    python -m v2s synth --checkpoint runs/desk/checkpoints/final --video clip.v2sf --out-wav clip.wav
    python -m v2s eval --manifest data/synth/manifest.jsonl --hyp-dir runs/desk/hyp --report runs/desk/report.csv
    python -m v2s ablate --config configs/desk.conf --manifest data/synth/manifest.jsonl --grid pase,power,mfcc
    python -m v2s silent-probe --checkpoint runs/desk/checkpoints/final --seconds 5 --out-dir runs/desk/probe
    python -m v2s validate-config --config configs/desk.conf

Exit codes: 0 success, 1 user error (bad flags, config, files), 2 internal
error (including a non-finite training loss).
"""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd
from tqdm import tqdm

from . import __version__
from .core.config import ABLATION_TOGGLES, TrainConfig, load_config, validate_config
from .data.augment import center_crop
from .data.io import load_video, save_audio
from .data.manifest import SPLITS, ManifestRecord, load_manifest, split_records
from .data.synthetic import DEFAULT_TONES, SyntheticSpec, make_synthetic_corpus
from .errors import USER_ERRORS, ConfigurationError, NonFiniteLossError
from .evaluation.probe import silent_probe
from .evaluation.report import evaluate_corpus, parse_metrics
from .models.inference import generate
from .training.checkpoint import load_checkpoint
from .training.trainer import train

logpy = logging.getLogger("v2s")

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def add_make_synthetic_args(parser):
    group = parser.add_argument_group("corpus", "synthetic corpus")
    group.add_argument("--out", type=Path, required=True, help="output directory")
    group.add_argument("--clips", type=int, default=20)
    group.add_argument("--frames", type=int, default=25, help="frames per clip")
    group.add_argument("--tones", type=_floats, default=list(DEFAULT_TONES), help="comma-separated tone frequencies in Hz")
    group.add_argument("--seed", type=int, default=0)
    group.add_argument("--rest-probability", type=float, default=0.0, help="chance that a frame is a silent rest")
    group.add_argument("--speakers", type=int, default=1)
    group.add_argument("--split-mode", choices=("seen", "unseen"), default="seen")
    return parser


def add_train_args(parser):
    group = parser.add_argument_group("training", "training run")
    group.add_argument("--config", type=Path, required=True)
    group.add_argument("--manifest", type=Path, required=True)
    group.add_argument("--out-dir", type=Path, required=True)
    group.add_argument("--resume", type=Path, default=None, help="checkpoint directory to continue from")
    group.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return parser


def add_synth_args(parser):
    group = parser.add_argument_group("synthesis", "video to waveform")
    group.add_argument("--checkpoint", type=Path, required=True)
    group.add_argument("--video", type=Path, default=None, help="single V2SF clip")
    group.add_argument("--out-wav", type=Path, default=None)
    group.add_argument("--manifest", type=Path, default=None, help="synthesize every clip of --split instead")
    group.add_argument("--split", choices=SPLITS + ("all",), default="test")
    group.add_argument("--out-dir", type=Path, default=None, help="receives <id>.wav with --manifest")
    return parser


def add_eval_args(parser):
    group = parser.add_argument_group("evaluation", "objective metrics")
    group.add_argument("--manifest", type=Path, required=True)
    group.add_argument("--hyp-dir", type=Path, required=True)
    group.add_argument("--split", choices=SPLITS + ("all",), default="test")
    group.add_argument("--metrics", default="stoi,mcd,wer")
    group.add_argument("--pesq-cmd", default=None, help="command template with {ref} and {deg}")
    group.add_argument("--asr-cmd", default=None, help="command template with {in}; oracle ASR when absent")
    group.add_argument("--tones", type=_floats, default=list(DEFAULT_TONES), help="oracle ASR vocabulary")
    group.add_argument("--report", type=Path, default=Path("report.csv"))
    return parser


def add_ablate_args(parser):
    group = parser.add_argument_group("ablation", "toggle sweep")
    group.add_argument("--config", type=Path, required=True)
    group.add_argument("--manifest", type=Path, required=True)
    group.add_argument("--grid", default="pase,power,mfcc,wave_critic,power_critic",
                       help="comma-separated rows; join toggles with '+' to disable several in one row")
    group.add_argument("--out-dir", type=Path, default=Path("ablation"))
    group.add_argument("--split", choices=SPLITS + ("all",), default="test")
    group.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return parser


def add_probe_args(parser):
    group = parser.add_argument_group("probe", "silent speaker")
    group.add_argument("--checkpoint", type=Path, required=True)
    group.add_argument("--seconds", type=float, default=5.0)
    group.add_argument("--out-dir", type=Path, default=Path("silent_probe"))
    return parser


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="v2s", description="video-to-speech synthesis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    add_make_synthetic_args(sub.add_parser("make-synthetic", help="write a synthetic tone corpus"))
    add_train_args(sub.add_parser("train", help="train a model"))
    add_synth_args(sub.add_parser("synth", help="synthesize speech from video"))
    add_eval_args(sub.add_parser("eval", help="score synthesized speech"))
    add_ablate_args(sub.add_parser("ablate", help="train and evaluate one model per toggle row"))
    add_probe_args(sub.add_parser("silent-probe", help="synthesize audio for a motionless mouth"))
    validate = sub.add_parser("validate-config", help="check a config file")
    validate.add_argument("--config", type=Path, required=True)
    return parser


def _records(manifest: Path, split: str) -> List[ManifestRecord]:
    records = load_manifest(manifest)
    return records if split == "all" else split_records(records, split)


def _load_valid_config(path: Path, overrides: Sequence[str] = ()) -> TrainConfig:
    config = load_config(path, overrides)
    violations = validate_config(config)
    if violations:
        raise ConfigurationError(f"{path}: invalid configuration:\n  " + "\n  ".join(violations))
    return config


def synthesize_records(state, records: Sequence[ManifestRecord], out_dir: Path) -> List[Path]:
    config = state.config
    out_dir.mkdir(parents=True, exist_ok=True)
    state.generator.eval()
    paths = []
    for record in tqdm(records, desc="synthesizing", disable=None):
        clip = center_crop(load_video(record.video_path, config.frame_rate, config.image_size))
        paths.append(save_audio(generate(state.generator, clip, config.sample_rate), out_dir / f"{record.id}.wav"))
    return paths


def cmd_make_synthetic(args) -> int:
    spec = SyntheticSpec(
        num_clips=args.clips,
        frames_per_clip=args.frames,
        tones=tuple(args.tones),
        seed=args.seed,
        rest_probability=args.rest_probability,
        num_speakers=args.speakers,
        split_mode=args.split_mode,
    )
    print(make_synthetic_corpus(spec, args.out))
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_valid_config(args.config, args.overrides)
    result = train(config, load_manifest(args.manifest), args.out_dir, resume=args.resume)
    print(result.checkpoint)
    return EXIT_OK


def cmd_synth(args) -> int:
    state = load_checkpoint(args.checkpoint)
    config = state.config
    if args.manifest is not None:
        if args.out_dir is None:
            raise ConfigurationError("--out-dir is required with --manifest")
        paths = synthesize_records(state, _records(args.manifest, args.split), args.out_dir)
        print(f"wrote {len(paths)} files to {args.out_dir}")
        return EXIT_OK
    if args.video is None or args.out_wav is None:
        raise ConfigurationError("--video and --out-wav are required without --manifest")
    clip = center_crop(load_video(args.video, config.frame_rate, config.image_size))
    state.generator.eval()
    start = time.perf_counter()
    waveform = generate(state.generator, clip, config.sample_rate)
    elapsed = time.perf_counter() - start
    save_audio(waveform, args.out_wav)
    print(f"{args.out_wav}: {len(waveform)} samples from {clip.num_frames} frames in {elapsed * 1e3:.1f} ms")
    return EXIT_OK


def cmd_eval(args) -> int:
    report = evaluate_corpus(
        _records(args.manifest, args.split),
        args.hyp_dir,
        metrics=parse_metrics(args.metrics),
        pesq_cmd=args.pesq_cmd,
        asr_cmd=args.asr_cmd,
        tones=args.tones,
    )
    csv_path, json_path = report.write(args.report)
    summary = report.summary()
    print(f"{csv_path} ({summary['count']} utterances, missing_count={summary['missing_count']})")
    for metric, value in summary["means"].items():
        print(f"  {metric}: {'n/a' if value is None else f'{value:.4f}'}")
    return EXIT_OK


def parse_grid(grid: str) -> List[List[str]]:
    rows = []
    for entry in grid.split(","):
        toggles = [t.strip() for t in entry.split("+") if t.strip()]
        if not toggles:
            continue
        unknown = [t for t in toggles if t not in ABLATION_TOGGLES]
        if unknown:
            raise ConfigurationError(
                f"--grid: unknown toggle(s) {', '.join(unknown)}; choose from {', '.join(ABLATION_TOGGLES)}"
            )
        rows.append(toggles)
    return rows


def cmd_ablate(args) -> int:
    rows = [[]] + parse_grid(args.grid)
    config = _load_valid_config(args.config, args.overrides)
    records = load_manifest(args.manifest)
    eval_records = records if args.split == "all" else split_records(records, args.split)
    table = []
    for disabled in rows:
        name = "full" if not disabled else "w/o " + "+".join(disabled)
        run_dir = args.out_dir / ("full" if not disabled else "wo_" + "_".join(disabled))
        run_config = config.replace(**{ABLATION_TOGGLES[t]: False for t in disabled})
        logpy.info(f"ablation row '{name}'")
        result = train(run_config, records, run_dir)
        synthesize_records(result.state, eval_records, run_dir / "hyp")
        report = evaluate_corpus(eval_records, run_dir / "hyp")
        report.write(run_dir / "report.csv")
        table.append({"row": name, "disabled": "+".join(disabled), **report.means()})
    out = args.out_dir / "ablation.csv"
    pd.DataFrame.from_records(table).to_csv(out, index=False)
    print(out)
    return EXIT_OK


def cmd_silent_probe(args) -> int:
    report = silent_probe(args.checkpoint, args.seconds, args.out_dir)
    print(f"samples: {report.num_samples}")
    print(f"rms: {report.rms:.6f}")
    print(f"peak: {report.peak:.6f}")
    return EXIT_OK


def cmd_validate_config(args) -> int:
    violations = validate_config(load_config(args.config))
    for violation in violations:
        print(violation)
    if violations:
        return EXIT_USER
    print(f"{args.config}: ok")
    return EXIT_OK


COMMANDS = {
    "make-synthetic": cmd_make_synthetic,
    "train": cmd_train,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "silent-probe": cmd_silent_probe,
    "validate-config": cmd_validate_config,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except NonFiniteLossError as e:
        logpy.error(str(e))
        return EXIT_INTERNAL
    except USER_ERRORS as e:
        logpy.error(str(e))
        return EXIT_USER
    except OSError as e:
        logpy.error(f"{e.filename or ''}: {e.strerror or e}")
        return EXIT_USER
    except Exception:
        logpy.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
