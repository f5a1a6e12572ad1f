"""
Corpus evaluation and its report.

Hypotheses are paired with references by manifest id (``<hyp_dir>/<id>.wav``).
The report is a CSV with one row per utterance plus a final ``mean`` row,
and a JSON summary with corpus and per-speaker means.
"""
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..core.types import DEFAULT_FRAME_RATE as FRAME_RATE
from ..data.dataset import num_workers_cap
from ..data.io import load_audio
from ..data.manifest import ManifestRecord
from ..data.synthetic import DEFAULT_TONES
from ..errors import ConfigurationError, MetricError
from .adapters import asr_adapter, oracle_asr, pesq_adapter
from .metrics import mcd, stoi, wer

logpy = logging.getLogger(__name__)

METRICS = ("stoi", "mcd", "wer", "pesq")
DEFAULT_METRICS = ("stoi", "mcd", "wer")

PathLike = Union[str, os.PathLike]


def parse_metrics(spec: Union[str, Sequence[str]]) -> Tuple[str, ...]:
    names = [m.strip().lower() for m in (spec.split(",") if isinstance(spec, str) else spec) if m.strip()]
    unknown = [m for m in names if m not in METRICS]
    if unknown:
        raise ConfigurationError(f"unknown metric(s) {', '.join(unknown)}; choose from {', '.join(METRICS)}")
    if not names:
        raise ConfigurationError("no metrics selected")
    return tuple(dict.fromkeys(names))


@dataclass
class UtteranceScores:
    id: str
    speaker_id: str
    missing: bool = False
    scores: Dict[str, Optional[float]] = field(default_factory=dict)
    length_mismatch: int = 0  # hypothesis minus reference, in samples


@dataclass
class EvalReport:
    metrics: Tuple[str, ...]
    rows: List[UtteranceScores]

    @property
    def missing_count(self) -> int:
        return sum(r.missing for r in self.rows)

    @property
    def mismatched_ids(self) -> List[str]:
        return [r.id for r in self.rows if r.length_mismatch]

    def _mean(self, rows: Sequence[UtteranceScores], metric: str) -> Optional[float]:
        values = [r.scores.get(metric) for r in rows if not r.missing]
        values = [v for v in values if v is not None]
        return float(np.mean(values)) if values else None

    def means(self) -> Dict[str, Optional[float]]:
        return {m: self._mean(self.rows, m) for m in self.metrics}

    def speaker_means(self) -> Dict[str, Dict[str, Optional[float]]]:
        speakers = sorted({r.speaker_id for r in self.rows})
        return {s: {m: self._mean([r for r in self.rows if r.speaker_id == s], m) for m in self.metrics} for s in speakers}

    def to_frame(self) -> pd.DataFrame:
        records = [
            {"id": r.id, "speaker_id": r.speaker_id, "missing": r.missing, **{m: r.scores.get(m) for m in self.metrics}}
            for r in self.rows
        ]
        means = self.means()
        records.append({"id": "mean", "speaker_id": "", "missing": self.missing_count, **means})
        return pd.DataFrame.from_records(records, columns=["id", "speaker_id", "missing", *self.metrics])

    def summary(self) -> dict:
        return {
            "metrics": list(self.metrics),
            "count": len(self.rows),
            "missing_count": self.missing_count,
            "length_mismatch": {r.id: r.length_mismatch for r in self.rows if r.length_mismatch},
            "means": self.means(),
            "speaker_means": self.speaker_means(),
        }

    def write(self, csv_path: PathLike, json_path: Optional[PathLike] = None) -> Tuple[Path, Path]:
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path is not None else csv_path.with_suffix(".json")
        self.to_frame().to_csv(csv_path, index=False)
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return csv_path, json_path


def _score(
    record: ManifestRecord,
    hyp_dir: Path,
    metrics: Tuple[str, ...],
    pesq_cmd: Optional[str],
    asr_cmd: Optional[str],
    tones: Sequence[float],
    sample_rate: int,
) -> UtteranceScores:
    row = UtteranceScores(record.id, record.speaker_id)
    hyp_path = hyp_dir / f"{record.id}.wav"
    if not hyp_path.is_file():
        logpy.warning(f"{record.id}: no hypothesis at {hyp_path}")
        row.missing = True
        return row
    reference = load_audio(record.audio_path, sample_rate)
    hypothesis = load_audio(hyp_path, sample_rate)
    row.length_mismatch = len(hypothesis) - len(reference)
    if abs(row.length_mismatch) > sample_rate // FRAME_RATE:
        logpy.warning(
            f"{record.id}: hypothesis has {len(hypothesis)} samples, reference {len(reference)}; "
            "scoring the common prefix"
        )
    n = min(len(reference), len(hypothesis))
    ref, hyp = reference.samples[:n], hypothesis.samples[:n]
    if "stoi" in metrics:
        try:
            row.scores["stoi"] = stoi(ref, hyp, sample_rate)
        except MetricError as e:
            logpy.warning(f"{record.id}: {e}")
            row.scores["stoi"] = None
    if "mcd" in metrics:
        row.scores["mcd"] = mcd(ref, hyp)
    if "wer" in metrics:
        words = asr_adapter(asr_cmd, hyp_path) if asr_cmd else oracle_asr(hypothesis, tones)
        if words is None or not record.words:
            row.scores["wer"] = None
        else:
            row.scores["wer"] = wer(record.words, words)
    if "pesq" in metrics:
        row.scores["pesq"] = pesq_adapter(pesq_cmd, record.audio_path, hyp_path)
    return row


def evaluate_corpus(
    records: Sequence[ManifestRecord],
    hyp_dir: PathLike,
    metrics: Union[str, Sequence[str]] = DEFAULT_METRICS,
    pesq_cmd: Optional[str] = None,
    asr_cmd: Optional[str] = None,
    tones: Sequence[float] = DEFAULT_TONES,
    sample_rate: int = 16000,
    num_workers: int = 4,
) -> EvalReport:
    """
    Score every record's hypothesis. Without ``asr_cmd`` the WER uses the
    synthetic-corpus oracle recognizer; PESQ is reported only with ``pesq_cmd``.
    """
    metrics = parse_metrics(metrics)
    if "pesq" in metrics and not pesq_cmd:
        logpy.info("no PESQ command configured, leaving PESQ out of the report")
        metrics = tuple(m for m in metrics if m != "pesq")
    hyp_dir = Path(hyp_dir)
    if not hyp_dir.is_dir():
        raise ConfigurationError(f"hypothesis directory not found: {hyp_dir}")

    def score(record: ManifestRecord) -> UtteranceScores:
        return _score(record, hyp_dir, metrics, pesq_cmd, asr_cmd, tones, sample_rate)

    workers = num_workers_cap(num_workers)
    progress = dict(total=len(records), desc="evaluating", disable=None)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(tqdm(pool.map(score, records), **progress))
    else:
        rows = [score(r) for r in tqdm(records, **progress)]
    report = EvalReport(metrics, rows)
    means = ", ".join(f"{m}={v:.4f}" for m, v in report.means().items() if v is not None and not math.isnan(v))
    logpy.info(
        f"evaluated {len(rows)} utterances ({report.missing_count} missing, "
        f"{len(report.mismatched_ids)} length-mismatched): {means}"
    )
    return report
