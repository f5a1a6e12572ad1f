"""
Newline-delimited JSON manifests: one object per line with exactly the
fields of :class:`ManifestRecord`. Relative paths are resolved against the
manifest's directory.
"""
import dataclasses
import json
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, List, Union

from ..errors import ManifestError

logpy = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    video_path: str
    audio_path: str
    transcript: str
    speaker_id: str
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {', '.join(SPLITS)}, got {self.split!r}")

    @property
    def words(self) -> List[str]:
        return self.transcript.split()


FIELDS = tuple(f.name for f in fields(ManifestRecord))


def _parse_line(line: str, lineno: int, root: Path, check_paths: bool) -> ManifestRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ManifestError(f"malformed JSON: {e.msg}", line=lineno) from e
    if not isinstance(obj, dict):
        raise ManifestError("expected a JSON object", line=lineno)
    missing = [k for k in FIELDS if k not in obj]
    extra = sorted(k for k in obj if k not in FIELDS)
    if missing:
        raise ManifestError(f"missing field(s): {', '.join(missing)}", line=lineno)
    if extra:
        raise ManifestError(f"unknown field(s): {', '.join(extra)}", line=lineno)
    for key in FIELDS:
        if not isinstance(obj[key], str):
            raise ManifestError(f"field '{key}' must be a string", line=lineno)
    if not obj["id"]:
        raise ManifestError("empty id", line=lineno)
    if obj["split"] not in SPLITS:
        raise ManifestError(f"split must be one of {', '.join(SPLITS)}, got {obj['split']!r}", line=lineno)
    for key in ("video_path", "audio_path"):
        path = root / obj[key]
        if check_paths and not path.is_file():
            raise ManifestError(f"{key} does not exist: {path}", line=lineno)
        obj[key] = str(path)
    return ManifestRecord(**obj)


def load_manifest(path: Union[str, os.PathLike], check_paths: bool = True) -> List[ManifestRecord]:
    """
    Read every record of a manifest.

    Raises:
        ManifestError: malformed line (with its line number), unresolvable path, or duplicate id.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    root = path.parent
    records, seen = [], {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            record = _parse_line(line, lineno, root, check_paths)
            if record.id in seen:
                raise ManifestError(f"duplicate id '{record.id}' (first seen on line {seen[record.id]})", line=lineno)
            seen[record.id] = lineno
            records.append(record)
    logpy.info(f"Loaded {len(records)} records from {path}")
    return records


def write_manifest(records: Iterable[ManifestRecord], path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(dataclasses.asdict(record), ensure_ascii=False) + "\n")
    return path


def split_records(records: Iterable[ManifestRecord], split: str) -> List[ManifestRecord]:
    if split not in SPLITS:
        raise ValueError(f"split must be one of {', '.join(SPLITS)}, got {split!r}")
    return [r for r in records if r.split == split]
