"""
Append-only CSV metrics log written by a background thread.

Rows are queued in order and written in order; :meth:`MetricsWriter.close`
blocks until every queued row is on disk.
"""
import csv
import logging
import os
import queue
import threading
from pathlib import Path
from typing import Dict, Optional, Union

logpy = logging.getLogger(__name__)

COLUMNS = (
    "step",
    "phase",
    "loss_adv",
    "loss_pase",
    "loss_power",
    "loss_mfcc",
    "loss_total",
    "loss_critic_wave",
    "loss_critic_power",
    "gp_wave",
    "gp_power",
    "wall_ms",
)

_STOP = object()


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _truncate_for_resume(path: Path, gen_step: int, critic_step: int) -> None:
    """Drop rows logged after the checkpoint being resumed from."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError(f"{path} is not a v2s metrics log")
    limit = {"gen": gen_step, "critic": critic_step}
    kept = [rows[0]] + [r for r in rows[1:] if int(r[0]) <= limit.get(r[1], -1)]
    with open(path, "w", encoding="utf-8", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(kept)


class MetricsWriter:
    def __init__(self, path: Union[str, os.PathLike], resume_at: Optional[Dict[str, int]] = None):
        self.path = Path(path)
        if resume_at is not None and self.path.is_file():
            _truncate_for_resume(self.path, resume_at["gen"], resume_at["critic"])
            self._file = open(self.path, "a", encoding="utf-8", newline="")
            self._writer = csv.writer(self._file, lineterminator="\n")
        else:
            self._file = open(self.path, "w", encoding="utf-8", newline="")
            self._writer = csv.writer(self._file, lineterminator="\n")
            self._writer.writerow(COLUMNS)
        self._queue: "queue.Queue" = queue.Queue()
        self._error: Optional[BaseException] = None
        self._thread = threading.Thread(target=self._run, name="v2s-metrics", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while True:
            row = self._queue.get()
            if row is _STOP:
                break
            try:
                self._writer.writerow([format_value(row.get(c)) for c in COLUMNS])
            except Exception as e:
                self._error = e
                logpy.error(f"metrics writer failed: {e}")
        self._file.flush()

    def write(self, row: dict) -> None:
        if self._error is not None:
            raise self._error
        self._queue.put(dict(row))

    def close(self) -> None:
        if self._thread.is_alive():
            self._queue.put(_STOP)
            self._thread.join()
        self._file.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, _exc_type, _exc_val, _exc_tb):
        self.close()
