"""
External tool invocation.

Command templates are split shell-style and their ``{name}`` placeholders
substituted token by token; no shell is involved.
"""
import logging
import os
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import Dict, Optional, Union

from ..core.types import VideoClip
from ..errors import AdapterError
from .io import load_video

logpy = logging.getLogger(__name__)


def render_command(template: str, substitutions: Dict[str, str]) -> list:
    try:
        tokens = shlex.split(template)
    except ValueError as e:
        raise AdapterError(f"cannot parse command template {template!r}: {e}") from e
    if not tokens:
        raise AdapterError("empty command template")
    argv = []
    for token in tokens:
        for key, value in substitutions.items():
            token = token.replace("{" + key + "}", str(value))
        argv.append(token)
    return argv


def run_tool(template: str, substitutions: Dict[str, str], timeout: Optional[float] = None) -> str:
    """
    Run the command and return its stdout.

    Raises:
        AdapterError: the tool is missing, times out or exits nonzero; carries its output.
    """
    argv = render_command(template, substitutions)
    logpy.debug(f"running {' '.join(shlex.quote(a) for a in argv)}")
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError as e:
        raise AdapterError(f"tool not found: {argv[0]}") from e
    except subprocess.TimeoutExpired as e:
        raise AdapterError(f"{argv[0]} timed out after {timeout} s", output=str(e.stdout or "")) from e
    if proc.returncode != 0:
        raise AdapterError(f"{argv[0]} exited with status {proc.returncode}", output=proc.stdout + proc.stderr)
    return proc.stdout


def preprocess_adapter(
    command_template: str,
    raw_video_path: Union[str, os.PathLike],
    image_size: Optional[int] = 96,
    timeout: Optional[float] = None,
) -> VideoClip:
    """
    Turn a raw video into a mouth-ROI clip with a user-supplied tool that
    reads ``{in}`` and writes a V2SF container to ``{out}``.

    Raises:
        AdapterError: the tool failed or wrote nothing.
        FormatError: the tool's output is not a valid container of the expected size.
    """
    with tempfile.TemporaryDirectory(prefix="v2s-preprocess-") as tmp:
        out = Path(tmp) / "roi.v2sf"
        output = run_tool(command_template, {"in": str(raw_video_path), "out": str(out)}, timeout)
        if not out.is_file():
            raise AdapterError(f"preprocessing tool wrote no output to {out}", output=output)
        return load_video(out, image_size=image_size)
