"""Driver for external video encoders invoked through command templates.

The sequence is written as raw YUV420, the encode and decode commands are
run as subprocesses with placeholder substitution, and the decoded YUV is
read back. Reference-structure choices (GOP layout, reference frames) are
entirely the external encoder's configuration. One process runs at a time
per invocation; concurrent calls must use distinct workdirs.
"""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from ..errors import CodecTemplateError, ExternalCodecError, FormatError, SizeMismatchError
from ..imagecore import ColorFormat, VideoSequence
from ..yuvio import read_yuv420, write_yuv420
from . import CodingStats, ExternalCodecSpec, stats_for


def _substitute(template: str, mapping: dict[str, object]) -> list[str]:
    try:
        command = template.format_map({k: str(v) for k, v in mapping.items()})
    except KeyError as exc:
        raise CodecTemplateError(f"unknown placeholder {{{exc.args[0]}}} in template") from exc
    except (IndexError, ValueError) as exc:
        raise CodecTemplateError(f"malformed template: {exc}") from exc
    argv = shlex.split(command)
    if not argv:
        raise CodecTemplateError("template expands to an empty command")
    return argv


def _run(argv: list[str], timeout: float, workdir: Path, what: str) -> subprocess.CompletedProcess:
    try:
        proc = subprocess.run(
            argv,
            cwd=workdir,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise ExternalCodecError(
            f"{what} command timed out after {timeout}s: {shlex.join(argv)}",
            stdout=(exc.stdout or b"").decode(errors="replace") if isinstance(exc.stdout, bytes) else (exc.stdout or ""),
            stderr=(exc.stderr or b"").decode(errors="replace") if isinstance(exc.stderr, bytes) else (exc.stderr or ""),
        ) from exc
    except FileNotFoundError as exc:
        raise ExternalCodecError(f"{what} command not found: {argv[0]}") from exc
    if proc.returncode != 0:
        raise ExternalCodecError(
            f"{what} command exited with status {proc.returncode}: {shlex.join(argv)}",
            returncode=proc.returncode,
            stdout=proc.stdout,
            stderr=proc.stderr,
        )
    return proc


def run_encode_template(
    spec: ExternalCodecSpec,
    input_path: Path,
    output_path: Path,
    qp: int,
    width: int,
    height: int,
    frames: int,
    fps: float,
    workdir: Path,
) -> subprocess.CompletedProcess:
    mapping = {
        "input": input_path,
        "output": output_path,
        "qp": qp,
        "width": width,
        "height": height,
        "frames": frames,
        "fps": fps,
    }
    argv = _substitute(spec.encode_template, mapping)
    return _run(argv, spec.timeout, workdir, "encode")


def run_decode_template(
    spec: ExternalCodecSpec,
    input_path: Path,
    output_path: Path,
    workdir: Path,
    width: int = 0,
    height: int = 0,
    frames: int = 0,
    fps: float = 0.0,
    qp: int = 0,
) -> subprocess.CompletedProcess:
    mapping = {
        "input": input_path,
        "output": output_path,
        "qp": qp,
        "width": width,
        "height": height,
        "frames": frames,
        "fps": fps,
    }
    argv = _substitute(spec.decode_template, mapping)
    return _run(argv, spec.timeout, workdir, "decode")


def encode_external(
    seq: VideoSequence,
    spec: ExternalCodecSpec,
    qp: int,
    workdir: str | Path,
) -> tuple[Path, VideoSequence, CodingStats]:
    """Round-trip a sequence through the external encoder and decoder.

    Returns the coded file path, the decoded sequence, and size-derived
    coding statistics. The caller owns the workdir and its contents.
    """
    if seq.color_format != ColorFormat.YUV420:
        raise FormatError(
            f"external coding requires a YUV420 sequence, got {seq.color_format.value}"
        )
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    input_path = workdir / "input.yuv"
    coded_path = workdir / "coded.bin"
    decoded_path = workdir / "decoded.yuv"
    write_yuv420(seq, input_path)

    w, h, n = seq.width, seq.height, len(seq.frames)
    enc = run_encode_template(spec, input_path, coded_path, qp, w, h, n, seq.fps, workdir)
    if not coded_path.exists() or coded_path.stat().st_size == 0:
        raise ExternalCodecError(
            "encode command produced no output file",
            stdout=enc.stdout,
            stderr=enc.stderr,
        )
    dec = run_decode_template(
        spec, coded_path, decoded_path, workdir, width=w, height=h, frames=n, fps=seq.fps, qp=qp
    )
    if not decoded_path.exists():
        raise ExternalCodecError(
            "decode command produced no output file",
            stdout=dec.stdout,
            stderr=dec.stderr,
        )
    try:
        decoded = read_yuv420(decoded_path, w, h, seq.fps)
    except SizeMismatchError as exc:
        raise ExternalCodecError(
            f"decoded file is not a whole number of {w}x{h} frames: {exc}",
            stdout=dec.stdout,
            stderr=dec.stderr,
        ) from exc
    if len(decoded.frames) != n:
        raise ExternalCodecError(
            f"decoder returned {len(decoded.frames)} frames, expected {n}",
            stdout=dec.stdout,
            stderr=dec.stderr,
        )
    stats = stats_for(coded_path.stat().st_size, n, seq.fps)
    return coded_path, decoded, stats
