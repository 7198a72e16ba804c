"""Raw planar YUV 4:2:0 8-bit file reading and writing (I420 layout).

Each frame is stored as the full Y plane followed by the quarter-size U
and V planes. Readers reject files whose size is not an exact multiple of
the frame size; there is no silent truncation or padding.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import ArgumentError, FormatError, SizeMismatchError
from .imagecore import ColorFormat, Frame, VideoSequence


def yuv420_frame_bytes(width: int, height: int) -> int:
    return width * height * 3 // 2


def read_yuv420(
    path: str | Path,
    width: int,
    height: int,
    fps: float,
    frame_limit: int | None = None,
) -> VideoSequence:
    """Read an I420 file into a sequence; file size must match the dimensions."""
    if width % 2 or height % 2:
        raise ArgumentError(f"YUV420 dimensions must be even, got {width}x{height}")
    if width < 2 or height < 2:
        raise ArgumentError(f"dimensions must be at least 2x2, got {width}x{height}")
    path = Path(path)
    size = os.path.getsize(path)
    per_frame = yuv420_frame_bytes(width, height)
    if size == 0 or size % per_frame:
        raise SizeMismatchError(
            f"{path}: size {size} is not a positive multiple of the {per_frame}-byte frame size"
        )
    count = size // per_frame
    if frame_limit is not None:
        if frame_limit < 1:
            raise ArgumentError(f"frame_limit must be at least 1, got {frame_limit}")
        count = min(count, frame_limit)
    cw, ch = width // 2, height // 2
    frames = []
    with open(path, "rb") as fh:
        for _ in range(count):
            raw = np.frombuffer(fh.read(per_frame), dtype=np.uint8)
            y = raw[: width * height].reshape(height, width)
            u = raw[width * height : width * height + cw * ch].reshape(ch, cw)
            v = raw[width * height + cw * ch :].reshape(ch, cw)
            frames.append(Frame((y, u, v), ColorFormat.YUV420))
    return VideoSequence(frames, fps=fps)


def write_yuv420(seq: VideoSequence, path: str | Path) -> None:
    """Write a YUV420 sequence as a raw I420 file; read back is byte-identical."""
    if seq.color_format != ColorFormat.YUV420:
        raise FormatError(f"write_yuv420 requires YUV420 frames, got {seq.color_format.value}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        for frame in seq.frames:
            for plane in frame.planes:
                fh.write(plane.tobytes())
