"""Pixel-level primitives: frames, contrast reduction, bicubic resampling, entropy, PSNR.

All operations are pure functions over immutable :class:`Frame` values and
are deterministic: the rounding policy is round-half-away-from-zero
everywhere, so identical inputs always produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ArgumentError, FormatError

__all__ = [
    "ColorFormat",
    "Frame",
    "ContrastParams",
    "VideoSequence",
    "round_half_away",
    "global_mean",
    "contrast_reduce",
    "bicubic_resize",
    "shannon_entropy",
    "psnr",
    "rgb_to_yuv420",
    "yuv420_to_rgb",
    "yuv420_to_yuv444",
    "yuv444_to_yuv420",
]


class ColorFormat(Enum):
    GRAY = "gray"
    RGB444 = "rgb444"
    YUV444 = "yuv444"
    YUV420 = "yuv420"


_PLANE_COUNT = {
    ColorFormat.GRAY: 1,
    ColorFormat.RGB444: 3,
    ColorFormat.YUV444: 3,
    ColorFormat.YUV420: 3,
}


def round_half_away(x: np.ndarray | float) -> np.ndarray:
    """Round to the nearest integer with halves going away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _clamp_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 0, 255).astype(np.uint8)


def _freeze(samples: np.ndarray) -> np.ndarray:
    src = np.asarray(samples)
    if not np.issubdtype(src.dtype, np.integer):
        raise FormatError(f"plane samples must be integers, got dtype {src.dtype}")
    if src.size and (src.min() < 0 or src.max() > 255):
        raise FormatError("plane samples must lie in [0, 255]")
    arr = np.array(src, dtype=np.uint8, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    """A planar 8-bit image: one plane for GRAY, three otherwise.

    For YUV420 the two chroma planes are exactly half the luma plane in
    each dimension (luma dimensions must be even). Plane arrays are
    copied on construction and marked read-only.
    """

    planes: tuple[np.ndarray, ...]
    color_format: ColorFormat

    def __post_init__(self):
        planes = tuple(_freeze(np.asarray(p)) for p in self.planes)
        object.__setattr__(self, "planes", planes)
        expected = _PLANE_COUNT[self.color_format]
        if len(planes) != expected:
            raise FormatError(
                f"{self.color_format.value} frame needs {expected} plane(s), got {len(planes)}"
            )
        for p in planes:
            if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
                raise FormatError(f"plane must be 2-D and nonempty, got shape {p.shape}")
        luma = planes[0]
        if self.color_format == ColorFormat.YUV420:
            h, w = luma.shape
            if w % 2 or h % 2:
                raise FormatError(f"YUV420 luma dimensions must be even, got {w}x{h}")
            for p in planes[1:]:
                if p.shape != (h // 2, w // 2):
                    raise FormatError(
                        f"YUV420 chroma plane must be {w // 2}x{h // 2}, got {p.shape[1]}x{p.shape[0]}"
                    )
        elif self.color_format != ColorFormat.GRAY:
            for p in planes[1:]:
                if p.shape != luma.shape:
                    raise FormatError("all planes must share the luma dimensions")

    @property
    def width(self) -> int:
        return self.planes[0].shape[1]

    @property
    def height(self) -> int:
        return self.planes[0].shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.color_format == other.color_format
            and len(self.planes) == len(other.planes)
            and all(np.array_equal(a, b) for a, b in zip(self.planes, other.planes))
        )

    def __hash__(self):
        return hash((self.color_format, self.width, self.height))


@dataclass(frozen=True)
class ContrastParams:
    """Blend ratio toward the global mean; rounding is fixed half-away-from-zero."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ArgumentError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass
class VideoSequence:
    """An ordered, homogeneous list of frames with a playback rate."""

    frames: list[Frame]
    fps: float

    def __post_init__(self):
        if not self.frames:
            raise ArgumentError("sequence must contain at least one frame")
        if self.fps <= 0:
            raise ArgumentError(f"fps must be positive, got {self.fps}")
        first = self.frames[0]
        for f in self.frames[1:]:
            if f.color_format != first.color_format or f.width != first.width or f.height != first.height:
                raise FormatError("all frames must share dimensions and color format")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def color_format(self) -> ColorFormat:
        return self.frames[0].color_format


def _require_full_3plane(frame: Frame, op: str) -> None:
    if frame.color_format not in (ColorFormat.RGB444, ColorFormat.YUV444):
        raise FormatError(
            f"{op} requires an RGB444 or YUV444 frame, got {frame.color_format.value}"
        )


def global_mean(frame: Frame) -> float:
    """Mean sample value over all three full-resolution planes."""
    _require_full_3plane(frame, "global_mean")
    total = sum(p.sum(dtype=np.float64) for p in frame.planes)
    return float(total / (3 * frame.width * frame.height))


def contrast_reduce(frame: Frame, params: ContrastParams) -> Frame:
    """Blend every sample toward the frame's global mean by ratio alpha.

    Output sample = clamp(round((1-alpha)*v + alpha*mean)); dimensions and
    color format are unchanged. alpha=0 is the identity; alpha=1 collapses
    the frame to its rounded mean.
    """
    _require_full_3plane(frame, "contrast_reduce")
    mu = global_mean(frame)
    a = params.alpha
    out = []
    for p in frame.planes:
        blended = (1.0 - a) * p.astype(np.float64) + a * mu
        out.append(_clamp_u8(round_half_away(blended)))
    return Frame(tuple(out), frame.color_format)


def _catmull_rom(t: np.ndarray) -> np.ndarray:
    # Cubic convolution kernel with a = -0.5; support (-2, 2).
    a = -0.5
    t = np.abs(t)
    out = np.zeros_like(t)
    near = t <= 1.0
    far = (t > 1.0) & (t < 2.0)
    tn = t[near]
    tf = t[far]
    out[near] = (a + 2.0) * tn**3 - (a + 3.0) * tn**2 + 1.0
    out[far] = a * tf**3 - 5.0 * a * tf**2 + 8.0 * a * tf - 4.0 * a
    return out


def _resize_weights(in_size: int, out_size: int) -> np.ndarray:
    """Dense (out_size, in_size) matrix of Catmull-Rom weights with edge clamp."""
    dst = np.arange(out_size, dtype=np.float64)
    src = (dst + 0.5) * (in_size / out_size) - 0.5
    base = np.floor(src)
    frac = src - base
    weights = np.zeros((out_size, in_size), dtype=np.float64)
    for k in range(-1, 3):
        idx = np.clip(base + k, 0, in_size - 1).astype(np.int64)
        w = _catmull_rom(k - frac)
        np.add.at(weights, (np.arange(out_size), idx), w)
    return weights


def bicubic_resize(frame: Frame, out_w: int, out_h: int) -> Frame:
    """Separable Catmull-Rom resize of every plane to ``out_w`` x ``out_h``.

    Source coordinates map as src = (dst + 0.5) * in/out - 0.5 and
    out-of-range taps clamp to the edge. Resizing to the input dimensions
    is a bit-exact identity.
    """
    if out_w < 1 or out_h < 1:
        raise ArgumentError(f"output dimensions must be positive, got {out_w}x{out_h}")
    if frame.color_format == ColorFormat.YUV420:
        raise FormatError("bicubic_resize does not operate on YUV420 frames; resize planes individually")
    wx = _resize_weights(frame.width, out_w)
    wy = _resize_weights(frame.height, out_h)
    out = []
    for p in frame.planes:
        tmp = wy @ p.astype(np.float64) @ wx.T
        out.append(_clamp_u8(round_half_away(tmp)))
    return Frame(tuple(out), frame.color_format)


def shannon_entropy(frame: Frame) -> float:
    """Entropy in bits/sample of the 256-bin histogram over all planes."""
    counts = np.zeros(256, dtype=np.int64)
    for p in frame.planes:
        counts += np.bincount(p.reshape(-1), minlength=256)
    total = counts.sum()
    probs = counts[counts > 0] / total
    return float(-(probs * np.log2(probs)).sum())


def psnr(a: Frame, b: Frame) -> float:
    """Peak signal-to-noise ratio in dB over all samples; +inf for identical frames."""
    if a.color_format != b.color_format or any(
        pa.shape != pb.shape for pa, pb in zip(a.planes, b.planes)
    ):
        raise FormatError("psnr requires frames of identical dimensions and format")
    se = 0.0
    n = 0
    for pa, pb in zip(a.planes, b.planes):
        diff = pa.astype(np.float64) - pb.astype(np.float64)
        se += float((diff * diff).sum())
        n += diff.size
    if se == 0.0:
        return float("inf")
    return float(10.0 * np.log10(255.0**2 / (se / n)))


def sequence_psnr(a: VideoSequence, b: VideoSequence) -> float:
    """PSNR pooled over every sample of every frame pair."""
    if len(a.frames) != len(b.frames):
        raise FormatError("sequences must have equal frame counts")
    se = 0.0
    n = 0
    for fa, fb in zip(a.frames, b.frames):
        if fa.color_format != fb.color_format or fa.width != fb.width or fa.height != fb.height:
            raise FormatError("psnr requires frames of identical dimensions and format")
        for pa, pb in zip(fa.planes, fb.planes):
            diff = pa.astype(np.float64) - pb.astype(np.float64)
            se += float((diff * diff).sum())
            n += diff.size
    if se == 0.0:
        return float("inf")
    return float(10.0 * np.log10(255.0**2 / (se / n)))


# BT.601 full-range: Y = 0.299 R + 0.587 G + 0.114 B,
# Cb = 128 + 0.564 (B - Y), Cr = 128 + 0.713 (R - Y).
_KR, _KG, _KB = 0.299, 0.587, 0.114
_CB_SCALE, _CR_SCALE = 0.564, 0.713


def rgb_to_yuv420(frame: Frame) -> Frame:
    """Convert RGB444 to YUV420: BT.601 full-range matrix, 2x2 mean chroma downsample."""
    if frame.color_format != ColorFormat.RGB444:
        raise FormatError(f"rgb_to_yuv420 requires RGB444, got {frame.color_format.value}")
    if frame.width % 2 or frame.height % 2:
        raise ArgumentError(
            f"rgb_to_yuv420 requires even dimensions, got {frame.width}x{frame.height}"
        )
    r, g, b = (p.astype(np.float64) for p in frame.planes)
    y = _KR * r + _KG * g + _KB * b
    cb = 128.0 + (b - y) * _CB_SCALE
    cr = 128.0 + (r - y) * _CR_SCALE
    h, w = y.shape
    cb_ds = cb.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
    cr_ds = cr.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
    planes = tuple(_clamp_u8(round_half_away(p)) for p in (y, cb_ds, cr_ds))
    return Frame(planes, ColorFormat.YUV420)


def yuv420_to_yuv444(frame: Frame) -> Frame:
    """Expand YUV420 to full-resolution YUV444 by nearest-neighbor chroma upsampling.

    Lossless in itself, and exactly inverted by yuv444_to_yuv420.
    """
    if frame.color_format != ColorFormat.YUV420:
        raise FormatError(f"yuv420_to_yuv444 requires YUV420, got {frame.color_format.value}")
    y, u, v = frame.planes
    up = tuple(np.repeat(np.repeat(p, 2, axis=0), 2, axis=1) for p in (u, v))
    return Frame((y, up[0], up[1]), ColorFormat.YUV444)


def yuv444_to_yuv420(frame: Frame) -> Frame:
    """Subsample YUV444 chroma by 2x2 mean (round half away from zero)."""
    if frame.color_format != ColorFormat.YUV444:
        raise FormatError(f"yuv444_to_yuv420 requires YUV444, got {frame.color_format.value}")
    if frame.width % 2 or frame.height % 2:
        raise ArgumentError(
            f"yuv444_to_yuv420 requires even dimensions, got {frame.width}x{frame.height}"
        )
    y, u, v = frame.planes
    h, w = y.shape
    down = tuple(
        _clamp_u8(round_half_away(p.astype(np.float64).reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))))
        for p in (u, v)
    )
    return Frame((y, down[0], down[1]), ColorFormat.YUV420)


def yuv420_to_rgb(frame: Frame) -> Frame:
    """Convert YUV420 back to RGB444 with nearest-neighbor chroma upsampling."""
    if frame.color_format != ColorFormat.YUV420:
        raise FormatError(f"yuv420_to_rgb requires YUV420, got {frame.color_format.value}")
    y = frame.planes[0].astype(np.float64)
    cb = np.repeat(np.repeat(frame.planes[1].astype(np.float64), 2, axis=0), 2, axis=1)
    cr = np.repeat(np.repeat(frame.planes[2].astype(np.float64), 2, axis=0), 2, axis=1)
    r = y + (cr - 128.0) / _CR_SCALE
    b = y + (cb - 128.0) / _CB_SCALE
    g = (y - _KR * r - _KB * b) / _KG
    planes = tuple(_clamp_u8(round_half_away(p)) for p in (r, g, b))
    return Frame(planes, ColorFormat.RGB444)
