"""Deterministic synthetic test sequences: moving shapes over textured backgrounds.

Every sequence is generated from a fixed seed, so the corpus is identical
on every machine. Shapes come with pixel-accurate ground-truth boxes
(class 0 = rectangle, class 1 = disk), which makes the sequences usable
end to end: preprocessing, coding, and detection scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detmetrics import Box, GroundTruthBox
from .imagecore import ColorFormat, Frame, VideoSequence

__all__ = ["CorpusItem", "make_sequence", "make_corpus"]


@dataclass(frozen=True)
class CorpusItem:
    name: str
    sequence: VideoSequence
    ground_truth: tuple[GroundTruthBox, ...]


def _value_noise(rng: np.random.Generator, height: int, width: int, cell: int) -> np.ndarray:
    """Smooth noise in [-1, 1]: a coarse random grid, bilinearly upsampled."""
    gh = height // cell + 2
    gw = width // cell + 2
    grid = rng.uniform(-1.0, 1.0, (gh, gw))
    ys = np.arange(height) / cell
    xs = np.arange(width) / cell
    y0 = ys.astype(np.int64)
    x0 = xs.astype(np.int64)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    tl = grid[np.ix_(y0, x0)]
    tr = grid[np.ix_(y0, x0 + 1)]
    bl = grid[np.ix_(y0 + 1, x0)]
    br = grid[np.ix_(y0 + 1, x0 + 1)]
    return tl * (1 - fy) * (1 - fx) + tr * (1 - fy) * fx + bl * fy * (1 - fx) + br * fy * fx


def _background(rng: np.random.Generator, height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    # mostly fine-grained texture: its energy sits above the Nyquist limit
    # of a half-size image, which is what the resize stage is meant to shed
    base = rng.uniform(110.0, 145.0, 3)
    coarse = _value_noise(rng, height, width, cell=max(8, min(width, height) // 6))
    fine = _value_noise(rng, height, width, cell=2)
    channels = []
    for c in range(3):
        gain = rng.uniform(0.85, 1.15)
        channels.append(base[c] + gain * (8.0 * coarse + 48.0 * fine))
    return np.clip(np.stack(channels), 0, 255), base


@dataclass
class _Shape:
    kind: int  # 0 = rectangle, 1 = disk
    color: np.ndarray
    half_w: float
    half_h: float
    cx: float
    cy: float
    vx: float
    vy: float


def _spawn_shapes(
    rng: np.random.Generator, width: int, height: int, base: np.ndarray
) -> list[_Shape]:
    shapes = []
    for _ in range(int(rng.integers(2, 4))):
        kind = int(rng.integers(0, 2))
        sign = 1.0 if rng.uniform(0, 1) < 0.5 else -1.0
        color = np.clip(base + sign * rng.uniform(28.0, 42.0, 3), 0, 255)
        scale = min(width, height)
        half = rng.uniform(0.07, 0.13, 2) * scale
        if kind == 1:
            half[1] = half[0]
        shapes.append(
            _Shape(
                kind=kind,
                color=color,
                half_w=float(half[0]),
                half_h=float(half[1]),
                cx=float(rng.uniform(0.2, 0.8) * width),
                cy=float(rng.uniform(0.2, 0.8) * height),
                vx=float(rng.uniform(-2.0, 2.0)),
                vy=float(rng.uniform(-2.0, 2.0)),
            )
        )
    return shapes


def _draw(canvas: np.ndarray, shape: _Shape) -> Box | None:
    """Paint a shape in place and return its visible bounding box, if any."""
    _, height, width = canvas.shape
    x0 = shape.cx - shape.half_w
    y0 = shape.cy - shape.half_h
    x1 = shape.cx + shape.half_w
    y1 = shape.cy + shape.half_h
    cx0, cy0 = max(0.0, x0), max(0.0, y0)
    cx1, cy1 = min(float(width), x1), min(float(height), y1)
    if cx1 - cx0 < 2.0 or cy1 - cy0 < 2.0:
        return None
    yy, xx = np.mgrid[0:height, 0:width]
    if shape.kind == 0:
        mask = (xx >= x0) & (xx < x1) & (yy >= y0) & (yy < y1)
    else:
        r = shape.half_w
        mask = (xx - shape.cx) ** 2 + (yy - shape.cy) ** 2 <= r * r
    if not mask.any():
        return None
    for c in range(3):
        canvas[c][mask] = shape.color[c]
    return Box(cx0, cy0, cx1 - cx0, cy1 - cy0)


def make_sequence(
    seed: int,
    width: int,
    height: int,
    n_frames: int,
    fps: float = 30.0,
) -> tuple[VideoSequence, list[GroundTruthBox]]:
    """Generate an RGB sequence of moving shapes with ground-truth boxes."""
    rng = np.random.default_rng(seed)
    background, base = _background(rng, height, width)
    shapes = _spawn_shapes(rng, width, height, base)
    frames = []
    gts = []
    for fid in range(n_frames):
        canvas = background.copy()
        for shape in shapes:
            box = _draw(canvas, shape)
            if box is not None:
                gts.append(GroundTruthBox(frame_id=fid, class_id=shape.kind, box=box))
            shape.cx += shape.vx
            shape.cy += shape.vy
            # bounce off the frame edges
            if shape.cx < shape.half_w * 0.5 or shape.cx > width - shape.half_w * 0.5:
                shape.vx = -shape.vx
            if shape.cy < shape.half_h * 0.5 or shape.cy > height - shape.half_h * 0.5:
                shape.vy = -shape.vy
        planes = tuple(
            np.clip(np.floor(canvas[c] + 0.5), 0, 255).astype(np.uint8) for c in range(3)
        )
        frames.append(Frame(planes, ColorFormat.RGB444))
    return VideoSequence(frames, fps=fps), gts


_CORPUS_SPEC = (
    ("calm64", 11, 64, 64, 10),
    ("wide96", 23, 96, 64, 12),
    ("busy128", 37, 128, 128, 16),
    ("tall80", 41, 80, 112, 20),
    ("mixed128", 53, 128, 96, 24),
    ("long64", 67, 64, 96, 30),
)


def make_corpus() -> list[CorpusItem]:
    """The six-sequence desk corpus used across the test suite."""
    items = []
    for name, seed, width, height, n_frames in _CORPUS_SPEC:
        seq, gts = make_sequence(seed, width, height, n_frames)
        items.append(CorpusItem(name, seq, tuple(gts)))
    return items
