"""File formats: sequence sources, annotation/detection JSON, experiment config, reports.

All readers reject rather than guess: malformed input raises a typed
error, never a partially loaded value. The JSON schemas, the raw YUV420
layout, the CSV column order, and the SVG emission are frozen public
contracts shared with external tools.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .codec import CodecConfig, CodecKind, ExternalCodecSpec
from .detmetrics import Box, Detection, GroundTruthBox, RDCurve, RDPoint
from .errors import (
    ArgumentError,
    ConfigError,
    DataIOError,
    FormatError,
    InvalidBoxError,
    MalformedJsonError,
    MissingKeyError,
    SchemaError,
)
from .imagecore import ColorFormat, Frame, VideoSequence
from .yuvio import read_yuv420, write_yuv420  # noqa: F401  (public surface)

__all__ = [
    "SourceKind",
    "SequenceSource",
    "ExperimentConfig",
    "read_yuv420",
    "write_yuv420",
    "read_image_dir",
    "write_image_dir",
    "load_sequence",
    "load_annotations",
    "load_detections",
    "write_annotations",
    "write_detections",
    "load_config",
    "write_rd_csv",
    "read_rd_csv",
    "write_svg_plot",
]

_IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}


class SourceKind(Enum):
    YUV420_FILE = "yuv420"
    IMAGE_DIR = "image_dir"


@dataclass(frozen=True)
class SequenceSource:
    """Where frames come from: a raw YUV420 file or a directory of images."""

    kind: SourceKind
    path: Path
    width: int | None = None
    height: int | None = None
    fps: float = 30.0
    frame_limit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        if self.fps <= 0:
            raise ConfigError(f"fps must be positive, got {self.fps}")
        if self.kind == SourceKind.YUV420_FILE:
            if self.width is None or self.height is None:
                raise ConfigError("YUV420 sources require width and height")
            if self.width % 2 or self.height % 2:
                raise ConfigError(
                    f"YUV420 dimensions must be even, got {self.width}x{self.height}"
                )
        if self.frame_limit is not None and self.frame_limit < 1:
            raise ConfigError(f"frame_limit must be at least 1, got {self.frame_limit}")


def load_sequence(source: SequenceSource) -> VideoSequence:
    if source.kind == SourceKind.YUV420_FILE:
        return read_yuv420(
            source.path, source.width, source.height, source.fps, source.frame_limit
        )
    seq = read_image_dir(source.path, fps=source.fps)
    if source.frame_limit is not None and len(seq.frames) > source.frame_limit:
        seq = VideoSequence(seq.frames[: source.frame_limit], fps=seq.fps)
    return seq


def read_image_dir(path: str | Path, fps: float = 30.0) -> VideoSequence:
    """Read a directory of equal-size RGB images, ordered by filename."""
    path = Path(path)
    if not path.is_dir():
        raise DataIOError(f"{path} is not a directory")
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in _IMAGE_EXTENSIONS)
    if not files:
        raise DataIOError(f"{path} contains no image files")
    frames = []
    dims = None
    for file in files:
        try:
            with Image.open(file) as img:
                rgb = np.asarray(img.convert("RGB"))
        except (UnidentifiedImageError, OSError) as exc:
            raise DataIOError(f"cannot read image {file}: {exc}") from exc
        if dims is None:
            dims = rgb.shape[:2]
        elif rgb.shape[:2] != dims:
            raise DataIOError(
                f"{file} is {rgb.shape[1]}x{rgb.shape[0]} but earlier frames are "
                f"{dims[1]}x{dims[0]}"
            )
        frames.append(
            Frame((rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]), ColorFormat.RGB444)
        )
    return VideoSequence(frames, fps=fps)


def write_image_dir(seq: VideoSequence, path: str | Path) -> list[Path]:
    """Write an RGB sequence as numbered PNG files; read back is lossless."""
    if seq.color_format != ColorFormat.RGB444:
        raise FormatError(f"write_image_dir requires RGB444 frames, got {seq.color_format.value}")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for i, frame in enumerate(seq.frames):
        rgb = np.stack([frame.planes[0], frame.planes[1], frame.planes[2]], axis=-1)
        out = path / f"frame_{i:06d}.png"
        Image.fromarray(rgb, mode="RGB").save(out)
        written.append(out)
    return written


# --- annotation / detection JSON -------------------------------------------
#
# {"frames": [{"frame_id": 0, "objects": [
#     {"class_id": 1, "bbox": [x, y, w, h], "score": 0.9}  # score only in detections
# ]}]}


def _require_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{what} must be an integer, got {value!r}")
    return value


def _require_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what} must be a number, got {value!r}")
    return float(value)


def _parse_objects_file(path: str | Path, with_scores: bool):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    if "frames" not in doc:
        raise MissingKeyError(f"{path}: missing 'frames' key")
    frames = doc["frames"]
    if not isinstance(frames, list):
        raise SchemaError(f"{path}: 'frames' must be a list")
    out = []
    for fi, entry in enumerate(frames):
        where = f"{path}: frames[{fi}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where} must be an object")
        if "frame_id" not in entry:
            raise MissingKeyError(f"{where}: missing 'frame_id'")
        frame_id = _require_int(entry["frame_id"], f"{where}.frame_id")
        if "objects" not in entry:
            raise MissingKeyError(f"{where}: missing 'objects'")
        objects = entry["objects"]
        if not isinstance(objects, list):
            raise SchemaError(f"{where}.objects must be a list")
        for oi, obj in enumerate(objects):
            ref = f"{where}.objects[{oi}]"
            if not isinstance(obj, dict):
                raise SchemaError(f"{ref} must be an object")
            if "class_id" not in obj:
                raise MissingKeyError(f"{ref}: missing 'class_id'")
            class_id = _require_int(obj["class_id"], f"{ref}.class_id")
            if "bbox" not in obj:
                raise MissingKeyError(f"{ref}: missing 'bbox'")
            bbox = obj["bbox"]
            if not isinstance(bbox, list) or len(bbox) != 4:
                raise SchemaError(f"{ref}.bbox must be a list of four numbers")
            x, y, w, h = (_require_number(v, f"{ref}.bbox") for v in bbox)
            if w <= 0 or h <= 0:
                raise InvalidBoxError(f"{ref}: bbox extents must be positive, got {w}x{h}")
            if with_scores:
                if "score" not in obj:
                    raise MissingKeyError(f"{ref}: missing 'score'")
                score = _require_number(obj["score"], f"{ref}.score")
                if not 0.0 <= score <= 1.0:
                    raise SchemaError(f"{ref}.score must be in [0, 1], got {score}")
                out.append(Detection(frame_id, class_id, Box(x, y, w, h), score))
            else:
                if "score" in obj:
                    raise SchemaError(f"{ref}: ground truth must not carry scores")
                out.append(GroundTruthBox(frame_id, class_id, Box(x, y, w, h)))
    return out


def load_annotations(path: str | Path) -> list[GroundTruthBox]:
    """Load a ground-truth JSON file (objects without scores)."""
    return _parse_objects_file(path, with_scores=False)


def load_detections(path: str | Path) -> list[Detection]:
    """Load a detections JSON file (every object carries a score)."""
    return _parse_objects_file(path, with_scores=True)


def _objects_doc(items, with_scores: bool) -> dict:
    by_frame: dict[int, list] = {}
    for item in items:
        obj = {
            "class_id": item.class_id,
            "bbox": [item.box.x, item.box.y, item.box.w, item.box.h],
        }
        if with_scores:
            obj["score"] = item.score
        by_frame.setdefault(item.frame_id, []).append(obj)
    return {
        "frames": [
            {"frame_id": fid, "objects": by_frame[fid]} for fid in sorted(by_frame)
        ]
    }


def write_annotations(gts: Sequence[GroundTruthBox], path: str | Path) -> None:
    Path(path).write_text(json.dumps(_objects_doc(gts, False), indent=2) + "\n")


def write_detections(dets: Sequence[Detection], path: str | Path) -> None:
    Path(path).write_text(json.dumps(_objects_doc(dets, True), indent=2) + "\n")


# --- experiment configuration ----------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment description with protocol defaults baked in."""

    source: SequenceSource
    annotations: Path
    output_dir: Path
    alpha: float = 0.25
    scale: float = 0.5
    qp_list_proposed: tuple[int, ...] = tuple(range(32, 46))
    qp_list_anchor: tuple[int, ...] = tuple(range(35, 48))
    codec: CodecConfig = field(default_factory=CodecConfig)
    confidence_threshold: float = 0.25
    iou_threshold: float = 0.5
    detections_dir: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "annotations", Path(self.annotations))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.detections_dir is not None:
            object.__setattr__(self, "detections_dir", Path(self.detections_dir))
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.scale <= 1.0:
            raise ConfigError(f"scale must be in (0, 1], got {self.scale}")
        for name in ("qp_list_proposed", "qp_list_anchor"):
            qps = getattr(self, name)
            object.__setattr__(self, name, tuple(qps))
            qps = getattr(self, name)
            if not qps:
                raise ConfigError(f"{name} must not be empty")
            for qp in qps:
                if isinstance(qp, bool) or not isinstance(qp, int) or not 0 <= qp <= 63:
                    raise ConfigError(f"{name} entries must be integers in [0, 63], got {qp!r}")
        for name in ("confidence_threshold", "iou_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _parse_source(obj) -> SequenceSource:
    if not isinstance(obj, dict):
        raise ConfigError("'source' must be an object")
    _check_keys(obj, {"kind", "path", "width", "height", "fps", "frame_limit"}, "source")
    for key in ("kind", "path"):
        if key not in obj:
            raise ConfigError(f"source: missing '{key}'")
    try:
        kind = SourceKind(obj["kind"])
    except ValueError:
        raise ConfigError(f"source.kind must be one of "
                          f"{[k.value for k in SourceKind]}, got {obj['kind']!r}") from None
    kwargs: dict = {"kind": kind, "path": obj["path"]}
    for key in ("width", "height", "frame_limit"):
        if key in obj:
            if isinstance(obj[key], bool) or not isinstance(obj[key], int):
                raise ConfigError(f"source.{key} must be an integer")
            kwargs[key] = obj[key]
    if "fps" in obj:
        if isinstance(obj["fps"], bool) or not isinstance(obj["fps"], (int, float)):
            raise ConfigError("source.fps must be a number")
        kwargs["fps"] = float(obj["fps"])
    return SequenceSource(**kwargs)


def _parse_codec(obj) -> CodecConfig:
    if not isinstance(obj, dict):
        raise ConfigError("'codec' must be an object")
    _check_keys(obj, {"kind", "qp", "encode_template", "decode_template", "timeout"}, "codec")
    kind_name = obj.get("kind", "builtin")
    try:
        kind = CodecKind(kind_name)
    except ValueError:
        raise ConfigError(f"codec.kind must be 'builtin' or 'external', got {kind_name!r}") from None
    qp = obj.get("qp", 32)
    if isinstance(qp, bool) or not isinstance(qp, int):
        raise ConfigError("codec.qp must be an integer")
    external = None
    if kind == CodecKind.EXTERNAL:
        for key in ("encode_template", "decode_template"):
            if key not in obj:
                raise ConfigError(f"codec: external codec requires '{key}'")
            if not isinstance(obj[key], str):
                raise ConfigError(f"codec.{key} must be a string")
        external = ExternalCodecSpec(
            encode_template=obj["encode_template"],
            decode_template=obj["decode_template"],
            timeout=float(obj.get("timeout", 600.0)),
        )
    elif "encode_template" in obj or "decode_template" in obj:
        raise ConfigError("codec: templates are only valid with kind 'external'")
    return CodecConfig(kind=kind, qp=qp, external=external)


_CONFIG_KEYS = {
    "source",
    "annotations",
    "output_dir",
    "alpha",
    "scale",
    "qp_list_proposed",
    "qp_list_anchor",
    "codec",
    "confidence_threshold",
    "iou_threshold",
    "detections_dir",
}


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse an experiment config; unknown keys and bad types are rejected."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    _check_keys(doc, _CONFIG_KEYS, str(path))
    for key in ("source", "annotations", "output_dir"):
        if key not in doc:
            raise ConfigError(f"{path}: missing required key '{key}'")
    kwargs: dict = {
        "source": _parse_source(doc["source"]),
        "annotations": doc["annotations"],
        "output_dir": doc["output_dir"],
    }
    for key in ("alpha", "scale", "confidence_threshold", "iou_threshold"):
        if key in doc:
            value = doc[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{path}: '{key}' must be a number")
            kwargs[key] = float(value)
    for key in ("qp_list_proposed", "qp_list_anchor"):
        if key in doc:
            value = doc[key]
            if not isinstance(value, list):
                raise ConfigError(f"{path}: '{key}' must be a list of integers")
            kwargs[key] = tuple(value)
    if "codec" in doc:
        kwargs["codec"] = _parse_codec(doc["codec"])
    if "detections_dir" in doc:
        kwargs["detections_dir"] = doc["detections_dir"]
    return ExperimentConfig(**kwargs)


# --- rate-distortion reports ------------------------------------------------


def _curve_classes(curves: Sequence[RDCurve]) -> list[int]:
    classes: set[int] = set()
    for curve in curves:
        for point in curve.points:
            classes.update(point.per_class_ap)
    return sorted(classes)


def _format_number(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_rd_csv(curves: Sequence[RDCurve], path: str | Path) -> None:
    """Emit curves as CSV with columns label,qp,bitrate_kbps,map,ap_<class>..."""
    if not curves:
        raise ArgumentError("need at least one curve")
    classes = _curve_classes(curves)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label", "qp", "bitrate_kbps", "map"] + [f"ap_{c}" for c in classes])
    for curve in curves:
        for point in curve.points:
            row = [
                curve.label,
                str(point.qp),
                _format_number(point.bitrate_kbps),
                _format_number(point.map),
            ]
            row += [_format_number(point.per_class_ap.get(c)) for c in classes]
            writer.writerow(row)
    Path(path).write_text(buffer.getvalue())


def read_rd_csv(path: str | Path) -> list[RDCurve]:
    """Parse curves back from the CSV contract; one curve per label."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataIOError(f"{path}: empty CSV") from None
    if header[:4] != ["label", "qp", "bitrate_kbps", "map"]:
        raise DataIOError(f"{path}: unexpected CSV columns {header[:4]}")
    ap_classes = []
    for column in header[4:]:
        if not column.startswith("ap_"):
            raise DataIOError(f"{path}: unexpected CSV column {column!r}")
        ap_classes.append(int(column[3:]))
    order: list[str] = []
    grouped: dict[str, list[RDPoint]] = {}
    for row in reader:
        if not row:
            continue
        label = row[0]
        per_class = {
            cls: float(cell)
            for cls, cell in zip(ap_classes, row[4:])
            if cell != ""
        }
        point = RDPoint(
            qp=int(row[1]),
            bitrate_kbps=float(row[2]),
            map=float(row[3]) if row[3] != "" else None,
            per_class_ap=per_class,
        )
        if label not in grouped:
            order.append(label)
            grouped[label] = []
        grouped[label].append(point)
    if not order:
        raise DataIOError(f"{path}: CSV contains no data rows")
    return [RDCurve(label, tuple(grouped[label])) for label in order]


_SVG_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_SVG_W, _SVG_H = 800, 560
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 80, 170, 30, 70


def curve_quality(curve: RDCurve) -> tuple[np.ndarray, str]:
    """Pick the quality axis a curve carries: mAP when present, else PSNR."""
    if all(p.map is not None for p in curve.points):
        return curve.maps(), "mAP"
    if all(p.psnr_db is not None for p in curve.points):
        return curve.psnrs(), "PSNR [dB]"
    raise ArgumentError(f"curve '{curve.label}' carries no complete quality values")


def write_svg_plot(
    curves: Sequence[RDCurve],
    path: str | Path,
    x_label: str = "bitrate [kbps]",
    y_label: str | None = None,
) -> None:
    """Render curves as a deterministic SVG: one polyline per curve plus axis ticks."""
    if not curves:
        raise ArgumentError("need at least one curve")
    series = []
    inferred = None
    for curve in curves:
        ys, kind = curve_quality(curve)
        if inferred is None:
            inferred = kind
        series.append((curve.label, curve.bitrates(), ys))
    if y_label is None:
        y_label = inferred

    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2] for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    x_pad = 0.05 * (x_hi - x_lo)
    y_pad = 0.05 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    plot_w = _SVG_W - _MARGIN_L - _MARGIN_R
    plot_h = _SVG_H - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black"/>',
    ]
    n_ticks = 6
    for i in range(n_ticks):
        xv = x_lo + (x_hi - x_lo) * i / (n_ticks - 1)
        xp = px(xv)
        ytop = _MARGIN_T + plot_h
        lines.append(f'<line x1="{xp:.2f}" y1="{ytop}" x2="{xp:.2f}" y2="{ytop + 6}" stroke="black"/>')
        lines.append(
            f'<text x="{xp:.2f}" y="{ytop + 22}" font-family="sans-serif" font-size="12" '
            f'text-anchor="middle">{xv:.4g}</text>'
        )
        yv = y_lo + (y_hi - y_lo) * i / (n_ticks - 1)
        yp = py(yv)
        lines.append(f'<line x1="{_MARGIN_L - 6}" y1="{yp:.2f}" x2="{_MARGIN_L}" y2="{yp:.2f}" stroke="black"/>')
        lines.append(
            f'<text x="{_MARGIN_L - 10}" y="{yp + 4:.2f}" font-family="sans-serif" font-size="12" '
            f'text-anchor="end">{yv:.4g}</text>'
        )
    lines.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_SVG_H - 20}" font-family="sans-serif" '
        f'font-size="14" text-anchor="middle">{x_label}</text>'
    )
    lines.append(
        f'<text x="24" y="{_MARGIN_T + plot_h / 2:.2f}" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 24 {_MARGIN_T + plot_h / 2:.2f})">{y_label}</text>'
    )
    for idx, (label, rates, quality) in enumerate(series):
        color = _SVG_PALETTE[idx % len(_SVG_PALETTE)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(rates, quality))
        lines.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>'
        )
        for x, y in zip(rates, quality):
            lines.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>'
            )
        ly = _MARGIN_T + 16 + idx * 20
        lx = _SVG_W - _MARGIN_R + 14
        lines.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        lines.append(
            f'<text x="{lx + 30}" y="{ly}" font-family="sans-serif" font-size="13">{label}</text>'
        )
    lines.append("</svg>")
    Path(path).write_bytes("\n".join(lines).encode("utf-8") + b"\n")
