"""The two processing flows under comparison, QP sweeps, and curve reports.

The PROPOSED flow reduces contrast, halves the frame size, codes, then
restores the original size; the ANCHOR flow is identical minus the
contrast stage. Both flows run natively in YUV420: RGB sources are
converted once at ingest and that ingest is "the original" for metrics,
so at scale 1 and unit quantizer step the codec is the only loss source.
Contrast reduction operates on a YUV444 expansion whose chroma round
trip is exact, which keeps the alpha = 0 case bit-transparent: the two
flows then produce byte-identical bitstreams.

PSNR is always measured against the unmodified original, so the proposed
flow's fidelity penalty stays visible.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import dataio
from .codec import CodecKind, encode_builtin, decode_builtin, encode_external, measure_bitrate
from .detmetrics import (
    RDCurve,
    RDPoint,
    bd_rate,
    evaluate_detections,
    filter_by_confidence,
)
from .errors import DataIOError, FormatError, InsufficientPointsError
from .imagecore import (
    ColorFormat,
    ContrastParams,
    Frame,
    VideoSequence,
    bicubic_resize,
    contrast_reduce,
    rgb_to_yuv420,
    round_half_away,
    sequence_psnr,
    yuv420_to_rgb,
    yuv420_to_yuv444,
    yuv444_to_yuv420,
)

__all__ = [
    "PipelineKind",
    "even_dim",
    "reduce_contrast_yuv420",
    "resize_yuv420",
    "RunRecord",
    "CurveReport",
    "run_proposed",
    "run_anchor",
    "rd_sweep",
    "compare_curves",
]


class PipelineKind(Enum):
    PROPOSED = "proposed"
    ANCHOR = "anchor"


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one (flow, qp) run."""

    kind: PipelineKind
    qp: int
    bitrate_kbps: float
    psnr_db: float
    decoded: VideoSequence
    seconds: float
    coded_bytes: int
    bitstream_data: bytes | None = None


@dataclass(frozen=True)
class CurveReport:
    csv_path: Path
    svg_path: Path
    figure_path: Path
    per_curve_csv: dict[str, Path]
    bd_rate_percent: float | None
    notice: str | None


def even_dim(value: float) -> int:
    return max(2, int(2 * round_half_away(value / 2.0)))


def _ingest(seq: VideoSequence) -> VideoSequence:
    """Bring a source into the YUV420 working domain; this is the metric reference."""
    if seq.color_format == ColorFormat.YUV420:
        return seq
    if seq.color_format == ColorFormat.RGB444:
        if seq.width % 2 or seq.height % 2:
            raise FormatError(
                f"pipeline requires even frame dimensions, got {seq.width}x{seq.height}"
            )
        return VideoSequence([rgb_to_yuv420(f) for f in seq.frames], fps=seq.fps)
    raise FormatError(f"pipeline sources must be RGB444 or YUV420, got {seq.color_format.value}")


def reduce_contrast_yuv420(frame: Frame, params: ContrastParams) -> Frame:
    # full-resolution 3-plane space; the chroma round trip is exact, so
    # alpha = 0 leaves the frame bit-identical
    return yuv444_to_yuv420(contrast_reduce(yuv420_to_yuv444(frame), params))


def resize_yuv420(frame: Frame, luma_w: int, luma_h: int) -> Frame:
    y, u, v = (
        Frame((p,), ColorFormat.GRAY) for p in frame.planes
    )
    planes = (
        bicubic_resize(y, luma_w, luma_h).planes[0],
        bicubic_resize(u, luma_w // 2, luma_h // 2).planes[0],
        bicubic_resize(v, luma_w // 2, luma_h // 2).planes[0],
    )
    return Frame(planes, ColorFormat.YUV420)


def _run(
    seq: VideoSequence,
    config: dataio.ExperimentConfig,
    qp: int,
    kind: PipelineKind,
    workdir: Path | None = None,
) -> RunRecord:
    start = time.monotonic()
    original = _ingest(seq)
    frames = original.frames
    if kind == PipelineKind.PROPOSED:
        params = ContrastParams(config.alpha)
        frames = [reduce_contrast_yuv420(f, params) for f in frames]

    down_w = even_dim(original.width * config.scale)
    down_h = even_dim(original.height * config.scale)
    if (down_w, down_h) != (original.width, original.height):
        frames = [resize_yuv420(f, down_w, down_h) for f in frames]

    yuv = VideoSequence(list(frames), fps=original.fps)
    bitstream_data = None
    if config.codec.kind == CodecKind.BUILTIN:
        bs = encode_builtin(yuv, qp)
        decoded_yuv = decode_builtin(bs, fps=original.fps)
        coded_bytes = len(bs.data)
        bitstream_data = bs.data
    else:
        if workdir is None:
            workdir = config.output_dir / "work" / kind.value / f"qp{qp:02d}"
        _, decoded_yuv, stats = encode_external(yuv, config.codec.external, qp, workdir)
        coded_bytes = stats.total_bits // 8

    restored = decoded_yuv.frames
    if (down_w, down_h) != (original.width, original.height):
        restored = [resize_yuv420(f, original.width, original.height) for f in restored]
    decoded = VideoSequence(list(restored), fps=original.fps)

    return RunRecord(
        kind=kind,
        qp=qp,
        bitrate_kbps=measure_bitrate(coded_bytes, len(original.frames), original.fps),
        psnr_db=sequence_psnr(original, decoded),
        decoded=decoded,
        seconds=time.monotonic() - start,
        coded_bytes=coded_bytes,
        bitstream_data=bitstream_data,
    )


def run_proposed(seq: VideoSequence, config: dataio.ExperimentConfig, qp: int) -> RunRecord:
    """Contrast-reduce, downsample, code at qp, and restore the original size."""
    return _run(seq, config, qp, PipelineKind.PROPOSED)


def run_anchor(seq: VideoSequence, config: dataio.ExperimentConfig, qp: int) -> RunRecord:
    """The comparison flow: identical to the proposed one minus contrast reduction."""
    return _run(seq, config, qp, PipelineKind.ANCHOR)


def _detections_path(config: dataio.ExperimentConfig, kind: PipelineKind, qp: int) -> Path:
    return config.detections_dir / kind.value / f"qp{qp:02d}.json"


def _score_run(config, kind, qp, gts):
    path = _detections_path(config, kind, qp)
    if not path.is_file():
        raise DataIOError(f"missing detection file {path}")
    dets = dataio.load_detections(path)
    dets = filter_by_confidence(dets, config.confidence_threshold)
    per_class, overall = evaluate_detections(dets, gts, config.iou_threshold)
    return per_class, overall


def rd_sweep(
    seq: VideoSequence,
    config: dataio.ExperimentConfig,
    jobs: int = 1,
    write_frames: bool = True,
) -> tuple[RDCurve, RDCurve]:
    """Sweep both flows over their QP lists and collect rate/quality curves.

    Decoded frames for each run are written as RGB images to
    ``<output_dir>/<kind>/qp<NN>/`` so an external detector can consume
    them. When ``detections_dir`` is set, per-run detection files are
    scored against the configured annotations; otherwise points carry
    rate and PSNR only. Runs are independent; ``jobs`` > 1 executes them
    in a thread pool with order-deterministic aggregation.

    Points are sorted by bitrate; should two QPs code to the same size
    (degenerate content), only the lowest-QP point is kept so the curve
    stays strictly ordered.
    """
    tasks = [(PipelineKind.PROPOSED, qp) for qp in config.qp_list_proposed]
    tasks += [(PipelineKind.ANCHOR, qp) for qp in config.qp_list_anchor]

    def execute(task):
        kind, qp = task
        return task, _run(seq, config, qp, kind)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(execute, tasks))
    else:
        results = dict(execute(t) for t in tasks)

    gts = None
    if config.detections_dir is not None:
        gts = dataio.load_annotations(config.annotations)

    curves = []
    for kind, qps in (
        (PipelineKind.PROPOSED, config.qp_list_proposed),
        (PipelineKind.ANCHOR, config.qp_list_anchor),
    ):
        points = []
        for qp in qps:
            record = results[(kind, qp)]
            if write_frames:
                run_dir = config.output_dir / kind.value / f"qp{qp:02d}"
                rgb = VideoSequence(
                    [yuv420_to_rgb(f) for f in record.decoded.frames], fps=record.decoded.fps
                )
                dataio.write_image_dir(rgb, run_dir)
            overall = None
            per_class = {}
            if gts is not None:
                per_class, overall = _score_run(config, kind, qp, gts)
            points.append(
                RDPoint(
                    qp=qp,
                    bitrate_kbps=record.bitrate_kbps,
                    map=overall,
                    per_class_ap=per_class,
                    psnr_db=record.psnr_db,
                )
            )
        points.sort(key=lambda p: (p.bitrate_kbps, p.qp))
        deduped = [
            p for i, p in enumerate(points)
            if i == 0 or p.bitrate_kbps != points[i - 1].bitrate_kbps
        ]
        curves.append(RDCurve(kind.value, tuple(deduped)))
    return curves[0], curves[1]


def compare_curves(
    proposed: RDCurve,
    anchor: RDCurve,
    output_dir: str | Path,
    basename: str = "rd_curves",
) -> CurveReport:
    """Write CSV, SVG, and a rendered figure; add BD-rate when curves support it."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = output_dir / f"{basename}.csv"
    svg_path = output_dir / f"{basename}.svg"
    figure_path = output_dir / f"{basename}.png"
    curves = [proposed, anchor]
    dataio.write_rd_csv(curves, csv_path)
    dataio.write_svg_plot(curves, svg_path)
    from .report import render_rd_figure

    render_rd_figure(curves, figure_path)
    per_curve = {}
    for curve in curves:
        path = output_dir / f"{basename}_{curve.label}.csv"
        dataio.write_rd_csv([curve], path)
        per_curve[curve.label] = path

    bd = None
    notice = None
    has_map = all(p.map is not None for p in proposed.points) and all(
        p.map is not None for p in anchor.points
    )
    if not has_map:
        notice = "BD-rate skipped: curves carry no mAP values"
    elif len(proposed.points) < 4 or len(anchor.points) < 4:
        notice = "BD-rate skipped: curves need at least 4 points"
    else:
        try:
            bd = bd_rate(anchor, proposed)
        except InsufficientPointsError as exc:
            notice = f"BD-rate skipped: {exc}"
    return CurveReport(
        csv_path=csv_path,
        svg_path=svg_path,
        figure_path=figure_path,
        per_curve_csv=per_curve,
        bd_rate_percent=bd,
        notice=notice,
    )
