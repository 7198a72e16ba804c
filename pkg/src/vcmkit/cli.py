"""Command-line surface: preprocessing, coding, metrics, and the full experiment.

Exit codes: 0 on success, 1 on domain errors (I/O, formats, codec
failures), 2 on usage errors. Structured results go to stdout as JSON or
CSV; every error prints a single line starting with ``error:`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, dataio
from .codec import (
    Bitstream,
    decode_builtin,
    encode_builtin,
    measure_bitrate,
    run_decode_template,
    run_encode_template,
)
from .detmetrics import bd_rate, evaluate_detections, filter_by_confidence
from .errors import CodecTemplateError, DataIOError, VcmkitError
from .imagecore import (
    ColorFormat,
    ContrastParams,
    VideoSequence,
    bicubic_resize,
    contrast_reduce,
    rgb_to_yuv420,
    round_half_away,
    shannon_entropy,
    yuv420_to_rgb,
)
from .pipeline import compare_curves, even_dim, rd_sweep, reduce_contrast_yuv420, resize_yuv420
from .report import render_rd_figure


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as a single stderr line."""

    def error(self, message):
        self.exit(2, f"error: usage: {message}\n")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _read_video(args, parser: argparse.ArgumentParser, path: str) -> VideoSequence:
    p = Path(path)
    if p.is_dir():
        return dataio.read_image_dir(p, fps=args.fps)
    if p.suffix.lower() == ".yuv":
        if args.width is None or args.height is None:
            parser.error(f"{p} is raw YUV; --width and --height are required")
        return dataio.read_yuv420(p, args.width, args.height, args.fps)
    raise DataIOError(f"cannot read {p}: not a directory or .yuv file")


def _write_video(seq: VideoSequence, path: str) -> None:
    p = Path(path)
    if p.suffix.lower() == ".yuv":
        if seq.color_format == ColorFormat.RGB444:
            seq = VideoSequence([rgb_to_yuv420(f) for f in seq.frames], fps=seq.fps)
        dataio.write_yuv420(seq, p)
    else:
        if seq.color_format == ColorFormat.YUV420:
            seq = VideoSequence([yuv420_to_rgb(f) for f in seq.frames], fps=seq.fps)
        dataio.write_image_dir(seq, p)


def _check_unit(parser, name: str, value: float, low_open: bool = False) -> None:
    ok = 0.0 < value <= 1.0 if low_open else 0.0 <= value <= 1.0
    if not ok:
        span = "(0, 1]" if low_open else "[0, 1]"
        parser.error(f"--{name} must be in {span}, got {value}")


def _check_qp(parser, qp: int) -> None:
    if not 0 <= qp <= 63:
        parser.error(f"--qp must be in [0, 63], got {qp}")


def _cmd_preprocess(args, parser) -> int:
    _check_unit(parser, "alpha", args.alpha)
    _check_unit(parser, "scale", args.scale, low_open=True)
    seq = _read_video(args, parser, getattr(args, "in"))
    params = ContrastParams(args.alpha)
    to_yuv = Path(args.out).suffix.lower() == ".yuv"
    if seq.color_format == ColorFormat.RGB444:
        frames = [contrast_reduce(f, params) for f in seq.frames]
        if to_yuv:
            out_w, out_h = even_dim(seq.width * args.scale), even_dim(seq.height * args.scale)
        else:
            out_w = max(1, int(round_half_away(seq.width * args.scale)))
            out_h = max(1, int(round_half_away(seq.height * args.scale)))
        if (out_w, out_h) != (seq.width, seq.height):
            frames = [bicubic_resize(f, out_w, out_h) for f in frames]
    else:
        frames = [reduce_contrast_yuv420(f, params) for f in seq.frames]
        out_w, out_h = even_dim(seq.width * args.scale), even_dim(seq.height * args.scale)
        if (out_w, out_h) != (seq.width, seq.height):
            frames = [resize_yuv420(f, out_w, out_h) for f in frames]
    result = VideoSequence(frames, fps=seq.fps)
    _write_video(result, args.out)
    _emit({"frames": len(result.frames), "width": out_w, "height": out_h, "out": args.out})
    return 0


def _external_spec(args, parser):
    if args.cfg is None:
        parser.error("--codec external requires --cfg with command templates")
    try:
        doc = json.loads(Path(args.cfg).read_text())
    except json.JSONDecodeError as exc:
        raise DataIOError(f"{args.cfg}: not valid JSON: {exc}") from exc
    from .codec import ExternalCodecSpec

    for key in ("encode_template", "decode_template"):
        if key not in doc:
            raise CodecTemplateError(f"{args.cfg}: missing '{key}'")
    return ExternalCodecSpec(
        encode_template=doc["encode_template"],
        decode_template=doc["decode_template"],
        timeout=float(doc.get("timeout", 600.0)),
    )


def _cmd_encode(args, parser) -> int:
    _check_qp(parser, args.qp)
    seq = _read_video(args, parser, getattr(args, "in"))
    if seq.color_format == ColorFormat.RGB444:
        seq = VideoSequence([rgb_to_yuv420(f) for f in seq.frames], fps=seq.fps)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.codec == "builtin":
        bs = encode_builtin(seq, args.qp)
        out.write_bytes(bs.data)
        total_bits = len(bs.data) * 8
    else:
        spec = _external_spec(args, parser)
        input_yuv = out.with_suffix(out.suffix + ".input.yuv")
        dataio.write_yuv420(seq, input_yuv)
        run_encode_template(
            spec, input_yuv, out, args.qp, seq.width, seq.height, len(seq.frames), seq.fps,
            workdir=out.parent,
        )
        if not out.is_file():
            raise DataIOError(f"external encoder produced no output at {out}")
        total_bits = out.stat().st_size * 8
    _emit(
        {
            "out": str(out),
            "frames": len(seq.frames),
            "total_bits": total_bits,
            "bitrate_kbps": measure_bitrate(total_bits // 8, len(seq.frames), seq.fps),
        }
    )
    return 0


def _cmd_decode(args, parser) -> int:
    src = Path(getattr(args, "in"))
    if args.codec == "builtin":
        data = src.read_bytes()
        seq = decode_builtin(Bitstream.from_bytes(data), fps=args.fps)
        total_bits = len(data) * 8
    else:
        spec = _external_spec(args, parser)
        if args.width is None or args.height is None:
            parser.error("--codec external decode requires --width and --height")
        decoded_yuv = Path(args.out).with_suffix(".decoded.yuv")
        run_decode_template(
            spec, src, decoded_yuv, workdir=src.parent,
            width=args.width, height=args.height, fps=args.fps,
        )
        seq = dataio.read_yuv420(decoded_yuv, args.width, args.height, args.fps)
        total_bits = src.stat().st_size * 8
    _write_video(seq, args.out)
    _emit(
        {
            "out": args.out,
            "frames": len(seq.frames),
            "width": seq.width,
            "height": seq.height,
            "total_bits": total_bits,
            "bitrate_kbps": measure_bitrate(total_bits // 8, len(seq.frames), args.fps),
        }
    )
    return 0


def _cmd_entropy(args, parser) -> int:
    seq = _read_video(args, parser, getattr(args, "in"))
    per_frame = [shannon_entropy(f) for f in seq.frames]
    _emit({"per_frame": per_frame, "mean": sum(per_frame) / len(per_frame)})
    return 0


def _cmd_eval_ap(args, parser) -> int:
    _check_unit(parser, "iou", args.iou)
    _check_unit(parser, "conf", args.conf)
    gts = dataio.load_annotations(args.gt)
    dets = filter_by_confidence(dataio.load_detections(args.det), args.conf)
    per_class, overall = evaluate_detections(dets, gts, args.iou)
    _emit({"per_class_ap": {str(k): v for k, v in per_class.items()}, "map": overall})
    return 0


def _cmd_rd_sweep(args, parser) -> int:
    config = dataio.load_config(args.config)
    seq = dataio.load_sequence(config.source)
    print(
        f"sweeping {len(config.qp_list_proposed)} proposed + "
        f"{len(config.qp_list_anchor)} anchor runs on {seq.width}x{seq.height}"
        f"x{len(seq.frames)}",
        file=sys.stderr,
    )
    proposed, anchor = rd_sweep(seq, config, jobs=args.jobs)
    report = compare_curves(proposed, anchor, config.output_dir)
    if report.notice:
        print(f"notice: {report.notice}", file=sys.stderr)
    _emit(
        {
            "csv": str(report.csv_path),
            "svg": str(report.svg_path),
            "figure": str(report.figure_path),
            "bd_rate_percent": report.bd_rate_percent,
            "notice": report.notice,
            "proposed_points": len(proposed.points),
            "anchor_points": len(anchor.points),
        }
    )
    return 0


def _single_curve(path: str):
    curves = dataio.read_rd_csv(path)
    if len(curves) != 1:
        raise DataIOError(f"{path}: expected exactly one curve, found {len(curves)}")
    return curves[0]


def _cmd_bd_rate(args, parser) -> int:
    anchor = _single_curve(args.anchor_csv)
    test = _single_curve(args.test_csv)
    value = bd_rate(anchor, test)
    print(f"{value:+.4f}%")
    return 0


def _cmd_plot(args, parser) -> int:
    curves = dataio.read_rd_csv(args.csv)
    dataio.write_svg_plot(curves, args.svg)
    out = {"svg": args.svg}
    if args.png:
        render_rd_figure(curves, args.png)
        out["png"] = args.png
    _emit(out)
    return 0


def _add_video_input_flags(sub) -> None:
    sub.add_argument("--width", type=int, default=None, help="frame width for raw YUV input")
    sub.add_argument("--height", type=int, default=None, help="frame height for raw YUV input")
    sub.add_argument("--fps", type=float, default=30.0, help="frames per second")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="vcmkit",
        description="Contrast-reduction video coding experiments for machine vision",
    )
    parser.add_argument("--version", action="version", version=f"vcmkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("preprocess", formatter_class=fmt,
                       help="reduce contrast and resize a video")
    p.add_argument("--in", required=True, help="input image directory or .yuv file")
    p.add_argument("--out", required=True, help="output image directory or .yuv file")
    p.add_argument("--alpha", type=float, default=0.25, help="contrast blend ratio toward the mean")
    p.add_argument("--scale", type=float, default=0.5, help="per-axis downsample factor")
    _add_video_input_flags(p)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("encode", formatter_class=fmt, help="encode a video to a bitstream")
    p.add_argument("--in", required=True, help="input image directory or .yuv file")
    p.add_argument("--out", required=True, help="output bitstream path")
    p.add_argument("--codec", choices=("builtin", "external"), default="builtin")
    p.add_argument("--qp", type=int, default=32, help="quantization parameter")
    p.add_argument("--cfg", default=None, help="external codec template JSON")
    _add_video_input_flags(p)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", formatter_class=fmt, help="decode a bitstream to video")
    p.add_argument("--in", required=True, help="input bitstream path")
    p.add_argument("--out", required=True, help="output image directory or .yuv file")
    p.add_argument("--codec", choices=("builtin", "external"), default="builtin")
    p.add_argument("--cfg", default=None, help="external codec template JSON")
    _add_video_input_flags(p)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("entropy", formatter_class=fmt,
                       help="print per-frame and mean histogram entropy")
    p.add_argument("--in", required=True, help="input image directory or .yuv file")
    _add_video_input_flags(p)
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("eval-ap", formatter_class=fmt,
                       help="score detections against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth JSON")
    p.add_argument("--det", required=True, help="detections JSON")
    p.add_argument("--iou", type=float, default=0.5, help="IoU threshold for matching")
    p.add_argument("--conf", type=float, default=0.25, help="confidence threshold")
    p.set_defaults(func=_cmd_eval_ap)

    p = sub.add_parser("rd-sweep", formatter_class=fmt,
                       help="run the full two-flow experiment from a config")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p.set_defaults(func=_cmd_rd_sweep)

    p = sub.add_parser("bd-rate", formatter_class=fmt,
                       help="Bjontegaard delta-rate between two curve CSVs")
    p.add_argument("--anchor-csv", required=True)
    p.add_argument("--test-csv", required=True)
    p.set_defaults(func=_cmd_bd_rate)

    p = sub.add_parser("plot", formatter_class=fmt, help="plot curves from a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--svg", required=True)
    p.add_argument("--png", default=None, help="also render a PNG figure")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except CodecTemplateError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except VcmkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: FileNotFoundError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
