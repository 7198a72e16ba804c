"""Tests for the proposed/anchor flows, QP sweeps, and curve comparison."""

import numpy as np
import pytest

from vcmkit.dataio import ExperimentConfig, SequenceSource, SourceKind, write_annotations, write_detections
from vcmkit.detmetrics import Detection, RDCurve, RDPoint
from vcmkit.errors import DataIOError, FormatError
from vcmkit.imagecore import ColorFormat, Frame, VideoSequence
from vcmkit.pipeline import compare_curves, rd_sweep, run_anchor, run_proposed
from vcmkit.synth import make_sequence


def make_config(tmp_path, **overrides) -> ExperimentConfig:
    kwargs = dict(
        source=SequenceSource(SourceKind.IMAGE_DIR, tmp_path / "frames", fps=30.0),
        annotations=tmp_path / "gt.json",
        output_dir=tmp_path / "out",
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


@pytest.fixture(scope="module")
def small_sequence():
    seq, gts = make_sequence(seed=101, width=48, height=48, n_frames=3)
    return seq, gts


class TestRunFlows:
    def test_shape_preserved(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        record = run_proposed(seq, make_config(tmp_path), qp=30)
        assert record.decoded.width == seq.width
        assert record.decoded.height == seq.height
        assert len(record.decoded.frames) == len(seq.frames)

    def test_alpha_zero_equals_anchor(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        config = make_config(tmp_path, alpha=0.0)
        for qp in (20, 36):
            proposed = run_proposed(seq, config, qp)
            anchor = run_anchor(seq, config, qp)
            assert proposed.bitstream_data == anchor.bitstream_data
            assert proposed.bitrate_kbps == anchor.bitrate_kbps
            assert proposed.psnr_db == anchor.psnr_db
            assert all(a == b for a, b in zip(proposed.decoded.frames, anchor.decoded.frames))

    def test_near_lossless_on_constant_frames(self, tmp_path):
        from vcmkit.imagecore import (
            ContrastParams,
            contrast_reduce,
            rgb_to_yuv420,
            yuv420_to_yuv444,
            yuv444_to_yuv420,
        )

        plane = np.full((16, 16), 90, np.uint8)
        seq = VideoSequence(
            [Frame((plane, plane, plane), ColorFormat.RGB444) for _ in range(2)], fps=30.0
        )
        config = make_config(tmp_path, scale=1.0)
        record = run_proposed(seq, config, qp=4)
        expected = [
            yuv444_to_yuv420(
                contrast_reduce(yuv420_to_yuv444(rgb_to_yuv420(f)), ContrastParams(0.25))
            )
            for f in seq.frames
        ]
        assert all(a == b for a, b in zip(record.decoded.frames, expected))

    def test_lossless_identity_settings(self, tmp_path):
        plane = np.full((16, 16), 90, np.uint8)
        seq = VideoSequence(
            [Frame((plane, plane, plane), ColorFormat.RGB444) for _ in range(2)], fps=30.0
        )
        config = make_config(tmp_path, scale=1.0, alpha=0.0)
        record = run_proposed(seq, config, qp=4)
        assert record.psnr_db == float("inf")

    def test_anchor_high_quality_at_unit_scale(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        record = run_anchor(seq, make_config(tmp_path, scale=1.0), qp=4)
        assert record.psnr_db >= 50.0

    def test_proposed_cheaper_at_equal_qp(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        config = make_config(tmp_path)
        assert run_proposed(seq, config, 28).coded_bytes < run_anchor(seq, config, 28).coded_bytes

    def test_odd_dims_rejected(self, tmp_path):
        planes = tuple(np.zeros((15, 16), np.uint8) for _ in range(3))
        seq = VideoSequence([Frame(planes, ColorFormat.RGB444)], fps=30.0)
        with pytest.raises(FormatError):
            run_anchor(seq, make_config(tmp_path), qp=30)

    def test_yuv420_source_accepted(self, tmp_path):
        from conftest import to_yuv420

        seq, _ = make_sequence(seed=7, width=16, height=16, n_frames=2)
        record = run_anchor(to_yuv420(seq), make_config(tmp_path), qp=30)
        assert record.decoded.color_format == ColorFormat.YUV420
        assert record.decoded.width == 16


class TestRdSweep:
    def test_default_point_counts(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        config = make_config(tmp_path)
        proposed, anchor = rd_sweep(seq, config, write_frames=False)
        assert len(proposed.points) == 14
        assert len(anchor.points) == 13
        assert proposed.label == "proposed" and anchor.label == "anchor"

    def test_single_qp_lists(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        config = make_config(tmp_path, qp_list_proposed=[30], qp_list_anchor=[33])
        proposed, anchor = rd_sweep(seq, config, write_frames=False)
        assert len(proposed.points) == 1 and len(anchor.points) == 1
        assert proposed.points[0].map is None
        assert proposed.points[0].psnr_db is not None

    def test_decoded_frames_written_per_run(self, tmp_path, small_sequence):
        seq, _ = small_sequence
        config = make_config(tmp_path, qp_list_proposed=[30], qp_list_anchor=[33])
        rd_sweep(seq, config)
        assert (config.output_dir / "proposed" / "qp30" / "frame_000000.png").is_file()
        assert (config.output_dir / "anchor" / "qp33" / "frame_000001.png").is_file()

    def test_perfect_detections_score_full_map(self, tmp_path, small_sequence):
        seq, gts = small_sequence
        config = make_config(
            tmp_path,
            qp_list_proposed=[28, 40],
            qp_list_anchor=[30],
            detections_dir=tmp_path / "dets",
        )
        write_annotations(gts, config.annotations)
        dets = [Detection(g.frame_id, g.class_id, g.box, 1.0) for g in gts]
        for kind, qps in (("proposed", [28, 40]), ("anchor", [30])):
            (config.detections_dir / kind).mkdir(parents=True)
            for qp in qps:
                write_detections(dets, config.detections_dir / kind / f"qp{qp:02d}.json")
        proposed, anchor = rd_sweep(seq, config, write_frames=False)
        assert all(p.map == 1.0 for p in proposed.points)
        assert all(p.map == 1.0 for p in anchor.points)
        assert all(set(p.per_class_ap) == {g.class_id for g in gts} for p in proposed.points)

    def test_missing_detection_file(self, tmp_path, small_sequence):
        seq, gts = small_sequence
        config = make_config(
            tmp_path,
            qp_list_proposed=[28],
            qp_list_anchor=[30],
            detections_dir=tmp_path / "nonexistent",
        )
        write_annotations(gts, config.annotations)
        with pytest.raises(DataIOError):
            rd_sweep(seq, config, write_frames=False)

    def test_deterministic_csv(self, tmp_path, small_sequence):
        from vcmkit.dataio import write_rd_csv

        seq, _ = small_sequence
        config = make_config(tmp_path, qp_list_proposed=[26, 34], qp_list_anchor=[29, 37])
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        curves_a = rd_sweep(seq, config, write_frames=False)
        curves_b = rd_sweep(seq, config, write_frames=False)
        write_rd_csv(curves_a, out_a)
        write_rd_csv(curves_b, out_b)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_external_codec_path(self, tmp_path, small_sequence):
        from vcmkit.codec import CodecConfig, CodecKind, ExternalCodecSpec

        seq, _ = small_sequence
        codec = CodecConfig(
            kind=CodecKind.EXTERNAL,
            external=ExternalCodecSpec(
                encode_template="cp {input} {output}",
                decode_template="cp {input} {output}",
            ),
        )
        config = make_config(
            tmp_path, codec=codec, scale=1.0, qp_list_proposed=[30], qp_list_anchor=[33]
        )
        proposed, anchor = rd_sweep(seq, config, write_frames=False)
        # identity codec at unit scale: the anchor run is lossless
        assert anchor.points[0].psnr_db == float("inf")
        raw_kbps = seq.width * seq.height * 3 // 2 * 8 * 30.0 / 1000
        assert anchor.points[0].bitrate_kbps == pytest.approx(raw_kbps, rel=1e-12)
        assert (config.output_dir / "work" / "anchor" / "qp33" / "coded.bin").is_file()

    def test_parallel_matches_serial(self, tmp_path, small_sequence):
        from vcmkit.dataio import write_rd_csv

        seq, _ = small_sequence
        config = make_config(tmp_path, qp_list_proposed=[26, 34], qp_list_anchor=[29, 37])
        out_a, out_b = tmp_path / "serial.csv", tmp_path / "parallel.csv"
        write_rd_csv(rd_sweep(seq, config, write_frames=False), out_a)
        write_rd_csv(rd_sweep(seq, config, jobs=4, write_frames=False), out_b)
        assert out_a.read_bytes() == out_b.read_bytes()


def synthetic_curve(label, factor=1.0, n=5, with_map=True):
    rates = [100.0 * factor * (1.6**i) for i in range(n)]
    quality = [0.3 + 0.1 * i for i in range(n)]
    points = tuple(
        RDPoint(40 - i, rates[i], map=quality[i] if with_map else None, psnr_db=20.0 + 3 * i)
        for i in range(n)
    )
    return RDCurve(label, points)


class TestCompareCurves:
    def test_identical_curves_zero_bd(self, tmp_path):
        report = compare_curves(synthetic_curve("proposed"), synthetic_curve("anchor"), tmp_path)
        assert report.bd_rate_percent == 0.0
        assert report.csv_path.is_file()
        assert report.svg_path.is_file()
        assert report.figure_path.is_file()
        assert report.per_curve_csv["proposed"].is_file()

    def test_half_rate_proposed(self, tmp_path):
        report = compare_curves(
            synthetic_curve("proposed", factor=0.5), synthetic_curve("anchor"), tmp_path
        )
        assert report.bd_rate_percent == pytest.approx(-50.0, abs=1e-6)

    def test_three_point_curves_note_no_bd(self, tmp_path):
        report = compare_curves(
            synthetic_curve("proposed", n=3), synthetic_curve("anchor", n=3), tmp_path
        )
        assert report.bd_rate_percent is None
        assert "at least 4 points" in report.notice
        assert report.csv_path.is_file()

    def test_no_map_notes_skip(self, tmp_path):
        report = compare_curves(
            synthetic_curve("proposed", with_map=False),
            synthetic_curve("anchor", with_map=False),
            tmp_path,
        )
        assert report.bd_rate_percent is None
        assert "no mAP" in report.notice
