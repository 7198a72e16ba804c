"""Tests for frames, contrast reduction, resampling, entropy, and PSNR."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vcmkit.errors import ArgumentError, FormatError
from vcmkit.imagecore import (
    ColorFormat,
    ContrastParams,
    Frame,
    VideoSequence,
    bicubic_resize,
    contrast_reduce,
    global_mean,
    psnr,
    rgb_to_yuv420,
    round_half_away,
    shannon_entropy,
    yuv420_to_rgb,
)


def rgb1x1(r, g, b):
    return Frame(
        (np.array([[r]], np.uint8), np.array([[g]], np.uint8), np.array([[b]], np.uint8)),
        ColorFormat.RGB444,
    )


def gray(arr):
    return Frame((np.asarray(arr, np.uint8),), ColorFormat.GRAY)


def const_rgb(v, w=4, h=4):
    p = np.full((h, w), v, np.uint8)
    return Frame((p, p, p), ColorFormat.RGB444)


def _oracle_contrast(values, alpha):
    """Exact-rational evaluation of the per-sample blend toward the mean."""
    a = Fraction(alpha)
    mu = Fraction(sum(int(v) for v in values), len(values))
    out = []
    for v in values:
        x = (1 - a) * v + a * mu
        # round half away from zero, exactly
        n = x.numerator * 2 + x.denominator
        rounded = n // (2 * x.denominator) if x >= 0 else -((-x.numerator * 2 + x.denominator) // (2 * x.denominator))
        out.append(min(255, max(0, rounded)))
    return out


small_dims = st.integers(min_value=1, max_value=12)


@st.composite
def rgb_frames(draw):
    w = draw(small_dims)
    h = draw(small_dims)
    plane = arrays(np.uint8, (h, w), elements=st.integers(0, 255))
    return Frame((draw(plane), draw(plane), draw(plane)), ColorFormat.RGB444)


class TestFrameInvariants:
    def test_gray_needs_one_plane(self):
        with pytest.raises(FormatError):
            Frame((np.zeros((2, 2), np.uint8), np.zeros((2, 2), np.uint8)), ColorFormat.GRAY)

    def test_rgb_needs_three_planes(self):
        with pytest.raises(FormatError):
            Frame((np.zeros((2, 2), np.uint8),), ColorFormat.RGB444)

    def test_yuv420_chroma_dims(self):
        y = np.zeros((4, 4), np.uint8)
        c = np.zeros((2, 2), np.uint8)
        f = Frame((y, c, c), ColorFormat.YUV420)
        assert f.width == 4 and f.height == 4
        with pytest.raises(FormatError):
            Frame((y, y, y), ColorFormat.YUV420)

    def test_yuv420_odd_luma_rejected(self):
        y = np.zeros((3, 4), np.uint8)
        c = np.zeros((1, 2), np.uint8)
        with pytest.raises(FormatError):
            Frame((y, c, c), ColorFormat.YUV420)

    def test_out_of_range_samples_rejected(self):
        with pytest.raises(FormatError):
            Frame((np.array([[300]], np.int32),), ColorFormat.GRAY)
        with pytest.raises(FormatError):
            Frame((np.array([[0.5]]),), ColorFormat.GRAY)

    def test_planes_are_immutable(self):
        f = gray([[1, 2], [3, 4]])
        with pytest.raises(ValueError):
            f.planes[0][0, 0] = 9

    def test_sequence_homogeneity(self):
        with pytest.raises(FormatError):
            VideoSequence([gray([[0]]), gray([[0, 0]])], fps=30.0)
        with pytest.raises(ArgumentError):
            VideoSequence([], fps=30.0)
        with pytest.raises(ArgumentError):
            VideoSequence([gray([[0]])], fps=0.0)


class TestGlobalMean:
    def test_exact_rational_case(self):
        # oracle: (0 + 128 + 255) / 3
        expected = Fraction(0 + 128 + 255, 3)
        assert global_mean(rgb1x1(0, 128, 255)) == pytest.approx(float(expected), abs=1e-12)

    def test_constant_frame(self):
        assert global_mean(const_rgb(77)) == 77.0

    def test_all_zero(self):
        assert global_mean(const_rgb(0, 2, 2)) == 0.0

    def test_rejects_gray_and_yuv420(self):
        with pytest.raises(FormatError):
            global_mean(gray([[0]]))
        y = np.zeros((2, 2), np.uint8)
        c = np.zeros((1, 1), np.uint8)
        with pytest.raises(FormatError):
            global_mean(Frame((y, c, c), ColorFormat.YUV420))


class TestContrastReduce:
    def test_alpha_zero_is_identity(self):
        f = Frame(
            tuple(np.random.default_rng(0).integers(0, 256, (5, 7), dtype=np.uint8) for _ in range(3)),
            ColorFormat.RGB444,
        )
        assert contrast_reduce(f, ContrastParams(0.0)) == f

    def test_alpha_one_collapses_to_mean(self):
        f = rgb1x1(0, 128, 255)
        expected = _oracle_contrast([0, 128, 255], 1)
        assert expected == [128, 128, 128]
        out = contrast_reduce(f, ContrastParams(1.0))
        assert [int(p[0, 0]) for p in out.planes] == expected

    def test_quarter_alpha_golden(self):
        # frozen from the exact-rational oracle
        assert _oracle_contrast([0, 128, 255], Fraction(1, 4)) == [32, 128, 223]
        out = contrast_reduce(rgb1x1(0, 128, 255), ContrastParams(0.25))
        assert [int(p[0, 0]) for p in out.planes] == [32, 128, 223]

    def test_alpha_out_of_range(self):
        with pytest.raises(ArgumentError):
            ContrastParams(1.5)
        with pytest.raises(ArgumentError):
            ContrastParams(-0.1)

    def test_rejects_yuv420(self):
        y = np.zeros((2, 2), np.uint8)
        c = np.zeros((1, 1), np.uint8)
        with pytest.raises(FormatError):
            contrast_reduce(Frame((y, c, c), ColorFormat.YUV420), ContrastParams(0.5))

    @settings(max_examples=60, deadline=None)
    @given(rgb_frames(), st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]))
    def test_map_is_monotone_and_hull_bounded(self, frame, alpha):
        out = contrast_reduce(frame, ContrastParams(alpha))
        vin = np.concatenate([p.reshape(-1) for p in frame.planes]).astype(np.int64)
        vout = np.concatenate([p.reshape(-1) for p in out.planes]).astype(np.int64)
        order = np.argsort(vin, kind="stable")
        assert np.all(np.diff(vout[order]) >= 0)
        assert vout.min() >= vin.min() and vout.max() <= vin.max()

    @settings(max_examples=60, deadline=None)
    @given(rgb_frames(), st.sampled_from([0.1, 0.25, 0.5, 1.0]))
    def test_entropy_never_increases(self, frame, alpha):
        out = contrast_reduce(frame, ContrastParams(alpha))
        assert shannon_entropy(out) <= shannon_entropy(frame) + 1e-12


def _oracle_checkerboard_1x1():
    """Direct kernel evaluation for the 2x2 checkerboard collapsed to 1x1."""
    # src coordinate 0.5 in both axes; taps clamp to the two samples with
    # weights (-0.0625, 0.5625, 0.5625, -0.0625).
    w = [-0.0625, 0.5625, 0.5625, -0.0625]
    row = [0.0, 255.0]
    taps = [row[0], row[0], row[1], row[1]]
    h = sum(wi * ti for wi, ti in zip(w, taps))
    assert h == 127.5
    col = [h, h]
    taps = [col[0], col[0], col[1], col[1]]
    v = sum(wi * ti for wi, ti in zip(w, taps))
    return math.floor(abs(v) + 0.5)  # half away from zero, v >= 0


class TestBicubicResize:
    def test_identity_is_bit_exact(self):
        rng = np.random.default_rng(1)
        f = gray(rng.integers(0, 256, (9, 13), dtype=np.uint8))
        assert bicubic_resize(f, 13, 9) == f

    def test_constant_preserved(self):
        f = const_rgb(5, 6, 4)
        out = bicubic_resize(f, 11, 3)
        for p in out.planes:
            assert np.all(p == 5)

    def test_checkerboard_to_single_sample(self):
        assert _oracle_checkerboard_1x1() == 128
        f = gray([[0, 255], [255, 0]])
        out = bicubic_resize(f, 1, 1)
        assert int(out.planes[0][0, 0]) == 128

    def test_zero_output_dims_rejected(self):
        with pytest.raises(ArgumentError):
            bicubic_resize(gray([[0]]), 0, 1)

    def test_yuv420_rejected(self):
        y = np.zeros((2, 2), np.uint8)
        c = np.zeros((1, 1), np.uint8)
        with pytest.raises(FormatError):
            bicubic_resize(Frame((y, c, c), ColorFormat.YUV420), 2, 2)

    def test_one_by_one_input(self):
        f = gray([[42]])
        out = bicubic_resize(f, 5, 3)
        assert np.all(out.planes[0] == 42)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.uint8, (6, 6), elements=st.integers(0, 255)),
           st.integers(1, 9), st.integers(1, 9))
    def test_output_dims_and_range(self, plane, w, h):
        out = bicubic_resize(gray(plane), w, h)
        assert out.width == w and out.height == h

    def test_smooth_gradient_roundtrip_quality(self):
        x = np.arange(64)
        ramp = ((x[None, :] + x[:, None]) * 255.0 / 126.0)
        f = gray(round_half_away(ramp).astype(np.int64))
        down = bicubic_resize(f, 32, 32)
        up = bicubic_resize(down, 64, 64)
        assert psnr(f, up) >= 30.0


class TestEntropy:
    def test_constant_is_zero(self):
        assert shannon_entropy(const_rgb(9)) == 0.0

    def test_two_valued_is_one_bit(self):
        assert shannon_entropy(gray([[0, 255]])) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_is_eight_bits(self):
        f = gray(np.arange(256, dtype=np.uint8).reshape(1, 256))
        assert shannon_entropy(f) == pytest.approx(8.0, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(rgb_frames())
    def test_bounds(self, frame):
        e = shannon_entropy(frame)
        assert 0.0 <= e <= 8.0


class TestPsnr:
    def test_identical_is_infinite(self):
        f = const_rgb(100)
        assert psnr(f, f) == float("inf")

    def test_unit_mse(self):
        a = gray(np.full((4, 4), 10, np.uint8))
        b = gray(np.full((4, 4), 11, np.uint8))
        assert psnr(a, b) == pytest.approx(10 * math.log10(255**2), abs=1e-12)

    def test_extreme_difference(self):
        a = gray(np.zeros((4, 4), np.uint8))
        b = gray(np.full((4, 4), 255, np.uint8))
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(FormatError):
            psnr(gray([[0]]), gray([[0, 0]]))

    @settings(max_examples=40, deadline=None)
    @given(rgb_frames(), st.randoms(use_true_random=False))
    def test_symmetry(self, frame, rnd):
        noisy = Frame(
            tuple(
                np.clip(p.astype(np.int64) + rnd.randint(-3, 3), 0, 255).astype(np.uint8)
                for p in frame.planes
            ),
            ColorFormat.RGB444,
        )
        assert psnr(frame, noisy) == psnr(noisy, frame)


class TestColorConversion:
    def test_achromatic_maps_to_neutral_chroma(self):
        for v in (0, 1, 77, 128, 254, 255):
            f = const_rgb(v, 4, 4)
            out = rgb_to_yuv420(f)
            assert np.all(out.planes[0] == v)
            assert np.all(out.planes[1] == 128)
            assert np.all(out.planes[2] == 128)

    def test_gray_constants_round_trip(self):
        for v in range(0, 256, 1):
            f = const_rgb(v, 2, 2)
            assert yuv420_to_rgb(rgb_to_yuv420(f)) == f

    def test_color_constant_round_trip(self):
        f = Frame(
            (np.full((2, 2), 10, np.uint8), np.full((2, 2), 200, np.uint8), np.full((2, 2), 30, np.uint8)),
            ColorFormat.RGB444,
        )
        assert yuv420_to_rgb(rgb_to_yuv420(f)) == f

    def test_pure_red_luma(self):
        f = Frame(
            (np.full((2, 2), 255, np.uint8), np.zeros((2, 2), np.uint8), np.zeros((2, 2), np.uint8)),
            ColorFormat.RGB444,
        )
        out = rgb_to_yuv420(f)
        assert np.all(out.planes[0] == 76)  # 0.299 * 255 = 76.245

    def test_odd_dims_rejected(self):
        p = np.zeros((3, 4), np.uint8)
        with pytest.raises(ArgumentError):
            rgb_to_yuv420(Frame((p, p, p), ColorFormat.RGB444))

    def test_wrong_format_rejected(self):
        with pytest.raises(FormatError):
            yuv420_to_rgb(const_rgb(1))
        y = np.zeros((2, 2), np.uint8)
        c = np.zeros((1, 1), np.uint8)
        with pytest.raises(FormatError):
            rgb_to_yuv420(Frame((y, c, c), ColorFormat.YUV420))


class TestYuv444Bridge:
    def test_chroma_round_trip_is_exact(self):
        from vcmkit.imagecore import yuv420_to_yuv444, yuv444_to_yuv420

        rng = np.random.default_rng(11)
        y = rng.integers(0, 256, (6, 8), dtype=np.uint8)
        u = rng.integers(0, 256, (3, 4), dtype=np.uint8)
        v = rng.integers(0, 256, (3, 4), dtype=np.uint8)
        f = Frame((y, u, v), ColorFormat.YUV420)
        up = yuv420_to_yuv444(f)
        assert up.color_format == ColorFormat.YUV444
        assert up.planes[1].shape == (6, 8)
        assert yuv444_to_yuv420(up) == f

    def test_format_checks(self):
        from vcmkit.imagecore import yuv420_to_yuv444, yuv444_to_yuv420

        with pytest.raises(FormatError):
            yuv420_to_yuv444(const_rgb(1))
        with pytest.raises(FormatError):
            yuv444_to_yuv420(const_rgb(1))


class TestRounding:
    @pytest.mark.parametrize(
        "value,expected",
        [(0.5, 1), (1.5, 2), (2.5, 3), (-0.5, -1), (-1.5, -2), (0.49, 0), (-0.49, 0), (0.0, 0)],
    )
    def test_half_away_from_zero(self, value, expected):
        assert round_half_away(value) == expected
