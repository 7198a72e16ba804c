"""Built-in intra codec: 8x8 orthonormal DCT, flat quantizer, Exp-Golomb entropy code.

Every frame is coded independently. Per plane, dimensions are padded up to
multiples of 8 by edge replication; each block is transformed, quantized
with a single step size derived from qp, zigzag scanned, and entropy
coded. The bit syntax per block:

    1 flag bit (1 = all coefficients zero), else
    flag 0, 6-bit index of the last nonzero zigzag position, then one
    signed order-0 Exp-Golomb code per position 0..last
    (value mapping 0->0, 1->1, -1->2, 2->3, -2->4, ...).

Bits are packed MSB-first across the whole sequence; the final byte is
zero-padded. Encoding is a pure function of (samples, qp).
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    ArgumentError,
    BitstreamError,
    FormatError,
    TrailingDataError,
    TruncatedPayloadError,
)
from ..imagecore import ColorFormat, Frame, VideoSequence, round_half_away
from . import Bitstream, BitstreamHeader, qstep_from_qp

_BLOCK = 8


def _dct_matrix() -> np.ndarray:
    n = np.arange(_BLOCK)
    u = n[:, None]
    mat = np.cos((2 * n[None, :] + 1) * u * np.pi / (2 * _BLOCK))
    mat *= np.sqrt(2.0 / _BLOCK)
    mat[0, :] = np.sqrt(1.0 / _BLOCK)
    return mat


_DCT = _dct_matrix()


def _zigzag_order() -> np.ndarray:
    order = []
    for s in range(2 * _BLOCK - 1):
        lo, hi = max(0, s - _BLOCK + 1), min(s, _BLOCK - 1)
        rows = range(lo, hi + 1) if s % 2 else reversed(range(lo, hi + 1))
        order.extend(i * _BLOCK + (s - i) for i in rows)
    return np.array(order, dtype=np.int64)


ZIGZAG = _zigzag_order()


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    ph = (h + _BLOCK - 1) // _BLOCK * _BLOCK
    pw = (w + _BLOCK - 1) // _BLOCK * _BLOCK
    padded = np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
    return (
        padded.reshape(ph // _BLOCK, _BLOCK, pw // _BLOCK, _BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(-1, _BLOCK, _BLOCK)
    )


def _from_blocks(blocks: np.ndarray, width: int, height: int) -> np.ndarray:
    pw = (width + _BLOCK - 1) // _BLOCK * _BLOCK
    ph = (height + _BLOCK - 1) // _BLOCK * _BLOCK
    full = (
        blocks.reshape(ph // _BLOCK, pw // _BLOCK, _BLOCK, _BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(ph, pw)
    )
    return full[:height, :width]


def _blocks_per_plane(width: int, height: int) -> int:
    return ((width + _BLOCK - 1) // _BLOCK) * ((height + _BLOCK - 1) // _BLOCK)


def _plane_tokens(plane: np.ndarray, qstep: float) -> tuple[np.ndarray, np.ndarray]:
    """Token stream for one plane as parallel (value, bit-width) arrays."""
    blocks = _to_blocks(plane).astype(np.float64) - 128.0
    coefs = _DCT @ blocks @ _DCT.T
    levels = round_half_away(coefs / qstep).astype(np.int64)
    zz = levels.reshape(-1, _BLOCK * _BLOCK)[:, ZIGZAG]

    nonzero = zz != 0
    coded = nonzero.any(axis=1)
    last = np.where(coded, 63 - np.argmax(nonzero[:, ::-1], axis=1), 0)

    counts = np.where(coded, last + 3, 1)  # flag + last-index + levels, or lone flag
    starts = np.zeros(len(counts), dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    total = int(counts.sum())

    vals = np.zeros(total, dtype=np.int64)
    widths = np.ones(total, dtype=np.int64)
    vals[starts] = np.where(coded, 0, 1)  # flag bit: 1 = all-zero block

    if coded.any():
        cstarts = starts[coded]
        clast = last[coded]
        vals[cstarts + 1] = clast
        widths[cstarts + 1] = 6

        # signed Exp-Golomb: value -> codeNum, emitted as (codeNum + 1) in
        # (2 * bit_length - 1) bits, which encodes the leading zeros implicitly
        zc = zz[coded]
        codenum = np.where(zc > 0, 2 * zc - 1, -2 * zc)
        m = codenum + 1
        bitlen = np.frexp(m.astype(np.float64))[1]
        sel = np.arange(_BLOCK * _BLOCK)[None, :] <= clast[:, None]
        positions = (cstarts + 2)[:, None] + np.arange(_BLOCK * _BLOCK)[None, :]
        flat = positions[sel]
        vals[flat] = m[sel]
        widths[flat] = (2 * bitlen - 1)[sel]
    return vals, widths


def _pack_tokens(vals: np.ndarray, widths: np.ndarray) -> bytes:
    """Pack (value, width) tokens into bytes, MSB-first, zero-padded at the end."""
    if len(vals) == 0:
        return b""
    pieces = []
    chunk = 1 << 16
    for i in range(0, len(vals), chunk):
        v = vals[i : i + chunk, None]
        w = widths[i : i + chunk, None]
        maxw = int(w.max())
        shifts = w - 1 - np.arange(maxw)[None, :]
        bits = ((v >> np.maximum(shifts, 0)) & 1).astype(np.uint8)
        pieces.append(bits[shifts >= 0])
    return np.packbits(np.concatenate(pieces)).tobytes()


def encode_builtin(seq: VideoSequence, qp: int) -> Bitstream:
    """Encode a YUV420 sequence; deterministic, byte-identical across runs."""
    if seq.color_format != ColorFormat.YUV420:
        raise FormatError(
            f"encode_builtin requires YUV420 frames, got {seq.color_format.value}"
        )
    if not 0 <= qp <= 63:
        raise ArgumentError(f"qp must be in [0, 63], got {qp}")
    qstep = qstep_from_qp(qp)
    first = seq.frames[0]
    header = BitstreamHeader(
        luma_width=first.width,
        luma_height=first.height,
        frame_count=len(seq.frames),
        plane_dims=tuple((p.shape[1], p.shape[0]) for p in first.planes),
        qp=qp,
    )
    all_vals = []
    all_widths = []
    for frame in seq.frames:
        for plane in frame.planes:
            vals, widths = _plane_tokens(plane, qstep)
            all_vals.append(vals)
            all_widths.append(widths)
    payload = _pack_tokens(np.concatenate(all_vals), np.concatenate(all_widths))
    return Bitstream(header, header.pack() + payload)


def _parse_all_levels(payload: bytes, block_counts: list[int]) -> list[np.ndarray]:
    """Sequentially decode zigzag level arrays, one (nblocks, 64) array per plane.

    The accumulator keeps only unread bits (masked after every take), so
    each bit operation stays O(1) regardless of stream length.
    """
    buf = payload
    n = len(buf)
    pos = 0
    acc = 0
    have = 0
    out = []
    for nblocks in block_counts:
        levels = np.zeros((nblocks, _BLOCK * _BLOCK), dtype=np.int64)
        for b in range(nblocks):
            # flag bit
            if have < 1:
                if pos >= n:
                    raise TruncatedPayloadError("stream ended before block flag")
                acc = (acc << 8) | buf[pos]
                pos += 1
                have += 8
            have -= 1
            flag = acc >> have
            acc &= (1 << have) - 1
            if flag:
                continue
            while have < 6:
                if pos >= n:
                    raise TruncatedPayloadError("stream ended inside block header")
                acc = (acc << 8) | buf[pos]
                pos += 1
                have += 8
            have -= 6
            lastnz = acc >> have
            acc &= (1 << have) - 1
            row = levels[b]
            for k in range(lastnz + 1):
                zeros = 0
                while True:
                    if have < 1:
                        if pos >= n:
                            raise TruncatedPayloadError("stream ended inside a level code")
                        acc = (acc << 8) | buf[pos]
                        pos += 1
                        have += 8
                    have -= 1
                    bit = acc >> have
                    acc &= (1 << have) - 1
                    if bit:
                        break
                    zeros += 1
                    if zeros > 32:
                        raise TruncatedPayloadError("level code prefix too long")
                if zeros:
                    while have < zeros:
                        if pos >= n:
                            raise TruncatedPayloadError("stream ended inside a level code")
                        acc = (acc << 8) | buf[pos]
                        pos += 1
                        have += 8
                    have -= zeros
                    m = (1 << zeros) | (acc >> have)
                    acc &= (1 << have) - 1
                else:
                    m = 1
                codenum = m - 1
                if codenum:
                    row[k] = (codenum + 1) >> 1 if codenum & 1 else -(codenum >> 1)
        out.append(levels)
    leftover = have + 8 * (n - pos)
    if leftover >= 8:
        raise TrailingDataError(f"{leftover} unread bits after the last block")
    if acc:
        raise TrailingDataError("nonzero padding bits after the last block")
    return out


def decode_builtin(bs: Bitstream, fps: float = 30.0) -> VideoSequence:
    """Decode a built-in stream back to a YUV420 sequence.

    fps is playback metadata only; the stream does not carry it.
    """
    header, header_size = BitstreamHeader.unpack(bs.data)
    if header.plane_count != 3:
        raise BitstreamError(f"expected 3 coded planes, got {header.plane_count}")
    lw, lh = header.plane_dims[0]
    if (lw, lh) != (header.luma_width, header.luma_height):
        raise BitstreamError("luma plane dimensions disagree with the header")
    for w, h in header.plane_dims[1:]:
        if (w, h) != (lw // 2, lh // 2):
            raise BitstreamError("chroma plane dimensions are not half the luma dimensions")
    qstep = qstep_from_qp(header.qp)
    payload = bs.data[header_size:]

    per_frame = [_blocks_per_plane(w, h) for w, h in header.plane_dims]
    block_counts = per_frame * header.frame_count
    all_levels = _parse_all_levels(payload, block_counts)

    frames = []
    idx = 0
    for _ in range(header.frame_count):
        planes = []
        for w, h in header.plane_dims:
            zz = all_levels[idx]
            idx += 1
            raster = np.zeros_like(zz)
            raster[:, ZIGZAG] = zz
            coefs = raster.reshape(-1, _BLOCK, _BLOCK).astype(np.float64) * qstep
            blocks = _DCT.T @ coefs @ _DCT + 128.0
            samples = np.clip(round_half_away(blocks), 0, 255).astype(np.uint8)
            planes.append(_from_blocks(samples, w, h))
        frames.append(Frame(tuple(planes), ColorFormat.YUV420))
    return VideoSequence(frames, fps=fps)
