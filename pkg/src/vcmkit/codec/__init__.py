"""Pluggable coding stage: a built-in intra codec plus an external-encoder driver.

The built-in codec is specified to the bit (header layout, scan order,
entropy code) so experiments are reproducible with no external tools; the
external driver shells out to any encoder reachable via command templates.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

from ..errors import (
    ArgumentError,
    BadMagicError,
    BitstreamError,
    CodecTemplateError,
    TruncatedPayloadError,
)

MAGIC = b"TIC1"
VERSION = 1

_FIXED_HEADER = struct.Struct("<4sBHHIB")  # magic, version, luma w/h, frames, planes
_PLANE_DIMS = struct.Struct("<HH")
_QP = struct.Struct("<B")

PLACEHOLDERS = {"input", "output", "qp", "width", "height", "frames", "fps"}


class CodecKind(Enum):
    BUILTIN = "builtin"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ExternalCodecSpec:
    """Command templates for an external encoder/decoder pair.

    Templates may use the placeholders {input}, {output}, {qp}, {width},
    {height}, {frames}, {fps}; both must contain {input} and {output}.
    """

    encode_template: str
    decode_template: str
    timeout: float = 600.0

    def __post_init__(self):
        for name, template in (("encode", self.encode_template), ("decode", self.decode_template)):
            for required in ("{input}", "{output}"):
                if required not in template:
                    raise CodecTemplateError(f"{name} template must contain {required}")
        if self.timeout <= 0:
            raise CodecTemplateError(f"timeout must be positive, got {self.timeout}")


@dataclass(frozen=True)
class CodecConfig:
    kind: CodecKind = CodecKind.BUILTIN
    qp: int = 32
    external: ExternalCodecSpec | None = None

    def __post_init__(self):
        if self.kind == CodecKind.BUILTIN and not 0 <= self.qp <= 63:
            raise ArgumentError(f"built-in codec qp must be in [0, 63], got {self.qp}")
        if self.kind == CodecKind.EXTERNAL and self.external is None:
            raise CodecTemplateError("external codec requires an ExternalCodecSpec")


@dataclass(frozen=True)
class BitstreamHeader:
    luma_width: int
    luma_height: int
    frame_count: int
    plane_dims: tuple[tuple[int, int], ...]
    qp: int

    @property
    def plane_count(self) -> int:
        return len(self.plane_dims)

    def pack(self) -> bytes:
        head = _FIXED_HEADER.pack(
            MAGIC, VERSION, self.luma_width, self.luma_height, self.frame_count, self.plane_count
        )
        dims = b"".join(_PLANE_DIMS.pack(w, h) for w, h in self.plane_dims)
        return head + dims + _QP.pack(self.qp)

    @classmethod
    def unpack(cls, data: bytes) -> tuple["BitstreamHeader", int]:
        """Parse a header from the front of ``data``; returns (header, byte length)."""
        if len(data) < _FIXED_HEADER.size:
            raise TruncatedPayloadError("stream shorter than the fixed header")
        magic, version, lw, lh, frames, planes = _FIXED_HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise BadMagicError(f"unsupported stream version {version}")
        size = _FIXED_HEADER.size + planes * _PLANE_DIMS.size + _QP.size
        if len(data) < size:
            raise TruncatedPayloadError("stream shorter than the declared header")
        dims = []
        off = _FIXED_HEADER.size
        for _ in range(planes):
            w, h = _PLANE_DIMS.unpack_from(data, off)
            dims.append((w, h))
            off += _PLANE_DIMS.size
        (qp,) = _QP.unpack_from(data, off)
        header = cls(lw, lh, frames, tuple(dims), qp)
        if frames < 1 or planes < 1 or any(w < 1 or h < 1 for w, h in dims):
            raise BitstreamError("header declares an empty stream")
        return header, size


@dataclass(frozen=True)
class Bitstream:
    """A coded stream: parsed header plus the complete serialized bytes."""

    header: BitstreamHeader
    data: bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        header, _ = BitstreamHeader.unpack(data)
        return cls(header, data)


@dataclass(frozen=True)
class CodingStats:
    total_bits: int
    frames: int
    bitrate_kbps: float


def qstep_from_qp(qp: int) -> float:
    """Quantizer step size 2**((qp-4)/6); step doubles every six qp."""
    if not 0 <= qp <= 63:
        raise ArgumentError(f"qp must be in [0, 63], got {qp}")
    return 2.0 ** ((qp - 4) / 6)


def measure_bitrate(total_bytes: int, frames: int, fps: float) -> float:
    """Coded size converted to kilobits per second of source video."""
    if frames < 1:
        raise ArgumentError(f"frame count must be at least 1, got {frames}")
    if fps <= 0:
        raise ArgumentError(f"fps must be positive, got {fps}")
    return total_bytes * 8 * fps / frames / 1000


def stats_for(bitstream_bytes: int, frames: int, fps: float) -> CodingStats:
    return CodingStats(
        total_bits=bitstream_bytes * 8,
        frames=frames,
        bitrate_kbps=measure_bitrate(bitstream_bytes, frames, fps),
    )


from .builtin import decode_builtin, encode_builtin  # noqa: E402
from .external import encode_external, run_decode_template, run_encode_template  # noqa: E402

__all__ = [
    "MAGIC",
    "CodecKind",
    "CodecConfig",
    "ExternalCodecSpec",
    "Bitstream",
    "BitstreamHeader",
    "CodingStats",
    "qstep_from_qp",
    "measure_bitrate",
    "stats_for",
    "encode_builtin",
    "decode_builtin",
    "encode_external",
    "run_encode_template",
    "run_decode_template",
]
