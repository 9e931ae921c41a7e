"""Binary frame format for scene encodings.

Layout, all integers little-endian:

    magic        4 bytes  b"SYMV"
    version      u8       1
    tier         u8       PrivacyTier value
    flags        u16      bit 0: caption section present
    scene_id_len u32      followed by that many UTF-8 bytes
    num_objects  u32
    dim          u32      always 2048
    payload      num_objects * dim float32, row-major
    captions     only when flag bit 0 is set:
                 u32 count, then per caption u32 byte length + UTF-8 bytes

Object vectors are narrowed to 32-bit floats on encode (round to nearest
even); everything else round-trips byte-for-byte.
"""

from __future__ import annotations

import struct

import numpy as np

from symscene.codec import VECTOR_DIM, PrivacyTier, SceneEncoding
from symscene.errors import (
    DimensionError,
    InvalidInputError,
    ProtocolError,
    TrailingDataError,
    TruncationError,
    VersionError,
)

MAGIC = b"SYMV"
VERSION = 1
FLAG_CAPTIONS = 0x0001
_KNOWN_FLAGS = FLAG_CAPTIONS

_U32_MAX = 2**32 - 1


def encode_frame(enc: SceneEncoding) -> bytes:
    scene_id = enc.scene_id.encode("utf-8")
    if len(scene_id) > _U32_MAX:
        raise InvalidInputError("scene_id exceeds the 32-bit length field")
    if enc.num_objects > _U32_MAX:
        raise InvalidInputError("too many objects for the 32-bit count field")
    flags = FLAG_CAPTIONS if enc.captions is not None else 0
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BBH", VERSION, int(enc.tier), flags)
    out += struct.pack("<I", len(scene_id))
    out += scene_id
    out += struct.pack("<II", enc.num_objects, VECTOR_DIM)
    out += np.ascontiguousarray(enc.objects, dtype="<f4").tobytes()
    if enc.captions is not None:
        if len(enc.captions) > _U32_MAX:
            raise InvalidInputError("too many captions for the 32-bit count field")
        out += struct.pack("<I", len(enc.captions))
        for caption in enc.captions:
            raw = caption.encode("utf-8")
            if len(raw) > _U32_MAX:
                raise InvalidInputError("caption exceeds the 32-bit length field")
            out += struct.pack("<I", len(raw))
            out += raw
    return bytes(out)


class _Cursor:
    """Bounds-checked reader; every shortfall becomes a TruncationError."""

    def __init__(self, data: bytes, start: int = 0):
        self.data = data
        self.pos = start

    def take(self, n: int, what: str) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise TruncationError(
                f"frame truncated reading {what}", expected=end, actual=len(self.data)
            )
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def utf8(self, n: int, what: str) -> str:
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProtocolError(f"{what} is not valid UTF-8") from exc


def _decode_one(data: bytes, start: int) -> tuple[SceneEncoding, int]:
    cur = _Cursor(data, start)
    magic = cur.take(4, "magic")
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version = cur.u8("version")
    if version != VERSION:
        raise VersionError(f"unsupported version {version}, expected {VERSION}")
    tier_byte = cur.u8("tier")
    try:
        tier = PrivacyTier(tier_byte)
    except ValueError:
        raise ProtocolError(f"unknown privacy tier {tier_byte}") from None
    flags = cur.u16("flags")
    if flags & ~_KNOWN_FLAGS:
        raise ProtocolError(f"unknown flag bits 0x{flags & ~_KNOWN_FLAGS:04x}")
    scene_id = cur.utf8(cur.u32("scene_id length"), "scene_id")
    num_objects = cur.u32("object count")
    dim = cur.u32("vector dimension")
    if dim != VECTOR_DIM:
        raise DimensionError(f"vector dimension {dim}, expected {VECTOR_DIM}")
    payload = cur.take(num_objects * dim * 4, "object payload")
    objects = np.frombuffer(payload, dtype="<f4").reshape(num_objects, dim).copy()
    captions = None
    if flags & FLAG_CAPTIONS:
        captions = [
            cur.utf8(cur.u32(f"caption {i} length"), f"caption {i}")
            for i in range(cur.u32("caption count"))
        ]
    return SceneEncoding(scene_id=scene_id, tier=tier, objects=objects, captions=captions), cur.pos


def decode_frame(data: bytes) -> SceneEncoding:
    """Parse exactly one frame; extra bytes after it are an error."""
    enc, end = _decode_one(data, 0)
    if end != len(data):
        raise TrailingDataError(f"{len(data) - end} trailing bytes after frame")
    return enc


def iter_frames(data: bytes):
    """Yield every frame from a buffer of back-to-back frames."""
    offset = 0
    while offset < len(data):
        enc, offset = _decode_one(data, offset)
        yield enc


def split_frames(data: bytes) -> list[bytes]:
    """Slice a buffer of back-to-back frames into per-frame byte spans."""
    spans = []
    offset = 0
    while offset < len(data):
        _, end = _decode_one(data, offset)
        spans.append(data[offset:end])
        offset = end
    return spans
