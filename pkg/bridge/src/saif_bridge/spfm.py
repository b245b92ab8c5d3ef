"""Probability-map files: 16-byte header, float32 payload, CRC32 trailer.

Layout (all little-endian): magic "SPFM", version u16 = 1, reserved
u16 = 0, width u32, height u32, then width*height float32 values in
row-major order with the origin at the top left, then the CRC32 of the
payload bytes as u32.
"""

from __future__ import annotations

import os
import struct
import zlib

import numpy as np

from .errors import RequestFormatError

MAGIC = b"SPFM"
VERSION = 1
_HEADER = struct.Struct("<4sHHII")
_TRAILER = struct.Struct("<I")


def encode_map(probs: np.ndarray) -> bytes:
    arr = np.asarray(probs, dtype=np.float32)
    if arr.ndim != 2 or arr.size == 0:
        raise RequestFormatError(f"map must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise RequestFormatError("map contains non-finite values")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise RequestFormatError("map values must lie in [0, 1]")
    h, w = arr.shape
    payload = arr.astype("<f4", copy=False).tobytes(order="C")
    return (_HEADER.pack(MAGIC, VERSION, 0, w, h) + payload
            + _TRAILER.pack(zlib.crc32(payload)))


def decode_map(data: bytes, path: str = "<map>") -> np.ndarray:
    if len(data) < _HEADER.size + _TRAILER.size:
        raise RequestFormatError(f"{path}: truncated map file ({len(data)} bytes)")
    magic, version, reserved, w, h = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise RequestFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise RequestFormatError(f"{path}: unsupported version {version}")
    if reserved != 0:
        raise RequestFormatError(f"{path}: reserved field must be 0, got {reserved}")
    if w == 0 or h == 0:
        raise RequestFormatError(f"{path}: zero-sized map {w}x{h}")
    expected = _HEADER.size + 4 * w * h + _TRAILER.size
    if len(data) != expected:
        raise RequestFormatError(
            f"{path}: expected {expected} bytes for {w}x{h}, got {len(data)}")
    payload = data[_HEADER.size:-_TRAILER.size]
    (stored,) = _TRAILER.unpack_from(data, len(data) - _TRAILER.size)
    if zlib.crc32(payload) != stored:
        raise RequestFormatError(f"{path}: payload checksum mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w)


def write_map_file(probs: np.ndarray, path: str) -> str:
    """Atomically write one map; returns the payload CRC as 8 hex digits."""
    data = encode_map(probs)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
    (crc,) = _TRAILER.unpack_from(data, len(data) - _TRAILER.size)
    return f"{crc:08x}"


def verify_map_file(path: str, width: int, height: int) -> str | None:
    """CRC of an existing valid map with the given dimensions, else None."""
    try:
        with open(path, "rb") as f:
            data = f.read()
        arr = decode_map(data, path)
    except (OSError, RequestFormatError):
        return None
    if arr.shape != (height, width):
        return None
    return f"{zlib.crc32(data[_HEADER.size:-_TRAILER.size]):08x}"
