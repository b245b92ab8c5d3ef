"""Bit-exact file formats for probability maps, binary masks, and the
map manifest.

Map files (magic SPFM) and mask files (magic SBMK) share a 16-byte
little-endian header: magic (4 bytes), version u16 = 1, reserved u16 =
0, width u32, height u32. The payload is row-major from the top-left
pixel: 32-bit IEEE floats for maps, one byte in {0, 1} for masks. A
CRC32 of the payload follows as u32.

The manifest is line-oriented text: optional "# key=value" header
lines, then one tab-separated record per retained family box with
fields image_id, candidate index, jitter index, x1, y1, x2, y2, map
path, crc32 hex. Floats are serialized with repr() so parsing is the
exact inverse. Request manifests (bridge input) leave path and crc
empty.
"""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import MapFormatError

_HEADER = struct.Struct("<4sHHII")
_CRC = struct.Struct("<I")
MAP_MAGIC = b"SPFM"
MASK_MAGIC = b"SBMK"
FORMAT_VERSION = 1
MANIFEST_FIELDS = ("image_id", "i", "k", "x1", "y1", "x2", "y2", "path", "crc32")


def atomic_write_bytes(path, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _encode(magic: bytes, payload: bytes, width: int, height: int) -> bytes:
    header = _HEADER.pack(magic, FORMAT_VERSION, 0, width, height)
    return header + payload + _CRC.pack(zlib.crc32(payload))


def encode_map(p) -> bytes:
    arr = np.asarray(p)
    if arr.ndim != 2:
        raise MapFormatError(f"map must be 2-D, got shape {arr.shape}", field="dims")
    if arr.size == 0:
        raise MapFormatError("map must have at least one pixel", field="dims")
    if not np.isfinite(arr).all():
        raise MapFormatError("map contains non-finite values", field="payload")
    f32 = np.ascontiguousarray(arr, dtype="<f4")
    if float(f32.min()) < 0.0 or float(f32.max()) > 1.0:
        raise MapFormatError("map values must lie in [0, 1]", field="payload")
    h, w = f32.shape
    return _encode(MAP_MAGIC, f32.tobytes(), w, h)


def write_map(p, path) -> int:
    """Write a probability map; returns the payload CRC32."""
    data = encode_map(p)
    atomic_write_bytes(path, data)
    return _CRC.unpack(data[-4:])[0]


def _split(data: bytes, expected_magic: bytes, path) -> tuple[int, int, bytes]:
    name = str(path)
    if len(data) < _HEADER.size:
        raise MapFormatError(f"{name}: truncated header ({len(data)} bytes)", field="header")
    magic, version, reserved, w, h = _HEADER.unpack_from(data)
    if magic != expected_magic:
        raise MapFormatError(f"{name}: bad magic {magic!r}, expected {expected_magic!r}",
                             field="magic")
    if version != FORMAT_VERSION:
        raise MapFormatError(f"{name}: unsupported version {version}", field="version")
    if reserved != 0:
        raise MapFormatError(f"{name}: reserved field must be 0, got {reserved}",
                             field="reserved")
    if w == 0 or h == 0:
        raise MapFormatError(f"{name}: zero dimension {w}x{h}", field="dims")
    item = 4 if expected_magic == MAP_MAGIC else 1
    expected = _HEADER.size + item * w * h + _CRC.size
    if len(data) != expected:
        raise MapFormatError(f"{name}: size {len(data)} != expected {expected}",
                             field="payload")
    payload = data[_HEADER.size:-_CRC.size]
    stored = _CRC.unpack(data[-_CRC.size:])[0]
    if zlib.crc32(payload) != stored:
        raise MapFormatError(f"{name}: payload checksum mismatch", field="crc32")
    return w, h, payload


def decode_map(data: bytes, path="<bytes>") -> np.ndarray:
    w, h, payload = _split(data, MAP_MAGIC, path)
    arr = np.frombuffer(payload, dtype="<f4").reshape(h, w)
    return arr.astype(np.float32, copy=True)


def read_map(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_map(f.read(), path)


def encode_mask(m) -> bytes:
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise MapFormatError(f"mask must be 2-D, got shape {arr.shape}", field="dims")
    if arr.size == 0:
        raise MapFormatError("mask must have at least one pixel", field="dims")
    bits = arr.astype(bool).astype(np.uint8)
    h, w = bits.shape
    return _encode(MASK_MAGIC, bits.tobytes(), w, h)


def write_mask(m, path) -> int:
    data = encode_mask(m)
    atomic_write_bytes(path, data)
    return _CRC.unpack(data[-4:])[0]


def decode_mask(data: bytes, path="<bytes>") -> np.ndarray:
    w, h, payload = _split(data, MASK_MAGIC, path)
    arr = np.frombuffer(payload, dtype=np.uint8)
    if not np.isin(arr, (0, 1)).all():
        raise MapFormatError(f"{path}: mask bytes outside {{0, 1}}", field="payload")
    return arr.reshape(h, w).astype(bool)


def read_mask(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_mask(f.read(), path)


@dataclass(frozen=True)
class ManifestRecord:
    """One cached (or requested) probability map for a family box."""
    image_id: str
    i: int
    k: int
    x1: float
    y1: float
    x2: float
    y2: float
    path: str = ""       # empty in request manifests
    crc32: str = ""      # 8 hex digits once fulfilled

    @property
    def box_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def fulfilled(self, path: str, crc: int) -> "ManifestRecord":
        return replace(self, path=path, crc32=f"{crc:08x}")


def format_manifest(records, headers=None) -> str:
    lines = []
    for key, value in (headers or {}).items():
        lines.append(f"# {key}={value}")
    for r in records:
        lines.append("\t".join((r.image_id, str(r.i), str(r.k),
                                repr(float(r.x1)), repr(float(r.y1)),
                                repr(float(r.x2)), repr(float(r.y2)),
                                r.path, r.crc32)))
    return "\n".join(lines) + "\n"


def parse_manifest(text: str, path="<manifest>"):
    """Returns (headers dict, records list). Malformed lines raise a
    format error naming the line number."""
    headers: dict[str, str] = {}
    records: list[ManifestRecord] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                headers[key.strip()] = value.strip()
            continue
        fields = line.split("\t")
        if len(fields) != len(MANIFEST_FIELDS):
            raise MapFormatError(
                f"{path}:{lineno}: expected {len(MANIFEST_FIELDS)} fields, got {len(fields)}",
                field="manifest")
        try:
            records.append(ManifestRecord(
                image_id=fields[0], i=int(fields[1]), k=int(fields[2]),
                x1=float(fields[3]), y1=float(fields[4]),
                x2=float(fields[5]), y2=float(fields[6]),
                path=fields[7], crc32=fields[8]))
        except ValueError as exc:
            raise MapFormatError(f"{path}:{lineno}: {exc}", field="manifest") from exc
    return headers, records


def read_manifest(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_manifest(f.read(), path)


def write_manifest(records, path, headers=None) -> None:
    atomic_write_text(path, format_manifest(records, headers))
