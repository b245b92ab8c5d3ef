"""Request and map manifests.

Tab-separated rows of (image_id, i, k, x1, y1, x2, y2, path, crc32)
under '# key=value' header lines. Coordinate fields are kept as the
exact text they arrived with so that fulfillment never rewrites a box;
the parsed float values are only used to drive the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import RequestFormatError

FIELDS = ("image_id", "i", "k", "x1", "y1", "x2", "y2", "path", "crc32")


@dataclass(frozen=True)
class RequestLine:
    image_id: str
    i: int
    k: int
    box_text: tuple[str, str, str, str]
    path: str = ""
    crc32: str = ""

    @property
    def box(self) -> tuple[float, float, float, float]:
        return tuple(float(t) for t in self.box_text)

    def fulfilled(self, path: str, crc_hex: str) -> "RequestLine":
        return replace(self, path=path, crc32=crc_hex)

    def failed(self) -> "RequestLine":
        return replace(self, path="", crc32="FAILED")


@dataclass
class RequestFile:
    headers: dict[str, str] = field(default_factory=dict)
    lines: list[RequestLine] = field(default_factory=list)

    def _int_header(self, key: str) -> int:
        if key not in self.headers:
            raise RequestFormatError(f"missing required header {key!r}")
        try:
            return int(self.headers[key])
        except ValueError as exc:
            raise RequestFormatError(
                f"bad header {key}={self.headers[key]!r}") from exc

    @property
    def image_id(self) -> str:
        return self.headers.get("image_id", "")

    @property
    def image_path(self) -> str:
        return self.headers.get("image_path", "")

    @property
    def width(self) -> int:
        return self._int_header("width")

    @property
    def height(self) -> int:
        return self._int_header("height")


def parse_requests(text: str, path: str = "<requests>") -> RequestFile:
    rf = RequestFile()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                rf.headers[key.strip()] = value.strip()
            continue
        fields = line.split("\t")
        if len(fields) != len(FIELDS):
            raise RequestFormatError(
                f"{path}:{lineno}: expected {len(FIELDS)} fields, got {len(fields)}")
        try:
            i, k = int(fields[1]), int(fields[2])
            coords = tuple(fields[3:7])
            for tok in coords:
                float(tok)
        except ValueError as exc:
            raise RequestFormatError(f"{path}:{lineno}: {exc}") from exc
        rf.lines.append(RequestLine(image_id=fields[0], i=i, k=k,
                                    box_text=coords,
                                    path=fields[7], crc32=fields[8]))
    return rf


def read_requests(path: str) -> RequestFile:
    with open(path, "r", encoding="utf-8") as f:
        return parse_requests(f.read(), path)


def format_requests(headers: dict, lines) -> str:
    out = [f"# {key}={value}" for key, value in headers.items()]
    for ln in lines:
        out.append("\t".join((ln.image_id, str(ln.i), str(ln.k),
                              *ln.box_text, ln.path, ln.crc32)))
    return "\n".join(out) + "\n"
