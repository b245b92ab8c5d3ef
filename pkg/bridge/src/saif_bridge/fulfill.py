"""Turn a request manifest into map files plus a completed manifest.

One map per request line, written next to the request file under
maps/. A line whose map already exists and verifies is skipped, so
reruns cost zero model calls. A model failure marks that line FAILED
(path left empty) and the rest are still produced; downstream readers
treat the empty path as a missing input.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelOutputError
from .images import load_image
from .manifest import format_requests, read_requests
from .spfm import verify_map_file, write_map_file


@dataclass
class FulfillSummary:
    image_id: str
    calls: int = 0
    skipped: int = 0
    failed: list = field(default_factory=list)   # (i, k) pairs

    @property
    def produced(self) -> int:
        return self.calls + self.skipped


def map_filename(i: int, k: int) -> str:
    return os.path.join("maps", f"i{i:02d}_k{k:02d}.spfm")


def _atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(text)
    os.replace(tmp, path)


def fulfill_requests(request_path: str, model, out_root=None) -> FulfillSummary:
    rf = read_requests(request_path)
    root = out_root if out_root is not None else os.path.dirname(request_path)
    summary = FulfillSummary(image_id=rf.image_id)
    if rf.lines:
        width, height = rf.width, rf.height
        os.makedirs(os.path.join(root, "maps"), exist_ok=True)
    image = load_image(rf.image_path) if rf.image_path else None
    completed = []
    for line in rf.lines:
        rel = map_filename(line.i, line.k)
        full = os.path.join(root, rel)
        crc = verify_map_file(full, width, height)
        if crc is not None:
            summary.skipped += 1
            completed.append(line.fulfilled(rel, crc))
            continue
        try:
            probs = model.predict(image, line.box, width, height)
            summary.calls += 1
            if np.asarray(probs).shape != (height, width):
                raise ModelOutputError(
                    f"({line.i}, {line.k}): model returned shape "
                    f"{np.asarray(probs).shape}, expected ({height}, {width})")
            crc = write_map_file(probs, full)
        except OSError:
            raise               # disk trouble is not a model failure
        except Exception:
            summary.failed.append((line.i, line.k))
            completed.append(line.failed())
            continue
        completed.append(line.fulfilled(rel, crc))
    _atomic_write_text(os.path.join(root, "manifest.txt"),
                       format_requests(rf.headers, completed))
    return summary
