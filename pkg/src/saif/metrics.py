"""Mask quality metrics: Dice, IoU, HD95, and corpus aggregation.

Empty-mask conventions (both empty: dice=iou=1, hd95=0; exactly one
empty: hd95 = image diagonal in mm) are counted per report so they
cannot silently skew corpus means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError
from .thresholds import percentile


def _as_mask(a) -> np.ndarray:
    return np.asarray(a).astype(bool)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidArgumentError(f"mask dimensions differ: {a.shape} vs {b.shape}")


def dice(a, b) -> float:
    """2|a&b| / (|a|+|b|); both masks empty gives 1.0 by convention."""
    a = _as_mask(a)
    b = _as_mask(b)
    _check_pair(a, b)
    na = int(a.sum())
    nb = int(b.sum())
    if na + nb == 0:
        return 1.0
    inter = int((a & b).sum())
    return 2.0 * inter / (na + nb)


def iou(a, b) -> float:
    """|a&b| / |a or b|; both masks empty gives 1.0 by convention."""
    a = _as_mask(a)
    b = _as_mask(b)
    _check_pair(a, b)
    inter = int((a & b).sum())
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return inter / union


def boundary_pixels(mask) -> np.ndarray:
    """Foreground pixels with at least one 4-neighbor background pixel;
    pixels touching the image border count as boundary."""
    m = _as_mask(mask)
    if m.ndim != 2:
        raise InvalidArgumentError(f"mask must be 2-D, got shape {m.shape}")
    padded = np.pad(m, 1, mode="constant", constant_values=False)
    any_bg = (~padded[:-2, 1:-1] | ~padded[2:, 1:-1]
              | ~padded[1:-1, :-2] | ~padded[1:-1, 2:])
    return m & any_bg


def hd95(a, b, spacing=(1.0, 1.0)):
    """95th percentile of pooled boundary-to-boundary distances, in mm.

    spacing is (row mm/px, col mm/px). Both masks empty -> (0.0, not
    flagged); exactly one empty -> (image diagonal in mm, flagged).
    Returns (value, convention) where convention is None, "both-empty"
    or "one-empty".
    """
    a = _as_mask(a)
    b = _as_mask(b)
    _check_pair(a, b)
    sy, sx = float(spacing[0]), float(spacing[1])
    if sy <= 0 or sx <= 0:
        raise InvalidArgumentError(f"spacing must be positive, got {spacing}")
    ea = a.any()
    eb = b.any()
    if not ea and not eb:
        return 0.0, "both-empty"
    if ea != eb:
        h, w = a.shape
        return math.hypot(h * sy, w * sx), "one-empty"

    ba = boundary_pixels(a)
    bb = boundary_pixels(b)
    # distance from every pixel to the nearest boundary pixel of the other mask
    dist_to_bb = ndimage.distance_transform_edt(~bb, sampling=(sy, sx))
    dist_to_ba = ndimage.distance_transform_edt(~ba, sampling=(sy, sx))
    pooled = np.concatenate([dist_to_bb[ba], dist_to_ba[bb]])
    return float(percentile(pooled, 95.0)), None


@dataclass(frozen=True)
class ImageEval:
    image_id: str
    dice: float
    iou: float
    hd95: float
    convention: str | None = None   # empty-mask convention applied to hd95, if any


@dataclass(frozen=True)
class EvalReport:
    """Per-image metrics plus corpus means (dice/iou as percentages)."""
    entries: tuple[ImageEval, ...]
    missing: tuple[str, ...] = field(default=())

    @property
    def mdice(self) -> float:
        return 100.0 * math.fsum(e.dice for e in self.entries) / len(self.entries)

    @property
    def miou(self) -> float:
        return 100.0 * math.fsum(e.iou for e in self.entries) / len(self.entries)

    @property
    def mean_hd95(self) -> float:
        return math.fsum(e.hd95 for e in self.entries) / len(self.entries)

    @property
    def convention_counts(self) -> dict[str, int]:
        counts = {"both-empty": 0, "one-empty": 0}
        for e in self.entries:
            if e.convention is not None:
                counts[e.convention] += 1
        return counts

    def format_table(self) -> str:
        lines = ["\t".join(("image_id", "dice", "iou", "hd95", "convention"))]
        for e in self.entries:
            lines.append("\t".join((e.image_id, repr(100.0 * e.dice),
                                    repr(100.0 * e.iou), repr(e.hd95),
                                    e.convention or "-")))
        return "\n".join(lines) + "\n"

    def format_summary(self) -> str:
        counts = self.convention_counts
        lines = [
            f"images={len(self.entries)}",
            f"missing={len(self.missing)}",
            f"mdice={repr(self.mdice)}",
            f"miou={repr(self.miou)}",
            f"mean_hd95={repr(self.mean_hd95)}",
            f"conv_both_empty={counts['both-empty']}",
            f"conv_one_empty={counts['one-empty']}",
        ]
        for name in self.missing:
            lines.append(f"missing_id={name}")
        return "\n".join(lines) + "\n"


def evaluate_pairs(pairs, spacing=(1.0, 1.0), missing=()) -> EvalReport:
    """pairs: iterable of (image_id, predicted mask, ground-truth mask)."""
    entries = []
    for image_id, pred, gt in pairs:
        h, conv = hd95(pred, gt, spacing)
        entries.append(ImageEval(image_id=image_id, dice=dice(pred, gt),
                                 iou=iou(pred, gt), hd95=h, convention=conv))
    if not entries:
        raise InvalidArgumentError("evaluate_pairs needs at least one pair")
    return EvalReport(entries=tuple(entries), missing=tuple(missing))
