"""Axis-aligned box prompts and their perturbation primitives.

Coordinates are continuous pixel units with the origin at the top-left
image corner; a box (x1, y1, x2, y2) covers [x1, x2) x [y1, y2).
Rasterization uses the pixel-center rule: pixel (x, y) belongs to the
box iff x1 <= x+0.5 < x2 and y1 <= y+0.5 < y2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Box:
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def is_valid(self) -> bool:
        coords = (self.x1, self.y1, self.x2, self.y2)
        return all(math.isfinite(c) for c in coords) and self.x1 < self.x2 and self.y1 < self.y2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


def require_valid(b: Box) -> Box:
    if not b.is_valid():
        raise InvalidArgumentError(f"invalid box {b.as_tuple()}: need finite x1 < x2 and y1 < y2")
    return b


def scale_box(b: Box, alpha: float) -> Box:
    """Scale both extents by alpha about the box center."""
    require_valid(b)
    if not (alpha > 0):
        raise InvalidArgumentError(f"scale factor must be positive, got {alpha}")
    cx = 0.5 * (b.x1 + b.x2)
    cy = 0.5 * (b.y1 + b.y2)
    hw = 0.5 * b.width * alpha
    hh = 0.5 * b.height * alpha
    return Box(cx - hw, cy - hh, cx + hw, cy + hh)


def jitter_box(b: Box, delta: float, rng: np.random.Generator) -> Box:
    """Shift each boundary independently by Uniform[-delta, delta] times the
    box extent along that boundary's axis.

    Draw order is fixed at (x1, y1, x2, y2); delta=0 is the exact identity.
    Invalid results (crossed edges) are not rejected here; validity is
    decided downstream by clamp_and_validate.
    """
    if delta < 0:
        raise InvalidArgumentError(f"jitter magnitude must be >= 0, got {delta}")
    u = rng.uniform(-delta, delta, size=4)
    w = b.width
    h = b.height
    return Box(b.x1 + u[0] * w, b.y1 + u[1] * h, b.x2 + u[2] * w, b.y2 + u[3] * h)


def clip_box(b: Box, width: int, height: int) -> Box:
    """Clip coordinates to the image domain [0, W] x [0, H]."""
    return Box(
        min(max(b.x1, 0.0), float(width)),
        min(max(b.y1, 0.0), float(height)),
        min(max(b.x2, 0.0), float(width)),
        min(max(b.y2, 0.0), float(height)),
    )


def clamp_and_validate(b: Box, width: int, height: int, min_box_px: int) -> Box | None:
    """Clip to the image and reject too-small results.

    Returns the clamped box, or None when the post-clip width or height
    falls below min_box_px (rejection is a value, not a failure).
    """
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"image dimensions must be >= 1, got {width}x{height}")
    c = clip_box(b, width, height)
    if c.width < min_box_px or c.height < min_box_px:
        return None
    return c


def raster_bounds(b: Box, width: int, height: int) -> tuple[int, int, int, int]:
    """Pixel-index bounds (x0, y0, x_end, y_end) of the box under the
    pixel-center rule, clamped to the image; empty ranges are possible."""
    x0 = max(0, math.ceil(b.x1 - 0.5))
    y0 = max(0, math.ceil(b.y1 - 0.5))
    x_end = min(width, math.ceil(b.x2 - 0.5))
    y_end = min(height, math.ceil(b.y2 - 0.5))
    return x0, y0, x_end, y_end


def raster_slice(b: Box, width: int, height: int) -> tuple[slice, slice]:
    """(row_slice, col_slice) selecting the box's pixels in an (H, W) grid."""
    x0, y0, x_end, y_end = raster_bounds(b, width, height)
    return slice(y0, y_end), slice(x0, x_end)


def raster_area(b: Box, width: int, height: int) -> int:
    x0, y0, x_end, y_end = raster_bounds(b, width, height)
    return max(0, x_end - x0) * max(0, y_end - y0)
