"""Image-adaptive threshold set construction.

The candidate decision thresholds are an M-point uniform grid over a
robust interval derived from the reference probability map restricted to
the prompt box: [max(tau_min, q10+margin), min(tau_max, q90-margin)].
When that interval collapses the set degenerates to the clipped median
(provenance "fallback-median"), so a single usable threshold always
exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SaifConfig
from .errors import DegenerateFamilyError, InvalidArgumentError
from .geometry import Box, raster_slice

PROVENANCE_GRID = "grid"
PROVENANCE_FALLBACK = "fallback-median"


@dataclass(frozen=True)
class ThresholdSet:
    taus: tuple[float, ...]
    provenance: str  # PROVENANCE_GRID or PROVENANCE_FALLBACK

    def __post_init__(self):
        if not self.taus:
            raise InvalidArgumentError("threshold set must be nonempty")


def percentile(values, p: float) -> float:
    """Linear-interpolation percentile of a nonempty multiset.

    With sorted values x[0..n-1], the rank is (p/100)*(n-1) and the
    result is x[lo] + frac*(x[hi]-x[lo]). The expression is pinned so an
    independent sort-and-interpolate computation reproduces it bitwise.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidArgumentError("percentile of an empty multiset is undefined")
    if not (0.0 <= p <= 100.0):
        raise InvalidArgumentError(f"percentile rank must be in [0, 100], got {p}")
    xs = np.sort(arr)
    rank = (p / 100.0) * (xs.size - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    frac = rank - lo
    return float(xs[lo] + frac * (xs[hi] - xs[lo]))


def _grid(tau_lo: float, tau_hi: float, m: int) -> list[float]:
    # Endpoints are pinned exactly; interior points interpolate.
    taus = []
    for j in range(m):
        if j == 0:
            taus.append(tau_lo)
        elif j == m - 1:
            taus.append(tau_hi)
        else:
            taus.append(tau_lo + (j / (m - 1)) * (tau_hi - tau_lo))
    return taus


def build_threshold_set(p0: np.ndarray, box: Box, cfg: SaifConfig) -> ThresholdSet:
    """Build the threshold set from reference map p0 restricted to box.

    box is the clamped original prompt; its rasterization must be
    nonempty. Returns the M-point grid when the robust interval is
    proper, the interval midpoint when m_grid == 1, and the clipped
    in-box median otherwise.
    """
    p0 = np.asarray(p0)
    if p0.ndim != 2:
        raise InvalidArgumentError(f"probability map must be 2-D, got shape {p0.shape}")
    h, w = p0.shape
    crop = p0[raster_slice(box, w, h)]
    if crop.size == 0:
        raise DegenerateFamilyError(f"box {box.as_tuple()} rasterizes to zero pixels")
    region = crop.astype(np.float64, copy=False).ravel()
    q10 = percentile(region, 10.0)
    q90 = percentile(region, 90.0)
    tau_lo = max(cfg.tau_min, q10 + cfg.tau_margin)
    tau_hi = min(cfg.tau_max, q90 - cfg.tau_margin)
    if tau_lo < tau_hi:
        if cfg.m_grid == 1:
            return ThresholdSet(taus=((tau_lo + tau_hi) / 2.0,), provenance=PROVENANCE_GRID)
        taus = _grid(tau_lo, tau_hi, cfg.m_grid)
        if all(a < b for a, b in zip(taus, taus[1:])):
            return ThresholdSet(taus=tuple(taus), provenance=PROVENANCE_GRID)
        # Interval too narrow for m_grid distinct floats; collapse to midpoint.
        return ThresholdSet(taus=((tau_lo + tau_hi) / 2.0,), provenance=PROVENANCE_GRID)
    median = percentile(region, 50.0)
    clipped = min(max(median, cfg.tau_min), cfg.tau_max)
    return ThresholdSet(taus=(clipped,), provenance=PROVENANCE_FALLBACK)
