"""Synthetic box-conditioned segmenter used as a closed-loop oracle.

Each scene is a union of seeded ellipses. The predicted probability is
sigmoid(kappa * signed_distance_to_gt) shaped by a soft box gate (so
the prompt actually matters) plus a smooth seeded noise field keyed by
the exact box coordinates (so every distinct prompt sees a genuinely
different map), clamped to [0, 1] and quantized to float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import InvalidArgumentError
from ..geometry import Box, require_valid
from ..rng import LEVEL_NOISE, LEVEL_SCENE, make_stream
from .base import Segmenter

# gate geometry relative to the box extent per axis
GATE_MARGIN_FRAC = 0.008
GATE_SOFT_FRAC = 0.015
GATE_SOFT_FLOOR_PX = 0.75
# the gate decays to this level, not to zero, so off-box foreground is
# attenuated below threshold rather than erased
GATE_FLOOR = 0.25
# smooth noise structure
NOISE_CELLS = 10
COORD_QUANTUM = 1e-6

DEFAULT_KAPPA = 0.9
DEFAULT_ETA = 0.45


@dataclass
class SyntheticScene:
    image_id: str
    width: int
    height: int
    ground_truth: np.ndarray          # bool (H, W), nonempty
    kappa: float = DEFAULT_KAPPA
    eta: float = DEFAULT_ETA
    seed: int = 0
    sdist: np.ndarray = field(default=None, repr=False)  # float64, >0 inside GT

    def __post_init__(self):
        gt = np.asarray(self.ground_truth).astype(bool)
        if gt.shape != (self.height, self.width):
            raise InvalidArgumentError(
                f"ground truth shape {gt.shape} != ({self.height}, {self.width})")
        if not gt.any():
            raise InvalidArgumentError("scene ground truth must be nonempty")
        if self.kappa <= 0:
            raise InvalidArgumentError(f"kappa must be > 0, got {self.kappa}")
        if not (0.0 <= self.eta < 0.5):
            raise InvalidArgumentError(f"eta must be in [0, 0.5), got {self.eta}")
        self.ground_truth = gt
        if self.sdist is None:
            inside = ndimage.distance_transform_edt(gt)
            outside = ndimage.distance_transform_edt(~gt)
            self.sdist = inside - outside

    @property
    def gt_box(self) -> Box:
        ys, xs = np.nonzero(self.ground_truth)
        return Box(float(xs.min()), float(ys.min()),
                   float(xs.max() + 1), float(ys.max() + 1))


def make_scene(image_id: str, width: int, height: int, seed: int,
               n_blobs=(1, 3), radius_frac=(0.06, 0.14),
               kappa: float = DEFAULT_KAPPA, eta: float = DEFAULT_ETA) -> SyntheticScene:
    """Seeded union-of-ellipses scene; same arguments, same scene."""
    if width < 8 or height < 8:
        raise InvalidArgumentError(f"scene must be at least 8x8, got {width}x{height}")
    lo, hi = int(n_blobs[0]), int(n_blobs[1])
    rf_lo, rf_hi = float(radius_frac[0]), float(radius_frac[1])
    if not (1 <= lo <= hi):
        raise InvalidArgumentError(f"bad blob count range {n_blobs}")
    if not (0.0 < rf_lo <= rf_hi):
        raise InvalidArgumentError(f"bad radius fraction range {radius_frac}")

    rng = make_stream(seed, image_id, LEVEL_SCENE)
    n = int(rng.integers(lo, hi + 1))
    base = min(width, height)
    xs = np.arange(width) + 0.5
    ys = np.arange(height) + 0.5
    px, py = np.meshgrid(xs, ys)
    gt = np.zeros((height, width), dtype=bool)
    for _ in range(n):
        cx = rng.uniform(0.25, 0.75) * width
        cy = rng.uniform(0.25, 0.75) * height
        a = max(1.5, rng.uniform(rf_lo, rf_hi) * base)
        b = max(1.5, rng.uniform(rf_lo, rf_hi) * base)
        theta = rng.uniform(0.0, math.pi)
        dx = px - cx
        dy = py - cy
        u = dx * math.cos(theta) + dy * math.sin(theta)
        v = -dx * math.sin(theta) + dy * math.cos(theta)
        gt |= (u / a) ** 2 + (v / b) ** 2 <= 1.0
    return SyntheticScene(image_id=image_id, width=width, height=height,
                          ground_truth=gt, kappa=kappa, eta=eta, seed=seed)


def _axis_gate(centers: np.ndarray, lo: float, hi: float) -> np.ndarray:
    extent = hi - lo
    margin = GATE_MARGIN_FRAC * extent
    soft = max(GATE_SOFT_FLOOR_PX, GATE_SOFT_FRAC * extent)
    rise = 1.0 / (1.0 + np.exp(-(centers - (lo - margin)) / soft))
    fall = 1.0 / (1.0 + np.exp(-((hi + margin) - centers) / soft))
    return GATE_FLOOR + (1.0 - GATE_FLOOR) * rise * fall


def _noise_field(scene: SyntheticScene, box: Box) -> np.ndarray:
    if scene.eta == 0.0:
        return np.zeros((scene.height, scene.width))
    q = [int(round(c / COORD_QUANTUM)) for c in box.as_tuple()]
    rng = make_stream(scene.seed, scene.image_id, LEVEL_NOISE, *q)
    grid = rng.uniform(-scene.eta, scene.eta, size=(NOISE_CELLS + 1, NOISE_CELLS + 1))
    gy = (np.arange(scene.height) + 0.5) / scene.height * NOISE_CELLS
    gx = (np.arange(scene.width) + 0.5) / scene.width * NOISE_CELLS
    y0 = np.clip(np.floor(gy).astype(int), 0, NOISE_CELLS - 1)
    x0 = np.clip(np.floor(gx).astype(int), 0, NOISE_CELLS - 1)
    fy = (gy - y0)[:, None]
    fx = (gx - x0)[None, :]
    v00 = grid[np.ix_(y0, x0)]
    v10 = grid[np.ix_(y0 + 1, x0)]
    v01 = grid[np.ix_(y0, x0 + 1)]
    v11 = grid[np.ix_(y0 + 1, x0 + 1)]
    return (v00 * (1 - fy) * (1 - fx) + v10 * fy * (1 - fx)
            + v01 * (1 - fy) * fx + v11 * fy * fx)


def synthetic_predict(scene: SyntheticScene, box: Box) -> np.ndarray:
    """Deterministic probability map for one prompt on one scene."""
    require_valid(box)
    if not (0.0 <= box.x1 and box.x2 <= scene.width
            and 0.0 <= box.y1 and box.y2 <= scene.height):
        raise InvalidArgumentError(
            f"box {box.as_tuple()} outside scene {scene.width}x{scene.height}")
    xs = np.arange(scene.width) + 0.5
    ys = np.arange(scene.height) + 0.5
    gate = np.outer(_axis_gate(ys, box.y1, box.y2), _axis_gate(xs, box.x1, box.x2))
    core = 1.0 / (1.0 + np.exp(-scene.kappa * scene.sdist))
    p = core * gate + _noise_field(scene, box)
    return np.clip(p, 0.0, 1.0).astype(np.float32)


class SyntheticSegmenter(Segmenter):
    """Segmenter facade over synthetic_predict; image_ref is a scene."""

    def predict(self, image_ref: SyntheticScene, box: Box) -> np.ndarray:
        return synthetic_predict(image_ref, box)
