"""Top-n selection, inner averaging, weighted map fusion, and the
end-to-end orchestration that turns cached probability maps into one
final mask.

Weights are the gated stability scores at tau*, normalized over the
selected candidates. Score normalization is only a convex combination
when scores are positive, so a non-positive sum or any negative
selected score switches to uniform weights and raises the
fallback_used flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import SaifConfig
from .errors import DegenerateFamilyError, InputIncompleteError, InvalidArgumentError
from .family import PromptFamily, build_family
from .geometry import Box
from .stability import ScoreTable, compute_score_table, select_threshold
from .thresholds import ThresholdSet, build_threshold_set


@dataclass(frozen=True)
class FusionResult:
    selected: tuple[int, ...]
    weights: tuple[float, ...]
    fused: np.ndarray            # float64 per-pixel fused probabilities
    final_mask: np.ndarray       # bool, fused > tau_star
    tau_star: float
    fallback_used: bool
    # diagnostics beyond the core contract
    threshold_provenance: str = "grid"
    fallback_reasons: tuple[str, ...] = field(default=())
    table: ScoreTable | None = None


def select_top_n(table: ScoreTable, tau_star: float, n: int) -> tuple[int, ...]:
    """Indices of the n best-scoring candidates at tau*, best first.

    Exact score ties keep the smaller candidate index earlier; asking
    for more candidates than exist returns them all.
    """
    if n < 1:
        raise InvalidArgumentError(f"top-n must be >= 1, got {n}")
    if not table.candidate_indices:
        raise DegenerateFamilyError("cannot select from an empty candidate set")
    col = table.column(tau_star)
    ranked = sorted(col, key=lambda i: (-col[i], i))
    return tuple(ranked[:min(n, len(ranked))])


def inner_average(maps) -> np.ndarray:
    """Per-pixel arithmetic mean of the K inner-jitter maps.

    Accumulates in float64 in the given order and divides once, so a
    naive per-pixel loop reproduces it bit-exactly.
    """
    ms = [np.asarray(m) for m in maps]
    if not ms:
        raise InvalidArgumentError("inner_average needs at least one map")
    shape = ms[0].shape
    if any(m.shape != shape for m in ms):
        raise InvalidArgumentError("inner_average maps must share dimensions")
    acc = np.zeros(shape, dtype=np.float64)
    for m in ms:
        acc = acc + m.astype(np.float64)
    return acc / len(ms)


def fuse(selected, table: ScoreTable, averaged: dict, tau_star: float) -> FusionResult:
    """Score-normalized weighted sum of the selected averaged maps,
    binarized at tau*.

    averaged maps candidate index -> inner-average map. Accumulation
    runs in selected order with float64 scalars, matching the naive
    re-evaluation path bit-exactly.
    """
    sel = tuple(int(i) for i in selected)
    if not sel:
        raise InvalidArgumentError("fuse needs at least one selected candidate")
    shapes = {np.asarray(averaged[i]).shape for i in sel}
    if len(shapes) != 1:
        raise InvalidArgumentError("averaged maps must share dimensions")

    col = table.column(tau_star)
    scores = [col[i] for i in sel]
    total = math.fsum(scores)
    reasons: list[str] = []
    if total <= 0.0 or any(s < 0.0 for s in scores):
        weights = tuple(1.0 / len(sel) for _ in sel)
        reasons.append("uniform-weights")
    else:
        weights = tuple(s / total for s in scores)

    shape = shapes.pop()
    fused = np.zeros(shape, dtype=np.float64)
    for i, w in zip(sel, weights):
        fused = fused + w * np.asarray(averaged[i], dtype=np.float64)
    final = fused > tau_star
    return FusionResult(selected=sel, weights=weights, fused=fused,
                        final_mask=final, tau_star=float(tau_star),
                        fallback_used=bool(reasons),
                        fallback_reasons=tuple(reasons), table=table)


def _vanilla_result(p0: np.ndarray, reason: str) -> FusionResult:
    p = np.asarray(p0, dtype=np.float64)
    return FusionResult(selected=(1,), weights=(1.0,), fused=p,
                        final_mask=p > 0.5, tau_star=0.5, fallback_used=True,
                        threshold_provenance="vanilla",
                        fallback_reasons=(reason,), table=None)


def run_saif(image_id: str, p_maps: dict, box: Box, cfg: SaifConfig,
             width: int | None = None, height: int | None = None) -> FusionResult:
    """Full decision stage over cached maps: thresholds from the base
    map, stability scoring, shared tau*, top-n fusion, binarization.

    p_maps is keyed (candidate index, jitter index), 1-based, and must
    cover every retained family box. Image dimensions default to the
    shape of the first provided map. If the whole family is rejected,
    degrades to thresholding the base map at 0.5 with fallback_used.
    """
    if not p_maps:
        raise InputIncompleteError("no cached maps supplied", missing=["(1, 1)"])
    if width is None or height is None:
        h, w = np.asarray(next(iter(p_maps.values()))).shape
        width = w if width is None else width
        height = h if height is None else height

    try:
        family = build_family(box, cfg, width, height, image_id=image_id)
    except DegenerateFamilyError:
        if (1, 1) in p_maps:
            return _vanilla_result(p_maps[(1, 1)], "degenerate-family")
        raise

    missing = [(cand.index, k) for cand in family.outer
               for k in range(1, cand.k + 1) if (cand.index, k) not in p_maps]
    if missing:
        raise InputIncompleteError(
            f"cached maps missing for {len(missing)} retained boxes",
            missing=[str(m) for m in missing])

    base = family.outer[0]
    p0 = np.asarray(p_maps[(base.index, 1)])
    tset: ThresholdSet = build_threshold_set(p0, base.box, cfg)
    table = compute_score_table(family, p_maps, tset, cfg)
    tau_star = select_threshold(table)
    selected = select_top_n(table, tau_star, cfg.top_n)
    averaged = {cand.index: inner_average([p_maps[(cand.index, k)]
                                           for k in range(1, cand.k + 1)])
                for cand in family.outer if cand.index in selected}
    result = fuse(selected, table, averaged, tau_star)
    if tset.provenance != result.threshold_provenance:
        result = replace(result, threshold_provenance=tset.provenance)
    return result
