"""Stability-consistency scoring over the joint prompt/threshold space.

For each outer candidate and each threshold, the K inner-jitter masks
are compared to their own pixel-wise consensus via soft IoU; the mean
and population standard deviation of those K agreements give the
variance-penalized score SC = mu - lam*sigma, multiplied by an area
gate that down-weights near-empty or near-full solutions. The shared
threshold tau* maximizes the candidate-average gated score, with exact
ties resolved toward the smaller (more conservative) threshold.

Determinism contract: pixel reductions are exact integer counts and
scalar reductions over jitters/candidates use math.fsum, so independent
recomputation from the same maps is bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SaifConfig
from .errors import DegenerateFamilyError, InvalidArgumentError
from .family import PromptFamily
from .geometry import raster_area, raster_slice
from .thresholds import ThresholdSet


def binarize(p: np.ndarray, tau: float) -> np.ndarray:
    """Strict per-pixel threshold: mask = (p > tau).

    Compared in float64: thresholds are float64 scalars and numpy would
    otherwise demote them to the map dtype, flipping pixels that sit
    between a float32 threshold and its float64 value.
    """
    if not (0.0 <= tau <= 1.0):
        raise InvalidArgumentError(f"threshold must be in [0, 1], got {tau}")
    return np.asarray(p, dtype=np.float64) > tau


def consensus(masks) -> np.ndarray:
    """Per-pixel mean of K binary masks (each mask counts itself)."""
    ms = [np.asarray(m) for m in masks]
    if not ms:
        raise InvalidArgumentError("consensus needs at least one mask")
    shape = ms[0].shape
    if any(m.shape != shape for m in ms):
        raise InvalidArgumentError("consensus masks must share dimensions")
    counts = np.zeros(shape, dtype=np.int64)
    for m in ms:
        counts += m.astype(np.int64)
    return counts / float(len(ms))


def soft_iou(mask: np.ndarray, cons: np.ndarray, eps: float) -> float:
    """Sum(min(mask, cons)) / (Sum(max(mask, cons)) + eps), mask read as {0,1}.

    Both sums run over the full grid; an empty mask against an empty
    consensus yields 0 (not 1) because only eps survives in the
    denominator.
    """
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be > 0, got {eps}")
    m = np.asarray(mask)
    c = np.asarray(cons)
    if m.shape != c.shape:
        raise InvalidArgumentError(f"dimension mismatch: mask {m.shape} vs consensus {c.shape}")
    mf = m.astype(np.float64)
    cf = c.astype(np.float64)
    num = float(np.minimum(mf, cf).sum())
    den = float(np.maximum(mf, cf).sum()) + eps
    return num / den


def score_candidate(siou_values, occupancy: float, cfg: SaifConfig):
    """Summarize one candidate at one threshold.

    Returns (mu, sigma, sc, gate, score): mu/sigma are the mean and
    population standard deviation of the K soft-IoU values, sc is the
    variance-penalized mu - lam*sigma (sign preserved), and the gate is
    1 inside the open occupancy interval (a_min, a_max) and gamma
    outside it.
    """
    vals = [float(v) for v in siou_values]
    if not vals:
        raise InvalidArgumentError("score_candidate needs at least one soft-IoU value")
    if not (0.0 <= occupancy <= 1.0):
        raise InvalidArgumentError(f"occupancy must be in [0, 1], got {occupancy}")
    k = len(vals)
    mu = math.fsum(vals) / k
    sigma = math.sqrt(math.fsum((v - mu) ** 2 for v in vals) / k)
    sc = mu - cfg.lam * sigma
    gate = 1.0 if (cfg.a_min < occupancy < cfg.a_max) else cfg.gamma
    return mu, sigma, sc, gate, sc * gate


@dataclass(frozen=True)
class ScoreTable:
    """Per-(candidate, threshold) stability scores.

    Arrays are indexed [ci][ti] where ci enumerates candidate_indices
    (the retained 1-based candidate ids, ascending) and ti enumerates
    taus (ascending). siou keeps the per-jitter agreement values for
    diagnostics.
    """
    candidate_indices: tuple[int, ...]
    taus: tuple[float, ...]
    mu: np.ndarray         # (|I|, M) float64
    sigma: np.ndarray
    sc: np.ndarray
    occupancy: np.ndarray
    gate: np.ndarray
    score: np.ndarray
    siou: tuple[tuple[tuple[float, ...], ...], ...]  # [ci][ti][k]

    def column(self, tau: float) -> dict[int, float]:
        """Candidate index -> gated score at threshold tau."""
        ti = self.taus.index(tau)
        return {i: float(self.score[ci, ti]) for ci, i in enumerate(self.candidate_indices)}


def compute_score_table(family: PromptFamily, maps: dict, tset: ThresholdSet,
                        cfg: SaifConfig) -> ScoreTable:
    """Score every retained (candidate, threshold) pair from cached maps.

    maps holds one probability map per family box, keyed (i, k) with
    1-based indices. Occupancy is the pooled foreground fraction of the
    K masks inside the candidate's clamped box.

    The soft-IoU sums are evaluated through exact integer counts:
    with consensus counts c and a member mask m over the full grid,
    sum(min(m, c/K)) = A/K and sum(max(m, c/K)) = |m| + (S-A)/K where
    A = sum of c over m's pixels and S = sum of c; both are integers, so
    the only roundings happen in the final scalar expressions.
    """
    if not family.outer:
        raise DegenerateFamilyError("cannot score an empty family")
    n_cand = len(family.outer)
    m_taus = len(tset.taus)
    shape = (n_cand, m_taus)
    mu = np.zeros(shape)
    sigma = np.zeros(shape)
    sc = np.zeros(shape)
    occ = np.zeros(shape)
    gate = np.zeros(shape)
    score = np.zeros(shape)
    siou_all = []

    first = maps[(family.outer[0].index, 1)]
    h, w = np.asarray(first).shape
    for ci, cand in enumerate(family.outer):
        # float64 so threshold comparisons never round tau to float32
        stack = np.stack([np.asarray(maps[(cand.index, kj)], dtype=np.float64).reshape(h * w)
                          for kj in range(1, cand.k + 1)])
        k = cand.k
        rows, cols = raster_slice(cand.box, w, h)
        box_cols = np.zeros((h, w), dtype=bool)
        box_cols[rows, cols] = True
        box_flat = box_cols.reshape(h * w)
        area = raster_area(cand.box, w, h)
        cand_rows = []
        for ti, tau in enumerate(tset.taus):
            masks = stack > tau                      # (k, H*W) bool
            counts = masks.sum(axis=0, dtype=np.int64)
            s_total = int(counts.sum())
            a_vals = (masks * counts).sum(axis=1)    # per-jitter A
            m_sizes = masks.sum(axis=1, dtype=np.int64)
            sious = []
            for kj in range(k):
                a = int(a_vals[kj])
                msize = int(m_sizes[kj])
                num = a / k
                den = msize + (s_total - a) / k + cfg.eps
                sious.append(num / den)
            in_box = int(counts[box_flat].sum())
            a_frac = in_box / (k * area)
            mu_v, sg_v, sc_v, r_v, s_v = score_candidate(sious, a_frac, cfg)
            mu[ci, ti] = mu_v
            sigma[ci, ti] = sg_v
            sc[ci, ti] = sc_v
            occ[ci, ti] = a_frac
            gate[ci, ti] = r_v
            score[ci, ti] = s_v
            cand_rows.append(tuple(sious))
        siou_all.append(tuple(cand_rows))

    return ScoreTable(candidate_indices=family.indices, taus=tset.taus,
                      mu=mu, sigma=sigma, sc=sc, occupancy=occ, gate=gate,
                      score=score, siou=tuple(siou_all))


def select_threshold(table: ScoreTable) -> float:
    """Threshold maximizing the candidate-average gated score; exact ties
    go to the smallest threshold."""
    if not table.candidate_indices:
        raise DegenerateFamilyError("threshold selection needs at least one candidate")
    n = len(table.candidate_indices)
    best_tau = None
    best_mean = -math.inf
    for ti, tau in enumerate(table.taus):
        mean = math.fsum(float(table.score[ci, ti]) for ci in range(n)) / n
        if mean > best_mean:
            best_mean = mean
            best_tau = tau
    return float(best_tau)


SCORE_TABLE_HEADER = ("candidate", "tau", "mu", "sigma", "sc",
                      "occupancy", "gate", "score")


def format_score_table(table: ScoreTable) -> str:
    """Tab-separated diagnostic dump, one row per (candidate, threshold)."""
    lines = ["\t".join(SCORE_TABLE_HEADER)]
    for ci, i in enumerate(table.candidate_indices):
        for ti, tau in enumerate(table.taus):
            lines.append("\t".join([
                str(i), repr(float(tau)),
                repr(float(table.mu[ci, ti])), repr(float(table.sigma[ci, ti])),
                repr(float(table.sc[ci, ti])), repr(float(table.occupancy[ci, ti])),
                repr(float(table.gate[ci, ti])), repr(float(table.score[ci, ti])),
            ]))
    return "\n".join(lines) + "\n"
