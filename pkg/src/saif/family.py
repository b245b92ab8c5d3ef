"""Two-level coarse-to-fine prompt family construction.

From one user box B the family holds up to N outer candidates (scaled
and coarsely jittered hypotheses) each carrying up to K inner jitters
(fine perturbations probing local stability). Candidate 1 is always the
unperturbed clamped B, and the first inner entry of every candidate is
the candidate box itself, so the reference prediction needs no extra
forward pass and the total box count never exceeds N*K.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import SaifConfig
from .errors import DegenerateFamilyError
from .geometry import Box, clamp_and_validate, jitter_box, require_valid, scale_box
from .rng import LEVEL_INNER, LEVEL_OUTER, make_stream


@dataclass(frozen=True)
class OuterCandidate:
    index: int              # 1-based candidate index i
    scale: float            # alpha applied to the user box
    box: Box                # clamped B_i
    inner: tuple[Box, ...]  # inner[0] == box; clamped, possibly fewer than K

    @property
    def k(self) -> int:
        return len(self.inner)


@dataclass(frozen=True)
class PromptFamily:
    image_id: str
    outer: tuple[OuterCandidate, ...]  # retained candidates, ascending index

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(c.index for c in self.outer)

    @property
    def total_boxes(self) -> int:
        return sum(c.k for c in self.outer)

    def boxes(self):
        """Yield (candidate_index, jitter_index, box) with 1-based indices."""
        for cand in self.outer:
            for kj, box in enumerate(cand.inner, start=1):
                yield cand.index, kj, box


def build_family(b: Box, cfg: SaifConfig, width: int, height: int,
                 image_id: str = "") -> PromptFamily:
    """Build the retained prompt family for box b on a width x height image.

    Candidate 1 is the identity (alpha=1, no coarse jitter); candidates
    2..N cycle through cfg.scales in order and receive a delta_out jitter.
    Every box is clamped and size-validated; a rejected candidate box
    drops the whole candidate, rejected inner jitters are dropped alone.
    Raises DegenerateFamilyError when nothing survives.

    Draws come from streams keyed by (seed, image_id, candidate, level),
    so the result is independent of evaluation order.
    """
    require_valid(b)
    candidates = []
    for i in range(1, cfg.n_outer + 1):
        if i == 1:
            alpha = 1.0
            raw = b
        else:
            alpha = cfg.scales[(i - 2) % len(cfg.scales)]
            rng_out = make_stream(cfg.seed, image_id, i, LEVEL_OUTER)
            raw = jitter_box(scale_box(b, alpha), cfg.delta_out, rng_out)
        cand_box = clamp_and_validate(raw, width, height, cfg.min_box_px)
        if cand_box is None:
            continue
        inner = [cand_box]
        rng_in = make_stream(cfg.seed, image_id, i, LEVEL_INNER)
        for _ in range(2, cfg.k_inner + 1):
            jit = clamp_and_validate(jitter_box(cand_box, cfg.delta_in, rng_in),
                                     width, height, cfg.min_box_px)
            if jit is not None:
                inner.append(jit)
        candidates.append(OuterCandidate(index=i, scale=alpha, box=cand_box,
                                         inner=tuple(inner)))
    if not candidates:
        raise DegenerateFamilyError(
            f"all {cfg.n_outer} candidate boxes were rejected for image {image_id!r}")
    return PromptFamily(image_id=image_id, outer=tuple(candidates))
