"""Run and sweep specifications for the corpus harness."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..config import SaifConfig
from ..errors import InvalidArgumentError

MODE_VANILLA = "vanilla"              # single box, fixed 0.5 threshold
MODE_CANDIDATES = "candidates-only"   # full family, uniform average, fixed 0.5
MODE_SCORED = "candidates+sc"         # scored family, adaptive threshold, best candidate
MODE_FULL = "full-saif"               # full pipeline with top-n fusion

MODES = (MODE_VANILLA, MODE_CANDIDATES, MODE_SCORED, MODE_FULL)
_ALIASES = {"i": MODE_VANILLA, "ii": MODE_CANDIDATES,
            "iii": MODE_SCORED, "iv": MODE_FULL}

BACKEND_SYNTHETIC = "synthetic"
BACKEND_CACHED = "cached"
BACKENDS = (BACKEND_SYNTHETIC, BACKEND_CACHED)

SWEEP_AXES = ("budget", "m-grid", "top-n")


def canonical_mode(name: str) -> str:
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    if key in MODES:
        return key
    raise InvalidArgumentError(
        f"unknown mode {name!r}; choose from {MODES} or I..IV")


@dataclass(frozen=True)
class RunSpec:
    corpus: str
    out_dir: str
    cfg: SaifConfig = field(default_factory=SaifConfig)
    mode: str = MODE_FULL
    backend: str = BACKEND_SYNTHETIC
    box_noise: float = 0.08
    workers: int = 1
    save_maps: bool = False   # dump predicted maps back into the corpus

    def validate(self) -> "RunSpec":
        self.cfg.validate()
        if self.mode not in MODES:
            raise InvalidArgumentError(f"unknown mode {self.mode!r}")
        if self.backend not in BACKENDS:
            raise InvalidArgumentError(f"unknown backend {self.backend!r}")
        if not (0.0 <= self.box_noise < 0.5):
            raise InvalidArgumentError(
                f"box noise must be in [0, 0.5), got {self.box_noise}")
        if self.workers < 1:
            raise InvalidArgumentError(f"workers must be >= 1, got {self.workers}")
        return self

    def mode_config(self) -> SaifConfig:
        """Config actually used by this run's mode."""
        if self.mode == MODE_VANILLA:
            return replace(self.cfg, n_outer=1, k_inner=1, top_n=1)
        if self.mode == MODE_SCORED:
            return replace(self.cfg, top_n=1)
        return self.cfg


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base: RunSpec
    reps: int = 1

    def validate(self) -> "SweepSpec":
        self.base.validate()
        if self.axis not in SWEEP_AXES:
            raise InvalidArgumentError(
                f"unknown sweep axis {self.axis!r}; choose from {SWEEP_AXES}")
        if not self.values:
            raise InvalidArgumentError("sweep needs at least one value")
        if self.reps < 1:
            raise InvalidArgumentError(f"reps must be >= 1, got {self.reps}")
        for v in self.values:
            if int(v) < 1:
                raise InvalidArgumentError(f"sweep values must be >= 1, got {v}")
        return self

    def spec_for(self, value: int, rep: int) -> RunSpec:
        """Concrete run for one (value, repetition) cell.

        Budget values set N = max(1, budget // K) at fixed K and clamp
        top-n; repetitions shift the seed so they are independent.
        """
        value = int(value)
        cfg = self.base.cfg
        if self.axis == "budget":
            n = max(1, value // cfg.k_inner)
            cfg = replace(cfg, n_outer=n, top_n=min(cfg.top_n, n))
        elif self.axis == "m-grid":
            cfg = replace(cfg, m_grid=value)
        else:
            cfg = replace(cfg, top_n=min(value, cfg.n_outer))
        cfg = replace(cfg, seed=cfg.seed + rep)
        out = f"{self.base.out_dir.rstrip('/')}/{self.axis}_{value}_r{rep}"
        return replace(self.base, cfg=cfg, out_dir=out, mode=MODE_FULL)
