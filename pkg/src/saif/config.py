"""Pipeline configuration: every hyper-parameter in one dataclass.

Defaults follow the reference operating point: scales {0.9, 1.0, 1.1},
N=12 outer candidates with K=8 inner jitters (budget 96), a 7-point
threshold grid, variance penalty 0.3, top-3 fusion, and boundary
perturbations of 4% (outer) / 1% (inner) of box size. Bounds that the
operating point leaves open (tau/occupancy limits, gate factor, safety
margin) have conservative defaults and are fully configurable.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import InvalidArgumentError

SEED_ENV_VAR = "SAIF_SEED"


@dataclass(frozen=True)
class SaifConfig:
    scales: tuple[float, ...] = (0.9, 1.0, 1.1)
    n_outer: int = 12
    k_inner: int = 8
    m_grid: int = 7
    delta_out: float = 0.04
    delta_in: float = 0.01
    lam: float = 0.3
    gamma: float = 0.5
    eps: float = 1e-6
    tau_margin: float = 0.05
    tau_min: float = 0.05
    tau_max: float = 0.95
    a_min: float = 0.05
    a_max: float = 0.98
    top_n: int = 3
    seed: int = 0
    min_box_px: int = 2

    def validate(self) -> "SaifConfig":
        """Check every invariant; returns self so calls can be chained."""
        if not self.scales or any(s <= 0 for s in self.scales):
            raise InvalidArgumentError("scales must be a nonempty list of positive ratios")
        if self.n_outer < 1:
            raise InvalidArgumentError("n_outer must be >= 1")
        if self.k_inner < 1:
            raise InvalidArgumentError("k_inner must be >= 1")
        if self.m_grid < 1:
            raise InvalidArgumentError("m_grid must be >= 1")
        if not (0.0 <= self.delta_in <= self.delta_out):
            raise InvalidArgumentError("need 0 <= delta_in <= delta_out")
        if self.lam < 0:
            raise InvalidArgumentError("lam must be >= 0")
        if not (0.0 < self.gamma <= 1.0):
            raise InvalidArgumentError("gamma must be in (0, 1]")
        if self.eps <= 0:
            raise InvalidArgumentError("eps must be > 0")
        if not (0.0 <= self.tau_min < self.tau_max <= 1.0):
            raise InvalidArgumentError("need 0 <= tau_min < tau_max <= 1")
        if not (0.0 <= self.a_min < self.a_max <= 1.0):
            raise InvalidArgumentError("need 0 <= a_min < a_max <= 1")
        if not (1 <= self.top_n <= self.n_outer):
            raise InvalidArgumentError("need 1 <= top_n <= n_outer")
        if self.min_box_px < 1:
            raise InvalidArgumentError("min_box_px must be >= 1")
        if not (-(2**63) <= self.seed < 2**64):
            raise InvalidArgumentError("seed must fit in 64 bits")
        return self


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SaifConfig)}
_INT_FIELDS = {"n_outer", "k_inner", "m_grid", "top_n", "seed", "min_box_px"}
_FLOAT_FIELDS = {"delta_out", "delta_in", "lam", "gamma", "eps", "tau_margin",
                 "tau_min", "tau_max", "a_min", "a_max"}


def parse_scales(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.replace(";", ",").split(",") if tok.strip())
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse scales list {text!r}") from exc


def _coerce(name: str, raw: str):
    try:
        if name == "scales":
            return parse_scales(raw)
        if name in _INT_FIELDS:
            return int(raw)
        if name in _FLOAT_FIELDS:
            return float(raw)
    except ValueError as exc:
        raise InvalidArgumentError(f"bad value for config key {name!r}: {raw!r}") from exc
    raise InvalidArgumentError(f"unknown config key {name!r}")


def read_config_file(path: str) -> dict:
    """Parse a key=value config file ('#' comments, blank lines ignored)."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidArgumentError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise InvalidArgumentError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw.strip())
    return values


def resolve_config(file_path: str | None = None, overrides: dict | None = None) -> SaifConfig:
    """Build a validated config: defaults < config file < SAIF_SEED < overrides."""
    values: dict = {}
    if file_path:
        values.update(read_config_file(file_path))
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None and "seed" not in values:
        values["seed"] = _coerce("seed", env_seed)
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _FIELD_TYPES:
            raise InvalidArgumentError(f"unknown config field {key!r}")
        values[key] = val
    return SaifConfig(**values).validate()


def format_config(cfg: SaifConfig) -> str:
    """Render a config as a key=value block (the file format, round-trippable)."""
    lines = []
    for f in dataclasses.fields(SaifConfig):
        val = getattr(cfg, f.name)
        if f.name == "scales":
            val = ",".join(repr(s) for s in val)
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{f.name}={val}")
    return "\n".join(lines) + "\n"
