"""Run configuration for the command-line front end.

A run is described by a flat JSON file plus command-line overrides, with
flags winning. The delta grid is specified as ratios delta/p so that a
single grid spec stays admissible when p changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    spectral: float = 1e-9
    identity: float = 1e-12
    verdict: float = 1e-10
    revival: float = 1e-12


@dataclass(frozen=True)
class ScanConfig:
    p: float = 0.25
    r: float = 0.1
    ratio_min: float = 0.0
    ratio_max: float = 1.0
    ratio_steps: int = 200
    n_max: int = 6
    horizon: int = 50
    log_base: str = "e"
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    fmt: str = "csv"
    restarts: int = 32
    tolerances: Tolerances = field(default_factory=Tolerances)

    def validate(self) -> "ScanConfig":
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"p must be in [0, 1/2], got {self.p}")
        if self.r < 0.0 or 1.0 - 2.0 * self.p - self.r < -1e-15:
            raise ValueError(f"r must satisfy 0 <= r <= 1 - 2p, got {self.r}")
        if not 0.0 <= self.ratio_min <= self.ratio_max <= 1.0:
            raise ValueError(
                f"delta-ratio range must satisfy 0 <= min <= max <= 1, "
                f"got {self.ratio_min}:{self.ratio_max}")
        if self.ratio_steps < 2:
            raise ValueError(f"delta-ratio steps must be >= 2, got {self.ratio_steps}")
        if self.n_max < 3:
            raise ValueError(f"nmax must be >= 3, got {self.n_max}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if self.log_base not in ("e", "2"):
            raise ValueError(f"log-base must be 'e' or '2', got {self.log_base!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")
        return self

    @property
    def log_base_arg(self) -> str | int:
        return "e" if self.log_base == "e" else 2

    def delta_ratios(self) -> np.ndarray:
        return np.linspace(self.ratio_min, self.ratio_max, self.ratio_steps)

    def deltas(self) -> np.ndarray:
        return self.delta_ratios() * self.p


def parse_ratio_spec(spec: str) -> tuple[float, float, int]:
    """Parse a MIN:MAX:STEPS delta-ratio specification."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"delta-ratio must look like MIN:MAX:STEPS, got {spec!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValueError(f"bad delta-ratio {spec!r}: {exc}") from None
    return lo, hi, steps


def load_config(path: str | None, overrides: dict) -> ScanConfig:
    """Build a config from an optional JSON file and explicit overrides."""
    data: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} must hold a JSON object")
    cfg = ScanConfig()
    tol_data = data.pop("tolerances", None)
    if tol_data is not None:
        cfg = replace(cfg, tolerances=Tolerances(**tol_data))
    ratio_spec = data.pop("delta_ratio", None)
    if ratio_spec is not None:
        lo, hi, steps = parse_ratio_spec(str(ratio_spec))
        cfg = replace(cfg, ratio_min=lo, ratio_max=hi, ratio_steps=steps)
    known = {f for f in cfg.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = replace(cfg, **data)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()
