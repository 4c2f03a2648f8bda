"""JSON experiment configuration.

Every section is a small dataclass; unknown keys anywhere are rejected.
Command-line overrides use dotted paths (``--sampler.eta=0.01``) and are
applied to the raw document before validation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Optional


class ConfigError(ValueError):
    pass


EXPERIMENTS = ("separation", "validate_rng", "validate_oracles", "validate",
               "bounds_overlay", "single_run")


@dataclass
class TargetConfig:
    kind: str = "generalized_cauchy"
    nu: float = 2.0
    dim: int = 1
    C_fpi: Optional[float] = None
    wfpi_c: Optional[float] = None

    def check(self):
        if self.kind != "generalized_cauchy":
            raise ConfigError(f"target.kind must be 'generalized_cauchy', got {self.kind!r}")
        if not self.nu > 0:
            raise ConfigError("target.nu must be positive")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigError("target.dim must be a positive integer")


@dataclass
class OracleConfig:
    kind: Optional[str] = None
    budget: int = 10**7
    eps_tv: float = 0.0
    tail_envelope: bool = True
    c_low: Optional[float] = None

    def check(self):
        if self.kind not in (None, "rgo", "raso", "raso_lower_bounded"):
            raise ConfigError(f"oracle.kind must be rgo, raso or raso_lower_bounded, "
                              f"got {self.kind!r}")
        if self.budget < 1:
            raise ConfigError("oracle.budget must be positive")
        if not 0 <= self.eps_tv <= 1:
            raise ConfigError("oracle.eps_tv must lie in [0, 1]")
        if self.kind == "raso_lower_bounded" and self.c_low is None:
            raise ConfigError("oracle.c_low is required for raso_lower_bounded")


@dataclass
class SamplerSection:
    kind: str = "stable_proximal"
    eta: Optional[float] = None
    c0: float = 1.0
    alpha: Optional[float] = None
    iterations: int = 100
    chains: int = 1000
    init: str = "standard_gaussian"
    x0: Optional[list] = None

    def check(self):
        from ..samplers import INITS, KINDS
        if self.kind not in KINDS:
            raise ConfigError(f"sampler.kind must be one of {KINDS}, got {self.kind!r}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError("sampler.eta must be positive")
        if not self.c0 > 0:
            raise ConfigError("sampler.c0 must be positive")
        if self.kind == "stable_proximal":
            if self.alpha is None:
                self.alpha = 1.0
            if not 0 < self.alpha < 2:
                raise ConfigError("sampler.alpha must lie in (0, 2)")
        elif self.alpha is not None:
            raise ConfigError("sampler.alpha applies to stable_proximal only")
        if self.iterations < 0 or self.chains < 1:
            raise ConfigError("sampler.iterations >= 0 and sampler.chains >= 1 required")
        if self.init not in INITS:
            raise ConfigError(f"sampler.init must be one of {INITS}")
        if self.init == "point_mass" and self.x0 is None:
            raise ConfigError("sampler.x0 is required for point_mass init")


@dataclass
class DiagnosticsConfig:
    bins: int = 20
    n_boot: int = 200

    def check(self):
        if self.bins < 1 or self.n_boot < 0:
            raise ConfigError("diagnostics.bins >= 1 and diagnostics.n_boot >= 0 required")


@dataclass
class BoundsConfig:
    # None: both Gaussian curves, plus the stable one when nu < alpha allows it
    theorems: Optional[list] = None
    k_grid: Optional[list] = None
    kappa: Optional[float] = None
    delta: Optional[float] = 0.05
    tau: Optional[float] = None
    alpha: float = 1.0
    E_G0: float = 1.0
    eta: Optional[float] = None

    def check(self):
        allowed = {"gaussian_prox", "ld", "stable_prox"}
        bad = set(self.theorems or ()) - allowed
        if bad:
            raise ConfigError(f"bounds.theorems has unknown entries {sorted(bad)}")
        if self.k_grid is not None and any(int(k) != k or k < 0 for k in self.k_grid):
            raise ConfigError("bounds.k_grid must hold non-negative integers")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError("bounds.delta must be positive")


@dataclass
class ExperimentConfig:
    experiment: str = "single_run"
    seed: int = 0
    out: Optional[str] = None
    target: TargetConfig = field(default_factory=TargetConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    sampler: SamplerSection = field(default_factory=SamplerSection)
    samplers: Optional[list] = None
    record_at: Optional[list] = None
    epsilon_grid: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    c0_grid: list = field(default_factory=lambda: [1.0])
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    svg: bool = False

    def check(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for sec in (self.target, self.oracle, self.sampler, self.diagnostics, self.bounds):
            sec.check()
        if self.samplers is not None:
            self.samplers = [_build(SamplerSection, s, "samplers[]") for s in self.samplers]
            for s in self.samplers:
                s.check()
        if any(not 0 < e < 1 for e in self.epsilon_grid):
            raise ConfigError("epsilon_grid entries must lie in (0, 1)")
        if any(not c > 0 for c in self.c0_grid):
            raise ConfigError("c0_grid entries must be positive")
        if self.record_at is not None and any(int(k) != k or k < 0 for k in self.record_at):
            raise ConfigError("record_at must hold non-negative integers")


_SECTIONS = {"target": TargetConfig, "oracle": OracleConfig, "sampler": SamplerSection,
             "diagnostics": DiagnosticsConfig, "bounds": BoundsConfig}


def _build(cls, raw: Any, where: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    kw = {}
    for k, v in raw.items():
        sub = _SECTIONS.get(k) if cls is ExperimentConfig else None
        kw[k] = _build(sub, v, k) if sub is not None else v
    try:
        return cls(**kw)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw: dict, path: str, value):
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        nxt = node.setdefault(k, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot override {path}: {k} is not a section")
        node = nxt
    node[keys[-1]] = value


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None,
                defaults: Optional[dict] = None) -> ExperimentConfig:
    """Read JSON (optional), merge defaults and overrides, validate."""
    raw: dict = {}
    if defaults:
        raw = json.loads(json.dumps(defaults))
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
        for k, v in doc.items():
            if isinstance(v, dict) and isinstance(raw.get(k), dict):
                raw[k].update(v)
            else:
                raw[k] = v
    for k, v in (overrides or {}).items():
        apply_override(raw, k, v)
    cfg = _build(ExperimentConfig, raw, "config")
    cfg.check()
    return cfg


def resolve_out_dir(cfg: ExperimentConfig, cli_out: Optional[str]) -> str:
    out = cli_out or cfg.out or os.environ.get("HTPROX_OUT") or "htprox_out"
    os.makedirs(out, exist_ok=True)
    return out


def as_dict(obj):
    if is_dataclass(obj):
        return {f.name: as_dict(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, list):
        return [as_dict(v) for v in obj]
    return obj
