"""Gaussian proximal, stable proximal and ULA samplers.

One iteration of a proximal sampler is a forward noising step followed by
an oracle call:

* Gaussian proximal: ``y = x + sqrt(eta) Z``, then ``x' ~ RGO(y)``.
* Stable proximal:   ``y = x + eta^(1/alpha) Z_alpha``, then ``x' ~ RaSO(y)``.

:func:`run_chains` runs many independent chains; chain ``c`` draws only from
``RngStream(seed, c)``, so results per chain do not depend on scheduling.
Targets with a compiled kernel run whole trajectories inside numba; other
targets go through the per-step Python functions with the same draw order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .oracles import (DEFAULT_BUDGET, OracleBudgetError, RestrictedGaussianOracle,
                      RestrictedStableOracle)
from .rng import RngStream, as_generator
from .targets import GeneralizedCauchy, TargetSpec, sample_exact

KINDS = ("ula", "gaussian_proximal", "stable_proximal")
INITS = ("point_mass", "standard_gaussian", "exact_target")
_SKIND = {"ula": K.SAMPLER_ULA, "gaussian_proximal": K.SAMPLER_GAUSSIAN,
          "stable_proximal": K.SAMPLER_STABLE}


@dataclass(frozen=True)
class SamplerConfig:
    kind: str
    eta: float
    iterations: int
    chains: int = 1
    alpha: Optional[float] = None
    init: str = "standard_gaussian"
    x0: Optional[tuple] = None
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    tail_envelope: bool = False
    eps_tv: float = 0.0
    c_low: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.chains < 1:
            raise ValueError("chains must be at least 1")
        if (self.alpha is not None) != (self.kind == "stable_proximal"):
            raise ValueError("alpha is required for stable_proximal and only there")
        if self.alpha is not None and not 0 < self.alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")
        if self.init == "point_mass" and self.x0 is None:
            raise ValueError("point_mass init needs x0")
        if not 0 <= self.eps_tv <= 1:
            raise ValueError("eps_tv must lie in [0, 1]")
        if self.c_low is not None and self.kind != "stable_proximal":
            raise ValueError("c_low applies to the stable oracle only")


@dataclass
class ChainRun:
    """Recorded sample batches of a multi-chain run.

    ``samples`` has shape (chains, len(record_at), dim); ``rejections`` is
    the total number of rejected proposals per iteration over all chains;
    ``first_corrupted`` holds, per chain, the first iteration at which an
    inexact oracle returned a corrupted draw (-1 if never).
    """

    config: SamplerConfig
    record_at: np.ndarray
    samples: np.ndarray
    rejections: np.ndarray
    first_corrupted: np.ndarray
    wall_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    def at(self, k: int) -> np.ndarray:
        idx = np.flatnonzero(self.record_at == k)
        if idx.size == 0:
            raise KeyError(f"iteration {k} was not recorded")
        return self.samples[:, idx[0], :]

    @property
    def rejections_mean(self) -> np.ndarray:
        return self.rejections / self.config.chains


def _forward_gaussian(gen, x, eta):
    z = np.empty(x.shape[0])
    K.fill_normal(gen, z)
    return x + math.sqrt(eta) * z


def _forward_stable(gen, x, eta, alpha):
    z = np.empty(x.shape[0])
    K.stable_unit(gen, float(alpha), z)
    return x + eta ** (1.0 / alpha) * z


def step_gaussian_proximal(target: TargetSpec, x_k, eta: float, rng,
                           budget: int = DEFAULT_BUDGET, tail_envelope: bool = False):
    """One iteration of the Gaussian proximal sampler: (y_k, x_{k+1}, rejections)."""
    gen = as_generator(rng)
    y = _forward_gaussian(gen, np.asarray(x_k, dtype=float), eta)
    out = RestrictedGaussianOracle(target, eta, budget, tail_envelope)._call(y, gen)
    return y, out.sample, out.rejections


def step_stable_proximal(target: TargetSpec, x_k, eta: float, alpha: float, rng,
                         budget: int = DEFAULT_BUDGET, tail_envelope: bool = False):
    """One iteration of the stable proximal sampler: (y_k, x_{k+1}, rejections)."""
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    gen = as_generator(rng)
    y = _forward_stable(gen, np.asarray(x_k, dtype=float), eta, alpha)
    out = RestrictedStableOracle(target, eta, alpha, budget, tail_envelope)._call(y, gen)
    return y, out.sample, out.rejections


def step_ula(target: TargetSpec, x_k, eta: float, rng):
    """Euler step x - eta grad V(x) + sqrt(2 eta) Z."""
    gen = as_generator(rng)
    x = np.asarray(x_k, dtype=float)
    g = np.asarray(target.grad(x), dtype=float)
    z = np.empty(x.shape[0])
    K.fill_normal(gen, z)
    return x - eta * g + math.sqrt(2.0 * eta) * z


def step_size_policy(target: TargetSpec, kind: str, alpha: float = 1.0,
                     c0: float = 1.0) -> float:
    """Default step size, ``c0`` times the theoretical scaling.

    stable_proximal: d^(-1/2) (d+nu)^(-4) for generalized Cauchy with nu >= 1,
    d^(-1/2) (d+nu)^(-4/nu) for nu < 1, and d^(-1/2) L^(-1/beta) for other
    targets with Hölder data. gaussian_proximal: 1 / (L sqrt(d)) with
    L = d + nu for generalized Cauchy.
    """
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    d = target.dim
    if kind == "stable_proximal":
        if isinstance(target, GeneralizedCauchy):
            nu = target.nu
            expo = 4.0 if nu >= 1 else 4.0 / nu
            return c0 * d ** -0.5 * (d + nu) ** -expo
        if target.holder is None:
            raise ValueError("supply (L, β) or eta explicitly")
        L, beta = target.holder
        return c0 * d ** -0.5 * L ** (-1.0 / beta)
    if kind == "gaussian_proximal":
        if isinstance(target, GeneralizedCauchy):
            return c0 / ((d + target.nu) * math.sqrt(d))
        raise ValueError("no smoothness constant known for this target; supply eta explicitly")
    raise ValueError(f"no step-size policy for {kind!r}; supply eta explicitly")


def _initial_state(config: SamplerConfig, target: TargetSpec, gen) -> np.ndarray:
    d = target.dim
    if config.init == "point_mass":
        return np.array(config.x0, dtype=float).reshape(d).copy()
    if config.init == "standard_gaussian":
        return gen.standard_normal(d)
    if not isinstance(target, GeneralizedCauchy):
        raise ValueError("exact_target init needs a GeneralizedCauchy target")
    return sample_exact(target, 1, gen)[0]


def _oracle_shift(config, target):
    return target.min_value if config.c_low is None else float(config.c_low)


def _python_chain(config, target, x, slot, gen, samples, rej):
    skind = _SKIND[config.kind]
    if skind == K.SAMPLER_GAUSSIAN:
        oracle = RestrictedGaussianOracle(target, config.eta, config.budget,
                                          force_python=True)
    elif skind == K.SAMPLER_STABLE:
        oracle = RestrictedStableOracle(target, config.eta, config.alpha, config.budget,
                                        c_low=config.c_low, force_python=True)
    first_bad = -1
    if slot[0] >= 0:
        samples[slot[0]] = x
    for k in range(config.iterations):
        if skind == K.SAMPLER_ULA:
            x = step_ula(target, x, config.eta, gen)
            rej[k] = 0
        else:
            if skind == K.SAMPLER_GAUSSIAN:
                y = _forward_gaussian(gen, x, config.eta)
            else:
                y = _forward_stable(gen, x, config.eta, config.alpha)
            try:
                out = oracle._call(y, gen, config.eps_tv)
            except OracleBudgetError:
                return 1, k, first_bad
            rej[k] = out.rejections
            if out.corrupted and first_bad < 0:
                first_bad = k
            x = out.sample
        if slot[k + 1] >= 0:
            samples[slot[k + 1]] = x
    return 0, -1, first_bad


def _run_block(config, target, slot, chain_ids, samples, first_bad):
    """Run the chains in ``chain_ids``; returns (rejection totals, failure)."""
    rej_total = np.zeros(config.iterations, dtype=np.int64)
    rej = np.zeros(config.iterations, dtype=np.int64)
    skind = _SKIND[config.kind]
    alpha = 2.0 if config.alpha is None else float(config.alpha)
    shift = _oracle_shift(config, target)
    for c in chain_ids:
        gen = RngStream(config.seed, c).generator
        x = _initial_state(config, target, gen)
        if target.kernel is not None:
            code, par = target.kernel
            status, k_fail, fb = K.run_chain(
                skind, code, par, np.ascontiguousarray(x), config.eta, alpha,
                config.iterations, slot, gen, config.budget, shift,
                config.tail_envelope, config.eps_tv, samples[c], rej)
        else:
            status, k_fail, fb = _python_chain(config, target, x, slot, gen,
                                               samples[c], rej)
        if status:
            return rej_total, (c, k_fail)
        first_bad[c] = fb
        rej_total += rej
    return rej_total, None


def run_chains(config: SamplerConfig, target: TargetSpec,
               record_at: Sequence[int], threads: int = 1) -> ChainRun:
    """Run ``config.chains`` independent chains and record batches at ``record_at``."""
    rec = np.unique(np.asarray(record_at, dtype=np.int64))
    if rec.size == 0 or rec[0] < 0 or rec[-1] > config.iterations:
        raise ValueError(f"record_at must be a non-empty subset of [0, {config.iterations}]")
    if config.kind == "stable_proximal" and config.c_low is not None \
            and config.c_low > target.min_value:
        raise ValueError("c_low exceeds the known minimum of V")
    slot = -np.ones(config.iterations + 1, dtype=np.int64)
    slot[rec] = np.arange(rec.size)
    samples = np.zeros((config.chains, rec.size, target.dim))
    first_bad = -np.ones(config.chains, dtype=np.int64)

    threads = max(1, int(threads))
    blocks = np.array_split(np.arange(config.chains), min(threads, config.chains))
    t0 = time.perf_counter()
    if threads == 1:
        results = [_run_block(config, target, slot, blocks[0], samples, first_bad)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_run_block, config, target, slot, b, samples, first_bad)
                    for b in blocks]
            results = [f.result() for f in futs]
    wall = time.perf_counter() - t0
    failures = [f for _, f in results if f is not None]
    if failures:
        c, k = min(failures)
        raise OracleBudgetError(config.budget, f"chain {c}, iteration {k}")
    rejections = np.sum([r for r, _ in results], axis=0).astype(np.int64)
    return ChainRun(config, rec, samples, rejections, first_bad, wall,
                    meta={"config": asdict(config)})
