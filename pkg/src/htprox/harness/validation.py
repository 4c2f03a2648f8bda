"""Registered statistical self-checks for the generators, target and oracles.

Each check returns a :class:`CheckResult` (name, statistic, threshold,
verdict). The registry order is fixed so reports are comparable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy import integrate, stats

from ..oracles import RestrictedGaussianOracle, RestrictedStableOracle
from ..rng import RngStream
from ..stablernd import (StableSpec, sample_cauchy_vector, sample_isotropic_stable,
                         sample_one_sided_stable, stable_abs_moment)
from ..targets import (GeneralizedCauchy, TargetSpec, cauchy_radial_cdf, cauchy_radial_pdf,
                       cauchy_radial_sf, cauchy_tail_lower_bound, sample_exact)


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    group: str

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name} statistic={self.statistic:.6g} threshold={self.threshold:.6g} {verdict}"


@dataclass(frozen=True)
class Check:
    name: str
    group: str
    run: Callable  # (seed, ctx) -> (statistic, threshold, passed)


def _le(stat, thr):
    return float(stat), float(thr), bool(stat <= thr)


def _ge(stat, thr):
    return float(stat), float(thr), bool(stat >= thr)


def _gen(seed, k):
    return RngStream(seed, 1000 + k).generator


# --- conditional law by quadrature (d = 1) ----------------------------------

def conditional_density(target: GeneralizedCauchy, kind: str, y: float, eta: float):
    """Unnormalized pi(x) p(x - y) for the d=1 Gaussian or Cauchy kernel."""
    c = 0.5 * (1 + target.nu)
    if kind == "rgo":
        return lambda x: math.exp(-c * math.log1p(x * x) - (x - y) ** 2 / (2 * eta))
    if kind == "raso":
        return lambda x: math.exp(-c * math.log1p(x * x)) * eta / (eta * eta + (x - y) ** 2)
    raise ValueError(kind)


def conditional_cdf(target: GeneralizedCauchy, kind: str, y: float, eta: float, grid):
    """CDF of the oracle's target law at the sorted points ``grid``."""
    f = conditional_density(target, kind, y, eta)
    grid = np.sort(np.asarray(grid, dtype=float))
    brk = sorted({float(y), 0.0})
    knots = [-math.inf] + [*grid] + [math.inf]
    pieces = []
    for a, b in zip(knots[:-1], knots[1:]):
        inner = [p for p in brk if a < p < b]
        pts = [a, *inner, b]
        pieces.append(sum(integrate.quad(f, lo, hi, limit=200, epsabs=1e-13)[0]
                          for lo, hi in zip(pts[:-1], pts[1:])))
    cum = np.cumsum(pieces)
    return cum[:-1] / cum[-1]


def sup_cdf_distance(samples, cdf_fn) -> float:
    """sup |ECDF - F| evaluated at 999 empirical quantiles (both one-sided limits)."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    n = x.size
    grid = np.unique(np.quantile(x, np.linspace(0.001, 0.999, 999)))
    F = cdf_fn(grid)
    hi = np.searchsorted(x, grid, side="right") / n
    lo = np.searchsorted(x, grid, side="left") / n
    return float(max(np.max(np.abs(hi - F)), np.max(np.abs(lo - F))))


# --- fault injection ----------------------------------------------------------

def squared_acceptance(target: GeneralizedCauchy) -> TargetSpec:
    """Copy of ``target`` whose oracle accepts with exp(-(V - V*))^2."""
    code, par = target.kernel
    par2 = par.copy()
    par2[0] *= 2.0
    return TargetSpec(target.dim, lambda x: 2.0 * target.potential(x), target.grad,
                      target.minimizer, 2.0 * target.min_value, kernel=(code, par2))


# --- checks -------------------------------------------------------------------

def _check_determinism(seed, ctx):
    a = RngStream(seed, 3).generator.random(1000)
    b = RngStream(seed, 3).generator.random(1000)
    return _le(float(np.max(np.abs(a - b))), 0.0)


def _check_independence(seed, ctx):
    n = 100_000
    a = RngStream(seed, 0).generator.random(n)
    b = RngStream(seed, 1).generator.random(n)
    return _le(abs(np.corrcoef(a, b)[0, 1]), 4 / math.sqrt(n))


def _charfn_check(alpha):
    def run(seed, ctx):
        n = ctx.get("n_charfn", 100_000)
        x = sample_isotropic_stable(StableSpec(alpha, 1.0, 1), _gen(seed, 1), size=n)[:, 0]
        worst = 0.0
        for xi in (0.25, 0.5, 1.0, 2.0, 4.0):
            ecf = np.mean(np.cos(xi * x))
            worst = max(worst, abs(ecf - math.exp(-abs(xi) ** alpha)))
        return _le(worst, 4 / math.sqrt(n))
    return run


def _check_laplace(seed, ctx):
    n = 100_000
    s = sample_one_sided_stable(0.5, _gen(seed, 2), size=n)
    v = np.exp(-s)
    z = abs(v.mean() - math.exp(-1.0)) / (v.std(ddof=1) / math.sqrt(n))
    return _le(z, 3.0)


def _check_cauchy_routes(seed, ctx):
    n = 100_000
    a = sample_cauchy_vector(1.0, 2, _gen(seed, 3), size=n)
    b = sample_isotropic_stable(StableSpec(1.0, 1.0, 2), _gen(seed, 4), size=n)
    return _le(stats.ks_2samp(np.linalg.norm(a, axis=1),
                              np.linalg.norm(b, axis=1)).statistic, 0.01)


def _check_self_similarity(seed, ctx):
    n = 100_000
    a = sample_isotropic_stable(StableSpec(1.5, 2.0, 1), _gen(seed, 5), size=n)[:, 0]
    b = 2.0 ** (1 / 1.5) * sample_isotropic_stable(StableSpec(1.5, 1.0, 1),
                                                    _gen(seed, 6), size=n)[:, 0]
    return _le(stats.ks_2samp(a, b).statistic, 0.01)


def _check_isotropy(seed, ctx):
    n = 100_000
    x = sample_isotropic_stable(StableSpec(1.0, 1.0, 2), _gen(seed, 7), size=n)
    ang = np.arctan2(x[:, 1], x[:, 0])
    return _le(stats.kstest(ang, stats.uniform(-math.pi, 2 * math.pi).cdf).statistic, 0.01)


def _check_cauchy_moment(seed, ctx):
    n = ctx.get("n_moment", 1_000_000)
    est = stable_abs_moment(1.0, 0.5, 1, mode="monte_carlo", n=n, rng=_gen(seed, 8))
    return _le(abs(est.value - math.sqrt(2.0)) / est.se, 3.0)


def _check_radial_cdf(seed, ctx):
    tgt = GeneralizedCauchy(2, 1.5)
    worst = 0.0
    for R in (0.1, 1.0, 3.0, 30.0):
        q = integrate.quad(lambda r: cauchy_radial_pdf(tgt, r), 0, R, limit=200)[0]
        worst = max(worst, abs(q - cauchy_radial_cdf(tgt, R)))
    return _le(worst, 1e-8)


def _check_tail_bound(seed, ctx):
    R = np.geomspace(1.0, 1e6, 60)
    margin = min(float(np.min(cauchy_radial_sf(GeneralizedCauchy(d, nu), R)
                              - cauchy_tail_lower_bound(nu, nu, d, R)))
                 for d in (1, 3) for nu in (0.5, 2.0))
    return _ge(margin, 0.0)


def _check_exact_sampler(seed, ctx):
    tgt = GeneralizedCauchy(3, 0.8)
    x = sample_exact(tgt, 100_000, _gen(seed, 9))
    p = stats.ks_1samp(np.linalg.norm(x, axis=1), lambda r: cauchy_radial_cdf(tgt, r)).pvalue
    return _ge(p, 0.01)


def _oracle_check(kind, y, eta, j):
    def run(seed, ctx):
        tgt = GeneralizedCauchy(1, 2.0)
        mut = ctx.get("fault") == "square_acceptance"
        used = squared_acceptance(tgt) if mut else tgt
        o = (RestrictedGaussianOracle(used, eta) if kind == "rgo"
             else RestrictedStableOracle(used, eta, 1.0))
        n = ctx.get("n_oracle", 100_000)
        xs, _, _ = o.sample_many([y], n, _gen(seed, 20 + j))
        D = sup_cdf_distance(xs, lambda g: conditional_cdf(tgt, kind, y, eta, g))
        return _le(D, 0.02)
    return run


def _check_rejections_geometric(seed, ctx):
    tgt = GeneralizedCauchy(1, 2.0)
    y, eta, n = 0.7, 0.2, 100_000
    # acceptance probability = E_{N(y,eta)}[exp(-V)]
    c = 1.5
    p = integrate.quad(lambda x: math.exp(-c * math.log1p(x * x) - (x - y) ** 2 / (2 * eta))
                       / math.sqrt(2 * math.pi * eta), -math.inf, math.inf)[0]
    _, rej, _ = RestrictedGaussianOracle(tgt, eta).sample_many([y], n, _gen(seed, 40))
    mean, sd = (1 - p) / p, math.sqrt(1 - p) / p
    return _le(abs(rej.mean() - mean) / (sd / math.sqrt(n)), 4.0)


def registry() -> List[Check]:
    checks = [Check("rng_stream_determinism", "rng", _check_determinism),
              Check("rng_stream_independence", "rng", _check_independence)]
    checks += [Check(f"stable_charfn_alpha={a}", "rng", _charfn_check(a))
               for a in (0.5, 1.0, 1.5, 2.0)]
    checks += [Check("one_sided_laplace_transform", "rng", _check_laplace),
               Check("cauchy_ratio_vs_subordination_ks", "rng", _check_cauchy_routes),
               Check("stable_self_similarity_ks", "rng", _check_self_similarity),
               Check("stable_isotropy_angle_ks", "rng", _check_isotropy),
               Check("cauchy_half_moment_sqrt2", "rng", _check_cauchy_moment),
               Check("radial_cdf_vs_quadrature", "oracles", _check_radial_cdf),
               Check("tail_lower_bound_below_sf", "oracles", _check_tail_bound),
               Check("exact_target_sampler_ks", "oracles", _check_exact_sampler)]
    j = 0
    for kind in ("rgo", "raso"):
        for eta in (0.05, 0.2):
            for y in (-1.0, 0.0, 0.7):
                checks.append(Check(f"oracle_exactness_{kind}_y={y}_eta={eta}", "oracles",
                                    _oracle_check(kind, y, eta, j)))
                j += 1
    checks.append(Check("rgo_rejections_geometric_mean", "oracles",
                        _check_rejections_geometric))
    return checks


GROUPS = {"validate_rng": ("rng",), "validate_oracles": ("oracles",),
          "validate": ("rng", "oracles")}


def run_checks(seed: int = 0, groups=("rng", "oracles"), fault: Optional[str] = None,
               **sizes) -> List[CheckResult]:
    ctx = dict(sizes, fault=fault)
    out = []
    for c in registry():
        if c.group in groups:
            stat, thr, ok = c.run(seed, ctx)
            out.append(CheckResult(c.name, stat, thr, ok, c.group))
    return out
