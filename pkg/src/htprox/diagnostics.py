"""Sample-based divergence estimates against a generalized Cauchy target.

Both the target and every chain law considered here are isotropic, so TV
between them equals TV between their radial marginals; the estimators bin
the radius |x| on an equal-probability grid of the analytic target.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .rng import RngStream
from .targets import GeneralizedCauchy, cauchy_radial_cdf, cauchy_radial_ppf

TAIL_QUANTILE = 0.999
N_BOOT = 200


@dataclass(frozen=True)
class DivergenceEstimate:
    kind: str
    value: float
    n: int
    bins: Optional[int]
    se_proxy: float
    pvalue: Optional[float] = None


def _radii(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample set")
    if x.ndim == 1:
        return np.abs(x)
    return np.linalg.norm(x, axis=1)


def radial_bin_edges(target: GeneralizedCauchy, bins: int) -> np.ndarray:
    """``bins`` equal-mass edges on [0, R_max] plus a final edge at infinity."""
    q = TAIL_QUANTILE * np.arange(bins + 1) / bins
    edges = cauchy_radial_ppf(target, q)
    edges[0] = 0.0
    return np.append(edges, np.inf)


def radial_bin_masses(target: GeneralizedCauchy, bins: int) -> np.ndarray:
    return np.append(np.full(bins, TAIL_QUANTILE / bins), 1.0 - TAIL_QUANTILE)


def _bootstrap_se(stat, counts, n, n_boot, seed):
    if n_boot <= 0:
        return float("nan")
    gen = RngStream(seed, 0).generator
    p = counts / n
    boot = gen.multinomial(n, p, size=n_boot) / n
    return float(np.std([stat(b) for b in boot], ddof=1))


def radial_tv_estimate(samples, target: GeneralizedCauchy, bins: int = 200,
                       n_boot: int = N_BOOT, seed: int = 0) -> DivergenceEstimate:
    """Half the L1 distance between binned empirical and analytic radial masses."""
    r = _radii(samples)
    n = r.size
    edges = radial_bin_edges(target, bins)
    q = radial_bin_masses(target, bins)
    idx = np.minimum(np.searchsorted(edges, r, side="right") - 1, bins)
    counts = np.bincount(idx, minlength=bins + 1).astype(float)

    def tv(p):
        return 0.5 * float(np.abs(p - q).sum())

    value = min(1.0, tv(counts / n))
    return DivergenceEstimate("radial_tv", value, n, bins,
                              _bootstrap_se(tv, counts, n, n_boot, seed))


def radial_tv_noise_floor(n: int, bins: int) -> float:
    """Expected estimate for exact samples (normal approximation per bin)."""
    q = np.append(np.full(bins, TAIL_QUANTILE / bins), 1.0 - TAIL_QUANTILE)
    return float(0.5 * np.sum(np.sqrt(2.0 * q * (1.0 - q) / (math.pi * n))))


def hist_chi2_estimate(samples, target: GeneralizedCauchy, bins: int = 100,
                       n_boot: int = N_BOOT, seed: int = 0) -> DivergenceEstimate:
    """Binned chi^2 proxy on the real line (d = 1 only).

    Bins are equal-probability under the target (outermost bins are the
    merged tails), so every analytic mass is 1/bins. Upward biased by about
    (bins - 1)/n.
    """
    if target.dim != 1:
        raise ValueError("χ² proxy supported in d=1 only")
    x = np.asarray(samples, dtype=float).reshape(-1)
    n = x.size
    if n == 0:
        raise ValueError("empty sample set")
    # signed quantiles of the symmetric 1-D law: F(x) = 1/2 + sign(x) F_R(|x|)/2
    u = np.arange(1, bins) / bins
    inner = cauchy_radial_ppf(target, np.abs(2 * u - 1)) * np.sign(2 * u - 1)
    counts = np.bincount(np.searchsorted(inner, x, side="right"),
                         minlength=bins).astype(float)
    q = np.full(bins, 1.0 / bins)
    keep = q > 1e-8

    def chi2(p):
        return float(np.sum((p[keep] - q[keep]) ** 2 / q[keep]))

    return DivergenceEstimate("hist_chi2", chi2(counts / n), n, bins,
                              _bootstrap_se(chi2, counts, n, n_boot, seed))


def ks_estimate(samples, target: GeneralizedCauchy, n_boot: int = 0,
                seed: int = 0) -> DivergenceEstimate:
    """One-sample KS statistic of |x| against the analytic radial CDF."""
    r = _radii(samples)
    cdf = lambda v: cauchy_radial_cdf(target, v)  # noqa: E731
    res = stats.ks_1samp(r, cdf)
    se = float("nan")
    if n_boot > 0:
        gen = RngStream(seed, 0).generator
        vals = [stats.ks_1samp(gen.choice(r, r.size), cdf).statistic for _ in range(n_boot)]
        se = float(np.std(vals, ddof=1))
    return DivergenceEstimate("ks", float(res.statistic), r.size, None, se,
                              float(res.pvalue))


def surrogate_g(samples, kappa: float, nu2: float) -> np.ndarray:
    """G(x) = (1 + |x|^2)^(kappa (d + nu2) / 2)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    d = x.shape[1]
    return np.exp(0.5 * kappa * (d + nu2) * np.log1p(np.sum(x * x, axis=1)))


@dataclass(frozen=True)
class MomentTrack:
    record_at: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    kurtosis: np.ndarray
    unreliable: np.ndarray


def surrogate_moment(samples, kappa: float, nu2: float):
    """(mean, SE, kurtosis, unreliable) of G over one sample batch."""
    g = surrogate_g(samples, kappa, nu2)
    n = g.size
    mean = float(g.mean())
    var = float(g.var(ddof=1)) if n > 1 else 0.0
    se = math.sqrt(var / n) if n > 1 else 0.0
    kurt = float(stats.kurtosis(g, fisher=False)) if var > 0 else 3.0
    # a sample kurtosis of order n means a handful of points carry the
    # fourth moment: the variance (and the SE) is not being estimated
    unreliable = n > 1 and kurt > 0.1 * n
    return mean, se, kurt, unreliable


def surrogate_moment_track(chain, kappa: float, nu2: float) -> MomentTrack:
    """Per recorded iteration: empirical E[G(x_k)] with SE and a tail warning."""
    rows = [surrogate_moment(chain.samples[:, j, :], kappa, nu2)
            for j in range(chain.record_at.size)]
    mean, se, kurt, bad = (np.array(c) for c in zip(*rows))
    if bad.any():
        ks = chain.record_at[bad].tolist()
        warnings.warn(f"surrogate moment looks infinite-variance at k={ks}; "
                      "estimate unreliable", RuntimeWarning, stacklevel=2)
    return MomentTrack(chain.record_at.copy(), mean, se, kurt, bad.astype(bool))
