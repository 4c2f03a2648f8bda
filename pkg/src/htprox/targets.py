"""Target distributions pi ∝ exp(-V).

:class:`TargetSpec` is the generic container (potential, gradient,
minimizer and optional regularity constants). :class:`GeneralizedCauchy`
adds the closed-form radial law used by the diagnostics and exact sampling.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from scipy.special import betainc, betaincinv, gammaln

from . import _kernels as K
from .rng import as_generator


class TargetSpec:
    """A potential V with gradient and optional regularity parameters.

    ``potential`` and ``grad`` accept a ``(dim,)`` vector or a ``(n, dim)``
    batch. ``holder`` is ``(L, beta)`` with ``V(x) - V* <= L |x - x*|^beta``;
    ``fpi`` is ``(alpha, C_FPI)``; ``wfpi_c`` the weak-FPI constant.
    ``kernel`` is an internal ``(code, params)`` pair naming a compiled
    potential; custom targets leave it ``None`` and run on the Python path.
    """

    def __init__(self, dim: int, potential: Callable, grad: Callable,
                 minimizer, min_value: float, nu1: Optional[float] = None,
                 nu2: Optional[float] = None, holder=None, fpi=None,
                 wfpi_c: Optional[float] = None, kernel=None):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim}")
        self.dim = int(dim)
        self.potential = potential
        self.grad = grad
        self.minimizer = np.asarray(minimizer, dtype=float).reshape(self.dim)
        self.min_value = float(min_value)
        self.nu1 = nu1
        self.nu2 = nu2
        if holder is not None:
            L, beta = holder
            if not (L > 0 and 0 < beta <= 1):
                raise ValueError(f"invalid Hölder pair {holder}")
            holder = (float(L), float(beta))
        self.holder = holder
        if fpi is not None:
            fpi = (float(fpi[0]), float(fpi[1]))
        self.fpi = fpi
        self.wfpi_c = wfpi_c
        self.kernel = kernel

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


def holder_preset(dim: int, nu: float):
    """(L, beta) for the generalized Cauchy potential."""
    if nu >= 1:
        return 4.0 * (dim + nu), 0.25
    return (dim + nu) / nu, nu / 4.0


class GeneralizedCauchy(TargetSpec):
    """pi_nu ∝ (1 + |x|^2)^(-(d+nu)/2)."""

    def __init__(self, dim: int, nu: float, fpi=None, wfpi_c=None, holder="preset"):
        if not nu > 0:
            raise ValueError(f"nu must be positive, got {nu}")
        self.nu = float(nu)
        c = 0.5 * (dim + nu)
        self.log_normalizer = (0.5 * dim * math.log(math.pi)
                               + math.lgamma(0.5 * nu) - math.lgamma(c))

        def potential(x):
            x = np.asarray(x, dtype=float)
            return c * np.log1p(np.sum(x * x, axis=-1))

        def grad(x):
            x = np.asarray(x, dtype=float)
            s = np.sum(x * x, axis=-1, keepdims=True)
            return 2.0 * c * x / (1.0 + s)

        if holder == "preset":
            holder = holder_preset(dim, nu)
        super().__init__(dim, potential, grad, np.zeros(dim), 0.0, nu1=self.nu,
                         nu2=self.nu, holder=holder, fpi=fpi, wfpi_c=wfpi_c,
                         kernel=(K.CAUCHY, np.array([c, self.nu, self.log_normalizer])))

    def __repr__(self):
        return f"GeneralizedCauchy(dim={self.dim}, nu={self.nu})"

    def log_density(self, x):
        return -self.potential(x) - self.log_normalizer


class FlatPotential(TargetSpec):
    """V ≡ 0. Not normalizable; only for isolating oracle and kernel logic."""

    def __init__(self, dim: int):
        super().__init__(dim, lambda x: np.zeros(np.shape(x)[:-1]),
                         lambda x: np.zeros(np.shape(x)), np.zeros(dim), 0.0,
                         kernel=(K.FLAT, np.zeros(3)))


class Quadratic(TargetSpec):
    """V = |x|^2 / 2 (standard Gaussian target)."""

    def __init__(self, dim: int):
        super().__init__(dim, lambda x: 0.5 * np.sum(np.square(x), axis=-1),
                         lambda x: np.asarray(x, dtype=float), np.zeros(dim), 0.0,
                         kernel=(K.QUADRATIC, np.zeros(3)))


def _require_cauchy(target):
    if not isinstance(target, GeneralizedCauchy):
        raise TypeError("a GeneralizedCauchy target is required")


def cauchy_radial_cdf(target: GeneralizedCauchy, R):
    """P(|X| <= R) = I_{R^2/(1+R^2)}(d/2, nu/2)."""
    _require_cauchy(target)
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise ValueError("R must be non-negative")
    r2 = R * R
    a, b = 0.5 * target.dim, 0.5 * target.nu
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(np.isinf(r2), 1.0, r2 / (1.0 + r2))
        # past z = 1/2 the complement is the accurate form
        out = np.where(z <= 0.5, betainc(a, b, z), 1.0 - betainc(b, a, 1.0 / (1.0 + r2)))
    return float(out) if out.ndim == 0 else out


def cauchy_radial_sf(target: GeneralizedCauchy, R):
    """P(|X| > R), evaluated directly for accuracy in the tail."""
    _require_cauchy(target)
    R = np.asarray(R, dtype=float)
    out = betainc(0.5 * target.nu, 0.5 * target.dim, 1.0 / (1.0 + R * R))
    return float(out) if out.ndim == 0 else out


def cauchy_radial_ppf(target: GeneralizedCauchy, q):
    """Inverse of :func:`cauchy_radial_cdf`."""
    _require_cauchy(target)
    q = np.asarray(q, dtype=float)
    a, b = 0.5 * target.dim, 0.5 * target.nu
    lo = q <= 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        z = betaincinv(a, b, np.where(lo, q, 0.5))  # z = R^2/(1+R^2)
        w = betaincinv(b, a, np.where(lo, 0.5, 1.0 - q))  # w = 1/(1+R^2)
        r = np.where(lo, np.sqrt(z / (1.0 - z)), np.sqrt(1.0 / w - 1.0))
    return float(r) if r.ndim == 0 else r


def cauchy_radial_pdf(target: GeneralizedCauchy, r):
    """Density of |X| on [0, inf)."""
    _require_cauchy(target)
    r = np.asarray(r, dtype=float)
    d, nu = target.dim, target.nu
    # surface area of the unit sphere times the normalized profile
    log_area = math.log(2.0) + 0.5 * d * math.log(math.pi) - gammaln(0.5 * d)
    with np.errstate(divide="ignore"):
        logp = (log_area + (d - 1) * np.log(r) - 0.5 * (d + nu) * np.log1p(r * r)
                - target.log_normalizer)
    return np.exp(logp)


def cauchy_tail_constant(nu1: float) -> float:
    """C_nu1 = 2^(1 - nu1/2) e^(-nu1) / ((1 + nu1) Gamma(nu1/2))."""
    return math.exp((1 - nu1 / 2) * math.log(2) - nu1 - math.log1p(nu1)
                    - math.lgamma(nu1 / 2))


def cauchy_tail_lower_bound(nu1: float, nu2: float, d: int, R):
    """Explicit lower bound on pi(|x| >= R) under the two-sided growth condition."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise ValueError("R must be positive")
    if not 0 <= nu1 <= nu2:
        raise ValueError("need 0 <= nu1 <= nu2")
    out = (cauchy_tail_constant(nu1) * d ** (nu1 / 2)
           * (1 + R ** -2.0) ** (-(d + nu2) / 2) * R ** (-nu2))
    return float(out) if out.ndim == 0 else out


def sample_exact(target: GeneralizedCauchy, n: int, rng):
    """``n`` i.i.d. draws, radial inverse CDF times a uniform direction."""
    _require_cauchy(target)
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = as_generator(rng)
    r = cauchy_radial_ppf(target, gen.random(n))
    z = gen.standard_normal((n, target.dim))
    nz = np.linalg.norm(z, axis=1)
    bad = nz == 0.0
    while np.any(bad):
        z[bad] = gen.standard_normal((int(bad.sum()), target.dim))
        nz = np.linalg.norm(z, axis=1)
        bad = nz == 0.0
    return np.asarray(r)[:, None] * z / nz[:, None]
