"""Isotropic alpha-stable random vectors.

The isotropic stable law at time ``t`` has characteristic function
``exp(-t |xi|^alpha)``. Draws are built by Gaussian subordination,
``X = t^(1/alpha) * sqrt(2 S) * Z`` with ``S`` one-sided stable of index
``alpha / 2``, normalized so that ``E exp(-lam S) = exp(-lam^(alpha/2))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .rng import as_generator


@dataclass(frozen=True)
class StableSpec:
    """Index, time scale and dimension of an isotropic stable law."""

    alpha: float
    t: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.t > 0.0:
            raise ValueError(f"t must be positive, got {self.t}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @property
    def spatial_scale(self) -> float:
        """Self-similarity factor t^(1/alpha) relative to unit time."""
        return self.t ** (1.0 / self.alpha)


class _Infinite:
    """Tagged marker for a divergent moment."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()


def is_infinite(value) -> bool:
    return value is INFINITE


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    se: float
    n: int


def _positive_uniform(gen, shape):
    u = gen.random(shape)
    bad = u == 0.0
    while np.any(bad):
        u[bad] = gen.random(int(bad.sum()))
        bad = u == 0.0
    return u


def _positive_exponential(gen, shape):
    e = gen.standard_exponential(shape)
    bad = e == 0.0
    while np.any(bad):
        e[bad] = gen.standard_exponential(int(bad.sum()))
        bad = e == 0.0
    return e


def sample_one_sided_stable(beta_prime: float, rng, size=None):
    """Positive stable variable with Laplace transform exp(-lam^beta_prime).

    Kanter's representation:
    S = sin(b U) / sin(U)^(1/b) * (sin((1-b) U) / E)^((1-b)/b)
    with U uniform on (0, pi) and E standard exponential.
    """
    b = float(beta_prime)
    if not 0.0 < b < 1.0:
        raise ValueError(f"beta_prime must lie in (0, 1), got {beta_prime}")
    gen = as_generator(rng)
    shape = 1 if size is None else size
    U = np.pi * _positive_uniform(gen, shape)
    E = _positive_exponential(gen, shape)
    # log form keeps the 1/b power from overflowing for small b
    logs = (np.log(np.sin(b * U)) - np.log(np.sin(U)) / b
            + (1.0 - b) / b * (np.log(np.sin((1.0 - b) * U)) - np.log(E)))
    s = np.exp(logs)
    return float(s[0]) if size is None else s


def sample_isotropic_stable(spec: StableSpec, rng, size=None):
    """Draw from the isotropic stable law described by ``spec``.

    Returns a ``(dim,)`` vector, or ``(size, dim)`` when ``size`` is given.
    """
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    if spec.alpha == 2.0:
        s = np.ones(n)
    else:
        s = sample_one_sided_stable(spec.alpha / 2.0, gen, size=n)
    z = gen.standard_normal((n, spec.dim))
    x = (spec.spatial_scale * np.sqrt(2.0 * s))[:, None] * z
    return x[0] if size is None else x


def sample_cauchy_vector(t: float, dim: int, rng, size=None):
    """Ratio construction t * Z1 / |Z2| of the isotropic Cauchy law."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    z1 = gen.standard_normal((n, dim))
    z2 = gen.standard_normal(n)
    bad = z2 == 0.0
    while np.any(bad):
        z2[bad] = gen.standard_normal(int(bad.sum()))
        bad = z2 == 0.0
    x = t * z1 / np.abs(z2)[:, None]
    return x[0] if size is None else x


class NoClosedForm(ValueError):
    pass


def _gaussian_abs_moment(p: float, dim: int) -> float:
    # |X|^2 = 2 chi2_d for X ~ N(0, 2 I)
    return float(np.exp(p * np.log(2.0) + gammaln((dim + p) / 2) - gammaln(dim / 2)))


def _cauchy_abs_moment(p: float, dim: int) -> float:
    return float(np.exp(gammaln((dim + p) / 2) + gammaln((1 - p) / 2)
                        - gammaln(dim / 2) - gammaln(0.5)))


def stable_abs_moment(alpha: float, p: float, dim: int, mode: str = "analytic",
                      n: int = 10**6, rng=None):
    """E|X|^p for the unit-time isotropic stable law in ``dim`` dimensions.

    ``analytic`` covers alpha = 1 (p < 1) and alpha = 2. ``monte_carlo``
    averages |X|^p over ``n`` generator draws and returns a
    :class:`MomentEstimate`. Both modes return :data:`INFINITE` when
    p >= alpha < 2.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    StableSpec(alpha, 1.0, dim)
    if alpha < 2.0 and p >= alpha:
        return INFINITE
    if mode == "analytic":
        if alpha == 2.0:
            return _gaussian_abs_moment(p, dim)
        if alpha == 1.0:
            return _cauchy_abs_moment(p, dim)
        raise NoClosedForm(f"no closed form for alpha={alpha}, p={p}; use monte_carlo")
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    x = sample_isotropic_stable(StableSpec(alpha, 1.0, dim), rng, size=n)
    v = np.linalg.norm(x, axis=1) ** p
    return MomentEstimate(float(v.mean()), float(v.std(ddof=1) / np.sqrt(n)), int(n))
