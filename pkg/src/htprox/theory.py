"""Evaluators for the convergence upper bounds and TV lower bounds.

Lower bounds are assembled at lemma level with explicit constants:
TV(mu, rho) >= mu(G >= y) - E_rho[G] / y for every y >= 1, with
mu(G >= y) bounded below by the explicit tail estimate ``f(y)`` and E_rho[G]
bounded above by a moment-growth bound ``g``. The supremum over ``y`` is
taken numerically on a log-spaced grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .stablernd import INFINITE, stable_abs_moment
from .targets import cauchy_tail_constant


def default_y_grid(points: int = 400, upper: float = 1e12) -> np.ndarray:
    return np.logspace(0.0, math.log10(upper), points)


# --- upper bounds -----------------------------------------------------------

def chi2_upper_bound(C_fpi: float, eta: float, k: int, chi2_0: float) -> float:
    """exp(-k eta / (C + eta)) chi2_0."""
    if not (C_fpi > 0 and eta > 0 and chi2_0 > 0) or k < 0:
        raise ValueError("need C_fpi, eta, chi2_0 > 0 and k >= 0")
    return math.exp(-k * eta / (C_fpi + eta)) * chi2_0


def inexact_tv_bound(tv_0: float, k: int, eps_tv: float) -> float:
    """tv_0 + k eps_tv."""
    if not 0 <= tv_0 <= 1:
        raise ValueError("tv_0 must lie in [0, 1]")
    return tv_0 + k * eps_tv


def iterations_to_eps(C_fpi: float, eta: float, chi2_0: float, eps: float) -> int:
    """ceil((1 + C/eta) log(chi2_0 / eps^2)), floored at 0."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    v = (1.0 + C_fpi / eta) * math.log(chi2_0 / eps**2)
    return max(0, math.ceil(v - 1e-12))


def wfpi_beta(c: float, nu: float, r: float) -> float:
    return c * (1.0 + r ** (-(1.0 - nu) / nu))


def wfpi_chi2_bound(c: float, nu: float, eta: float, k: int, r: float,
                    chi2_0: float, rinf_0: float) -> float:
    """chi^2 bound under a weak fractional Poincaré inequality.

    exp(-k eta/(beta(r)+eta)) chi2_0
      + 4 r (1 - exp(-(k+1) eta/(beta(r)+eta))) exp(2 rinf_0)
    with beta(r) = c (1 + r^(-(1-nu)/nu)).
    """
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    if not r > 0:
        raise ValueError("r must be positive")
    b = wfpi_beta(c, nu, r) + eta
    return (math.exp(-k * eta / b) * chi2_0
            + 4.0 * r * (-math.expm1(-(k + 1) * eta / b)) * math.exp(2.0 * rinf_0))


def wfpi_optimal_r(c: float, nu: float, eta: float, eps: float, k: int,
                   rinf_0: float) -> float:
    """r = exp(-2 nu R_inf) c^nu eps^nu / ((k+1)^nu eta^nu)."""
    return math.exp(-2 * nu * rinf_0) * (c * eps / ((k + 1) * eta)) ** nu


def wfpi_iteration_threshold(c: float, nu: float, eta: float, eps: float,
                             chi2_0: float, rinf_0: float) -> float:
    """Iteration count beyond which the weak-FPI bound is <= eps (as displayed)."""
    lead = (1.0 + c ** (1 / nu) * eta ** (-1 / nu)
            + 2 ** (1 / nu) * c / eta * eps ** (-(1 - nu) / nu)
            * math.exp(2 * (1 - nu) * rinf_0 / nu))
    return lead * math.log(2 * chi2_0 / eps) ** (1 / nu)


def renyi_inf_gaussian_init(d: int, nu: float) -> float:
    """Upper bound on R_inf(N(0, I) | pi_nu): ln(2^(nu/2) Gamma(nu/2)) + ln((d+nu)/(2e))."""
    return nu / 2 * math.log(2) + math.lgamma(nu / 2) + math.log((d + nu) / (2 * math.e))


def raso_log_proposal_bound(L: float, beta: float, d: int, y_norm: float,
                            eta: float) -> float:
    """Bound on log E[#proposals] of the alpha=1 oracle at |y| = y_norm.

    L |y|^beta + Gamma((d+1)/2) Gamma((1-beta)/2) L / (Gamma((d+1-beta)/2) sqrt(pi)) eta^beta
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    c = math.exp(gammaln((d + 1) / 2) + gammaln((1 - beta) / 2)
                 - gammaln((d + 1 - beta) / 2) - 0.5 * math.log(math.pi))
    return L * y_norm**beta + c * L * eta**beta


# --- lower bounds -----------------------------------------------------------

@dataclass
class BoundQuery:
    """Free parameters of a lower-bound evaluation.

    ``kappa`` is the surrogate exponent of G = (1+|x|^2)^(kappa (d+nu2)/2).
    For the Gaussian bounds it defaults to kappa_delta when ``delta`` is
    given and to 1 v 2/(d+nu2) otherwise; for the stable bound it is
    tau / (d + nu2). ``y_grid`` = None picks a log grid around the
    analytic maximizer of f(y) - g/y.
    """

    nu1: float
    nu2: float
    d: int
    alpha: Optional[float] = None
    tau: Optional[float] = None
    kappa: Optional[float] = None
    delta: Optional[float] = None
    E_G0: float = 1.0
    y_grid: Optional[np.ndarray] = None
    C_low: Optional[float] = None
    K0: Optional[float] = None
    kappa_delta: Optional[float] = None
    C_delta_mu0: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.nu1 <= self.nu2:
            raise ValueError("need 0 <= nu1 <= nu2")
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.y_grid is not None:
            self.y_grid = np.asarray(self.y_grid, dtype=float)
            if self.y_grid.ndim != 1 or self.y_grid.size == 0 or self.y_grid[0] < 1 \
                    or np.any(np.diff(self.y_grid) <= 0):
                raise ValueError("y_grid must be strictly increasing and >= 1")
        if not self.E_G0 >= 1:
            raise ValueError("E_G0 must be >= 1 (G >= 1 pointwise)")


def gaussian_kappa_min(d: int, nu2: float) -> float:
    return max(1.0, 2.0 / (d + nu2))


def kappa_delta(d: int, nu2: float, delta: float) -> float:
    """1 v 2/(d+nu2) v nu2 (1+delta) / ((d+nu2) delta)."""
    return max(gaussian_kappa_min(d, nu2), nu2 * (1 + delta) / ((d + nu2) * delta))


def _gaussian_kappa(q: BoundQuery) -> float:
    if q.kappa is not None:
        kappa = q.kappa
    elif q.delta is not None:
        kappa = kappa_delta(q.d, q.nu2, q.delta)
    else:
        kappa = gaussian_kappa_min(q.d, q.nu2)
    if kappa < gaussian_kappa_min(q.d, q.nu2) - 1e-15:
        raise ValueError(f"kappa must be >= 1 ∨ 2/(d+nu2), got {kappa}")
    return kappa


def _log_tail_f(q: BoundQuery, ly, m: float):
    return (math.log(cauchy_tail_constant(q.nu1)) + q.nu1 / 2 * math.log(q.d)
            - (q.d + q.nu2) / 2 * np.log1p(np.exp(-2.0 * ly / m)) - q.nu2 / m * ly)


def tail_f(q: BoundQuery, y, m: float) -> np.ndarray:
    """C_nu1 d^(nu1/2) (1 + y^(-2/m))^(-(d+nu2)/2) y^(-nu2/m)."""
    return np.exp(_log_tail_f(q, np.log(np.asarray(y, dtype=float)), m))


def _sup_bound(q: BoundQuery, m: float, log_moment: float) -> float:
    """max over y of f(y) - exp(log_moment) / y, clamped to [0, 1]."""
    def vals(ly):
        return np.exp(_log_tail_f(q, ly, m)) - np.exp(log_moment - ly)

    if q.y_grid is not None:
        v = float(np.max(vals(np.log(q.y_grid))))
    else:
        a = q.nu2 / m
        logc = math.log(cauchy_tail_constant(q.nu1)) + q.nu1 / 2 * math.log(q.d)
        # maximizer of c y^-a - g/y, where the (1+y^(-2/m)) factor is ~1
        ly_star = max(0.0, (log_moment - math.log(a) - logc) / (1.0 - a))
        ly = np.linspace(0.0, max(math.log(1e12), ly_star + 10.0), 2001)
        w = vals(ly)
        j = int(np.argmax(w))
        step = ly[1] - ly[0]
        fine = np.linspace(max(0.0, ly[j] - step), ly[j] + step, 401)
        v = float(max(w[j], np.max(vals(fine))))
    return min(1.0, max(0.0, v))


def _log_growth(q: BoundQuery, kappa: float, clock: float, rate: float) -> float:
    m = kappa * (q.d + q.nu2)
    return m / 2.0 * math.log(q.E_G0 ** (2.0 / m) + rate * kappa * (q.d + q.nu2) * clock)


def g_prox(q: BoundQuery, k: float, eta: float) -> float:
    """Moment bound after k Gaussian proximal steps: (E0^(2/m) + 4 kappa (d+nu2) eta k)^(m/2)."""
    return math.exp(_log_growth(q, _gaussian_kappa(q), eta * k, 4.0))


def g_ld(q: BoundQuery, t: float) -> float:
    """Moment bound along the Langevin diffusion at time t."""
    return math.exp(_log_growth(q, _gaussian_kappa(q), t, 4.0))


def g_heat(q: BoundQuery, s: float) -> float:
    """Moment bound along standard Brownian motion (generator Laplacian/2) at time s."""
    return math.exp(_log_growth(q, _gaussian_kappa(q), s, 2.0))


def gaussian_prox_tv_lower_bound(q: BoundQuery, k: int, eta: float) -> float:
    """TV lower bound for the k-th Gaussian proximal iterate."""
    if k < 0 or not eta > 0:
        raise ValueError("need k >= 0 and eta > 0")
    kappa = _gaussian_kappa(q)
    m = kappa * (q.d + q.nu2)
    return _sup_bound(q, m, _log_growth(q, kappa, eta * k, 4.0))


def ld_tv_lower_bound(q: BoundQuery, t: float) -> float:
    """TV lower bound for the Langevin diffusion at time t."""
    if t < 0:
        raise ValueError("t must be non-negative")
    kappa = _gaussian_kappa(q)
    m = kappa * (q.d + q.nu2)
    return _sup_bound(q, m, _log_growth(q, kappa, t, 4.0))


def _stable_tau(q: BoundQuery) -> float:
    if q.alpha is None or q.tau is None:
        raise ValueError("stable bound needs alpha and tau")
    lo = q.nu2 * (q.d + q.nu2) / (q.d + q.nu1)
    if not lo < q.tau < q.alpha:
        raise ValueError(f"tau must lie in ({lo}, {q.alpha}), got {q.tau}")
    return q.tau


def stable_prox_moment_bound(q: BoundQuery, k: int, eta: float, m_tau: float) -> float:
    """Certified E[G(x_k)] bound from the one-step recursion.

    E_{j+1} <= a E_j + b with a = (1+r)^(m/2),
    b = 2^(m/alpha) eta^(m/alpha) (1 + 1/r)^(m/2) m_tau, m = tau and
    r = 2 / (m k); summed in closed form over k steps.
    """
    tau = _stable_tau(q)
    if k == 0:
        return q.E_G0
    m = tau
    r = 2.0 / (m * k)
    a = (1.0 + r) ** (m / 2)
    b = 2.0 ** (m / q.alpha) * eta ** (m / q.alpha) * (1.0 + 1.0 / r) ** (m / 2) * m_tau
    ak = a**k
    return ak * q.E_G0 + b * (ak - 1.0) / (a - 1.0)


def stable_prox_tv_lower_bound(q: BoundQuery, k: int, eta: float,
                               m_tau: Optional[float] = None) -> float:
    """TV lower bound for the k-th stable proximal iterate."""
    tau = _stable_tau(q)
    if k < 0 or not eta > 0:
        raise ValueError("need k >= 0 and eta > 0")
    if m_tau is None:
        m_tau = stable_abs_moment(q.alpha, tau, q.d)
    if m_tau is INFINITE or not math.isfinite(m_tau):
        raise ValueError("m_tau must be finite")
    kappa = tau / (q.d + q.nu2)
    E_k = stable_prox_moment_bound(q, k, eta, m_tau)
    m1 = kappa * (q.d + q.nu1)
    return _sup_bound(q, m1, math.log(E_k))


# --- complexity records -----------------------------------------------------

@dataclass(frozen=True)
class ComplexityRecord:
    scenario: str
    formula: str
    d_exponent: float
    inv_eps_exponent: float
    log_eps: bool
    value: float


SCENARIOS = ("ideal", "implementable_nu_ge_1", "implementable_nu_lt_1", "gaussian_lower")


def complexity_tables(scenario: str, d: int, eps: float, nu: Optional[float] = None,
                      C_fpi: Optional[float] = None, eta: Optional[float] = None,
                      c: Optional[float] = None, multiplier: float = 1.0) -> ComplexityRecord:
    """Iteration-complexity scaling and its value at the supplied constants."""
    def need(**kw):
        missing = [k for k, v in kw.items() if v is None]
        if missing:
            raise ValueError(f"missing constants for {scenario}: {missing}")

    if scenario == "ideal":
        need(C_fpi=C_fpi, eta=eta)
        v = (1 + C_fpi / eta) * math.log(d / eps)
        return ComplexityRecord(scenario, "(1 + C_FPI/eta) log(d/eps)", 0.0, 0.0, True,
                                multiplier * v)
    if scenario == "implementable_nu_ge_1":
        need(C_fpi=C_fpi, nu=nu)
        v = C_fpi * d**0.5 * (d + nu) ** 4 * math.log(d / eps)
        return ComplexityRecord(scenario, "C_FPI d^(1/2) (d+nu)^4 log(d/eps)", 4.5, 0.0,
                                True, multiplier * v)
    if scenario == "implementable_nu_lt_1":
        need(c=c, nu=nu)
        a = c ** (1 / nu) * d ** (1 / (2 * nu) + 4 / nu**2)
        b = c * d ** (0.5 + 4 / nu) * eps ** (-(1 / nu) + 1)
        dexp = (1 / (2 * nu) + 4 / nu**2) if a >= b else 0.5 + 4 / nu
        return ComplexityRecord(
            scenario, "max{c^(1/nu) d^(1/(2nu)+4/nu^2), c d^(1/2+4/nu) eps^(1-1/nu)}",
            dexp, 0.0 if a >= b else 1 / nu - 1, False, multiplier * max(a, b))
    if scenario == "gaussian_lower":
        need(nu=nu)
        return ComplexityRecord(scenario, "d^(3/2) eps^(-2/nu)", 1.5, 2 / nu, False,
                                multiplier * d**1.5 * eps ** (-2 / nu))
    raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
