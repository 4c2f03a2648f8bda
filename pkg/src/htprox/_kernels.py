"""Compiled inner loops.

Everything here is scalar-loop numba code driven by a numpy ``Generator``.
Draw order is fixed and documented per function because the pure-Python
reference path in :mod:`htprox.oracles` replays the same order and the test
suite compares the two routes bit for bit.

Target codes: 0 flat (V = 0), 1 generalized Cauchy, 2 quadratic |x|^2/2.
Cauchy params: ``par = [(d+nu)/2, nu, log Z]`` with Z the normalizer of
exp(-V).
"""

import math

import numpy as np
from numba import njit

FLAT = 0
CAUCHY = 1
QUADRATIC = 2

ORACLE_GAUSSIAN = 0
ORACLE_STABLE = 1

SAMPLER_ULA = 0
SAMPLER_GAUSSIAN = 1
SAMPLER_STABLE = 2

ENVELOPE_WEIGHT = 0.5
_LOG_W = math.log(ENVELOPE_WEIGHT)
_LOG_1MW = math.log(1.0 - ENVELOPE_WEIGHT)

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def sqnorm(x):
    s = 0.0
    for i in range(x.shape[0]):
        s += x[i] * x[i]
    return s


@njit(**_opts)
def potential(code, par, x):
    if code == FLAT:
        return 0.0
    s = sqnorm(x)
    if code == CAUCHY:
        return par[0] * math.log1p(s)
    return 0.5 * s


@njit(**_opts)
def gradient(code, par, x, out):
    if code == FLAT:
        out[:] = 0.0
    elif code == CAUCHY:
        c = 2.0 * par[0] / (1.0 + sqnorm(x))
        for i in range(x.shape[0]):
            out[i] = c * x[i]
    else:
        out[:] = x


@njit(**_opts)
def fill_normal(gen, out):
    for i in range(out.shape[0]):
        out[i] = gen.standard_normal()


@njit(**_opts)
def one_sided_stable(gen, a):
    """Kanter draw with Laplace transform exp(-lambda^a). Order: U then E."""
    u = 0.0
    while u == 0.0:
        u = gen.random()
    U = math.pi * u
    e = 0.0
    while e == 0.0:
        e = gen.standard_exponential()
    logs = (math.log(math.sin(a * U)) - math.log(math.sin(U)) / a
            + (1.0 - a) / a * (math.log(math.sin((1.0 - a) * U)) - math.log(e)))
    return math.exp(logs)


@njit(**_opts)
def stable_unit(gen, alpha, out):
    """Unit-time isotropic alpha-stable draw written into ``out``.

    alpha=2: sqrt(2) Z.  alpha=1: ratio Z1/|Z2| (Z2 redrawn if zero).
    Otherwise subordination sqrt(2S) Z with S one-sided of index alpha/2,
    S drawn before Z.
    """
    if alpha == 2.0:
        fill_normal(gen, out)
        for i in range(out.shape[0]):
            out[i] *= math.sqrt(2.0)
    elif alpha == 1.0:
        fill_normal(gen, out)
        z2 = 0.0
        while z2 == 0.0:
            z2 = gen.standard_normal()
        z2 = abs(z2)
        for i in range(out.shape[0]):
            out[i] /= z2
    else:
        s = math.sqrt(2.0 * one_sided_stable(gen, 0.5 * alpha))
        fill_normal(gen, out)
        for i in range(out.shape[0]):
            out[i] *= s


@njit(**_opts)
def cauchy_target_draw(gen, nu, out):
    # multivariate-t representation: Z / sqrt(chi2_nu)
    fill_normal(gen, out)
    g = 0.0
    while g == 0.0:
        g = gen.standard_gamma(0.5 * nu)
    s = math.sqrt(2.0 * g)
    for i in range(out.shape[0]):
        out[i] /= s


@njit(**_opts)
def _log_target_radial(par, r):
    return -par[0] * math.log1p(r * r) - par[2]


@njit(**_opts)
def _log_kernel_radial(okind, eta, d, r):
    if okind == ORACLE_GAUSSIAN:
        return -0.5 * d * math.log(2.0 * math.pi * eta) - r * r / (2.0 * eta)
    # Cauchy kernel with scale eta
    h = 0.5 * (d + 1)
    return (math.lgamma(h) - h * math.log(math.pi) + math.log(eta)
            - h * math.log(r * r + eta * eta))


@njit(**_opts)
def envelope_available(code, okind, alpha):
    return code == CAUCHY and (okind == ORACLE_GAUSSIAN or alpha == 1.0)


@njit(**_opts)
def envelope_log_bound(par, okind, eta, d, ynorm):
    # ratio pi*p / (w p + (1-w) pi) <= max(pi(|y|/2)/w, p(|y|/2)/(1-w))
    h = 0.5 * ynorm
    a = _log_target_radial(par, h) - _LOG_W
    b = _log_kernel_radial(okind, eta, d, h) - _LOG_1MW
    return a if a > b else b


@njit(**_opts)
def _propose(gen, okind, alpha, scale, y, x):
    if okind == ORACLE_GAUSSIAN:
        fill_normal(gen, x)
    else:
        stable_unit(gen, alpha, x)
    for i in range(y.shape[0]):
        x[i] = y[i] + scale * x[i]


@njit(**_opts)
def _envelope_loop(code, par, okind, y, eta, alpha, scale, logm, gen, budget, x):
    d = y.shape[0]
    n = 0
    while n < budget:
        n += 1
        if gen.random() < ENVELOPE_WEIGHT:
            _propose(gen, okind, alpha, scale, y, x)
        else:
            cauchy_target_draw(gen, par[1], x)
        rx = math.sqrt(sqnorm(x))
        s = 0.0
        for i in range(d):
            s += (x[i] - y[i]) ** 2
        lpi = _log_target_radial(par, rx)
        lp = _log_kernel_radial(okind, eta, d, math.sqrt(s))
        a = _LOG_W + lp
        b = _LOG_1MW + lpi
        lq = max(a, b) + math.log1p(math.exp(-abs(a - b)))
        la = lpi + lp - lq - logm
        u = gen.random()
        if la >= 0.0 or u < math.exp(la):
            return n
    return -1


@njit(**_opts)
def oracle(code, par, okind, y, eta, alpha, shift, gen, budget, env, eps_tv, x):
    """One oracle call. Returns (proposals, corrupted); proposals=-1 on overflow.

    Draw order: [corruption uniform if eps_tv > 0], then per proposal the
    increment draws followed by one acceptance uniform.
    """
    if okind == ORACLE_GAUSSIAN:
        scale = math.sqrt(eta)
    else:
        scale = eta ** (1.0 / alpha)
    if eps_tv > 0.0:
        if gen.random() < eps_tv:
            _propose(gen, okind, alpha, scale, y, x)
            return 1, True
    if env and envelope_available(code, okind, alpha):
        logm = envelope_log_bound(par, okind, eta, y.shape[0], math.sqrt(sqnorm(y)))
        # exact either way; take the envelope when its acceptance beats
        # the global-minimum rule, i.e. M(y) * int exp(-(V - shift)) < 1
        if logm + par[2] + shift < 0.0:
            return _envelope_loop(code, par, okind, y, eta, alpha, scale, logm,
                                  gen, budget, x), False
    n = 0
    while n < budget:
        n += 1
        _propose(gen, okind, alpha, scale, y, x)
        la = shift - potential(code, par, x)
        u = gen.random()
        if la >= 0.0 or u < math.exp(la):
            return n, False
    return -1, False


@njit(**_opts)
def oracle_repeat(code, par, okind, y, eta, alpha, shift, gen, budget, env, eps_tv,
                  out, proposals, corrupted):
    """Call the oracle ``out.shape[0]`` times at the same y."""
    x = np.empty(y.shape[0])
    for j in range(out.shape[0]):
        n, bad = oracle(code, par, okind, y, eta, alpha, shift, gen, budget, env,
                        eps_tv, x)
        proposals[j] = n
        corrupted[j] = bad
        if n < 0:
            return j
        out[j, :] = x
    return -1


@njit(**_opts)
def run_chain(skind, code, par, x, eta, alpha, n_iter, rec_slot, gen, budget, shift,
              env, eps_tv, samples, rej):
    """Advance one chain ``n_iter`` steps in place.

    Returns (status, failed_iteration, first_corrupted_iteration); status 1
    means the oracle budget was exhausted.
    """
    d = x.shape[0]
    y = np.empty(d)
    xn = np.empty(d)
    g = np.empty(d)
    first_bad = -1
    if rec_slot[0] >= 0:
        samples[rec_slot[0], :] = x
    for k in range(n_iter):
        if skind == SAMPLER_ULA:
            gradient(code, par, x, g)
            fill_normal(gen, y)
            c = math.sqrt(2.0 * eta)
            for i in range(d):
                x[i] = x[i] - eta * g[i] + c * y[i]
            rej[k] = 0
        else:
            if skind == SAMPLER_GAUSSIAN:
                okind = ORACLE_GAUSSIAN
                fill_normal(gen, y)
                c = math.sqrt(eta)
            else:
                okind = ORACLE_STABLE
                stable_unit(gen, alpha, y)
                c = eta ** (1.0 / alpha)
            for i in range(d):
                y[i] = x[i] + c * y[i]
            n, bad = oracle(code, par, okind, y, eta, alpha, shift, gen, budget, env,
                            eps_tv, xn)
            if n < 0:
                return 1, k, first_bad
            rej[k] = n - 1
            if bad and first_bad < 0:
                first_bad = k
            x[:] = xn
        if rec_slot[k + 1] >= 0:
            samples[rec_slot[k + 1], :] = x
    return 0, -1, first_bad
