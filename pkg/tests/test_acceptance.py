"""Acceptance criteria 1-10 at their stated sizes and tolerances.

Each test records its verdict through ``report``; the session prints one
PASS/FAIL line per criterion at the end (see conftest.py). Criterion 5(b)
and, through it, 5(c) do not hold at this scale; they run in full and are
marked as strict expected failures. The measurements are in the ledger.
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy import stats

import conftest
import reference as ref
from htprox.diagnostics import surrogate_moment_track
from htprox.harness.config import load_config
from htprox.harness.experiments import (FLOOR_FACTOR, SEPARATION_EPS, run_separation,
                                        summarize_separation)
from htprox.oracles import RestrictedGaussianOracle, RestrictedStableOracle
from htprox.rng import RngStream
from htprox.samplers import SamplerConfig, run_chains, step_size_policy
from htprox.stablernd import (StableSpec, sample_cauchy_vector, sample_isotropic_stable,
                              stable_abs_moment)
from htprox.targets import GeneralizedCauchy, cauchy_radial_cdf
from htprox.theory import (BoundQuery, chi2_upper_bound, g_heat, g_ld, g_prox,
                           gaussian_kappa_min, gaussian_prox_tv_lower_bound, inexact_tv_bound,
                           iterations_to_eps, ld_tv_lower_bound, raso_log_proposal_bound,
                           renyi_inf_gaussian_init, stable_prox_moment_bound,
                           stable_prox_tv_lower_bound, tail_f, wfpi_chi2_bound,
                           wfpi_iteration_threshold, wfpi_optimal_r)

T2 = GeneralizedCauchy(1, 2.0)
SEED = 20240607

C5B_REASON = ("at d=1, nu=2 with 10^4 chains the Gaussian sampler reaches the radial-TV noise "
              "floor within a few iterations, so its TV at K* is about half the stable "
              "sampler's instead of twice it")


def report(num, part, ok, msg):
    conftest.ACCEPTANCE.setdefault(num, []).append((part, bool(ok), msg))
    print(f"criterion {num} {part}: {'PASS' if ok else 'FAIL'} ({msg})")


# --- 1: stable generator law -------------------------------------------------------

def test_c1_stable_charfn():
    n = 10**6
    t0 = time.perf_counter()
    worst, tol = 0.0, 4 / math.sqrt(n)
    j = 0
    for alpha in (0.5, 1.0, 1.5, 2.0):
        for d in (1, 3):
            for t in (0.5, 2.0):
                x = sample_isotropic_stable(StableSpec(alpha, t, d), RngStream(SEED, j), size=n)
                j += 1
                # isotropic law: project on a fixed unit direction
                u = np.ones(d) / math.sqrt(d)
                proj = x @ u
                for r in (0.25, 0.5, 1.0, 2.0, 4.0):
                    ecf = np.mean(np.exp(1j * r * proj))
                    worst = max(worst, abs(ecf - math.exp(-t * r**alpha)) / tol)
    secs = time.perf_counter() - t0
    ok = worst <= 1.0 and secs <= 120
    report(1, "charfn", ok, f"max |ecf-phi| = {worst:.3f} x 4/sqrt(n), {secs:.0f} s")
    assert ok


# --- 2: Cauchy consistency -------------------------------------------------------------

def test_c2_cauchy_routes_and_moment():
    n = 10**5
    a = sample_isotropic_stable(StableSpec(1.0, 1.0, 3), RngStream(SEED, 100), size=n)
    b = sample_cauchy_vector(1.0, 3, RngStream(SEED, 101), size=n)
    D = stats.ks_2samp(np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)).statistic
    exact = stable_abs_moment(1.0, 0.5, 1)
    mc = stable_abs_moment(1.0, 0.5, 1, mode="monte_carlo", n=10**6,
                           rng=RngStream(SEED, 102))
    z = abs(mc.value - math.sqrt(2)) / mc.se
    ok_ks, ok_m = D <= 0.01, abs(exact - math.sqrt(2)) <= 1e-12 and z <= 3
    report(2, "radial KS", ok_ks, f"D = {D:.4f}")
    report(2, "half moment", ok_m, f"closed form {exact:.15f}, MC off by {z:.2f} SE")
    assert ok_ks and ok_m


# --- 3: oracle exactness ---------------------------------------------------------------

def _sup_dist(xs, kind, y, eta):
    x = np.sort(xs.reshape(-1))
    grid = np.quantile(x, np.linspace(0.0005, 0.9995, 2000))
    F = ref.conditional_cdf_trapz(kind, y, eta, 2.0, grid)
    hi = np.searchsorted(x, grid, side="right") / x.size
    lo = np.searchsorted(x, grid, side="left") / x.size
    return max(np.abs(hi - F).max(), np.abs(lo - F).max())


def test_c3_oracle_exactness():
    t0 = time.perf_counter()
    worst, j = 0.0, 0
    for kind in ("rgo", "raso"):
        for eta in (0.05, 0.2):
            for y in (-1.0, 0.0, 0.7):
                o = (RestrictedGaussianOracle(T2, eta) if kind == "rgo"
                     else RestrictedStableOracle(T2, eta, 1.0))
                xs, _, _ = o.sample_many([y], 10**5, RngStream(SEED, 200 + j))
                j += 1
                worst = max(worst, _sup_dist(xs, kind, y, eta))
    secs = time.perf_counter() - t0
    ok = worst <= 0.02 and secs <= 180
    report(3, "sup CDF distance", ok, f"max over 12 cases = {worst:.4f}, {secs:.0f} s")
    assert ok


# --- 4: stationarity ---------------------------------------------------------------------

def test_c4_stationarity():
    cases = [("gaussian_proximal", None, 2.0), ("stable_proximal", 1.0, 2.0),
             ("stable_proximal", 1.0, 0.8)]
    pmin, j = 1.0, 0
    for kind, alpha, nu in cases:
        tgt = GeneralizedCauchy(1, nu)
        cfg = SamplerConfig(kind, step_size_policy(tgt, kind, 1.0), 50, chains=10**4,
                            alpha=alpha, init="exact_target", seed=SEED + j, tail_envelope=True)
        j += 1
        run = run_chains(cfg, tgt, [1, 10, 50])
        for k in (1, 10, 50):
            r = np.abs(run.at(k)[:, 0])
            pmin = min(pmin, stats.ks_1samp(r, lambda v: cauchy_radial_cdf(tgt, v)).pvalue)
    ok = pmin > 0.01
    report(4, "radial KS at k=1,10,50", ok, f"min p-value over 9 tests = {pmin:.3f}")
    assert ok


# --- 5, 6, 10: separation run ----------------------------------------------------------------

@pytest.fixture(scope="module")
def separation():
    cfg = load_config(None, {"experiment": "separation", "seed": SEED,
                             "c0_grid": [0.5, 1.0, 2.0], "sampler.iterations": 512,
                             "sampler.chains": 10**4, "sampler.init": "standard_gaussian",
                             "oracle.tail_envelope": True})
    t0 = time.perf_counter()
    rows, summary = run_separation(cfg)
    return rows, summary, time.perf_counter() - t0


def _curve(rows, exp_id, sampler):
    return sorted((r.k, r.div_value, r.div_se, r.bound_value) for r in rows
                  if r.experiment == exp_id and r.sampler == sampler
                  and r.div_kind == "radial_tv")


def test_c5a_stable_reaches_eps_log_linear(separation):
    rows, summary, secs = separation
    st = summary["groups"]["separation[c0=1]"]["stable"]
    ok = st["pass"] and secs <= 600
    report(5, "(a)", ok, f"K* = {st['K_star']}, R^2 = {st['r2']:.3f} above "
           f"{FLOOR_FACTOR} x floor, {secs:.0f} s")
    assert st["K_star"] is not None and st["r2"] >= 0.9 and ok


@pytest.mark.xfail(strict=True, reason=C5B_REASON)
def test_c5b_gaussian_gap_and_slope(separation):
    rows, summary, _ = separation
    ga = summary["groups"]["separation[c0=1]"]["gaussian"]
    ok = ga["pass"]
    report(5, "(b)", ok, f"TV ratio at K* = {ga['tv_ratio_at_K_star']:.2f} (need >= 2), "
           f"slope {ga['log_log_slope']:.2f} over {ga['k_eta_span']:.0f}x in k*eta")
    assert ga["ratio_pass"] and ga["slope_pass"]


@pytest.mark.xfail(strict=True, reason=C5B_REASON)
def test_c5c_conclusions_stable_in_c0(separation):
    rows, summary, _ = separation
    verdicts = {g: v["pass"] for g, v in summary["groups"].items()}
    ok = len(verdicts) == 3 and all(verdicts.values())
    report(5, "(c)", ok, ", ".join(f"{g}: {'PASS' if v else 'FAIL'}"
                                   for g, v in sorted(verdicts.items())))
    assert ok


def test_c5_summary_reproducible_from_rows(separation):
    rows, summary, _ = separation
    again = summarize_separation(rows, [0.2, 0.1, 0.05])
    assert repr(again) == repr(summary)
    assert SEPARATION_EPS == 0.05


def test_c6_lower_bound_soundness(separation):
    rows, _, _ = separation
    worst, count = math.inf, 0
    for c0 in ("0.5", "1", "2"):
        for k, v, se, bound in _curve(rows, f"separation[c0={c0}]", "gaussian_proximal"):
            worst = min(worst, v + 3 * se - bound)
            count += 1
    ok = worst >= 0 and count > 0
    report(6, "TV + 3 SE >= bound", ok, f"{count} recorded k, min margin {worst:.4f}")
    assert ok


def test_c10_stable_monotone(separation):
    rows, _, _ = separation
    worst = -math.inf
    for c0 in ("0.5", "1", "2"):
        c = _curve(rows, f"separation[c0={c0}]", "stable_proximal")
        for (_, v0, s0, _), (_, v1, s1, _) in zip(c, c[1:]):
            worst = max(worst, (v1 - v0) / math.hypot(s0, s1))
    ok = worst <= 2.0
    report(10, "consecutive increase / SE", ok, f"max = {worst:.2f} (limit 2)")
    assert ok


# --- 7: moment growth ---------------------------------------------------------------------

def test_c7_moment_growth():
    kappa, d, nu = 2.0, 1, 2.0
    m = kappa * (d + nu)
    eta = step_size_policy(T2, "gaussian_proximal")
    rec = sorted({0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000})
    cfg = SamplerConfig("gaussian_proximal", eta, 1000, chains=10**4, init="point_mass",
                        x0=(0.0,), seed=SEED, tail_envelope=True)
    run = run_chains(cfg, T2, rec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tr = surrogate_moment_track(run, kappa, nu)
    worst = -math.inf
    for k, mean, se in zip(tr.record_at, tr.mean, tr.se):
        val = mean ** (2 / m)
        se_t = (2 / m) * mean ** (2 / m - 1) * se
        rhs = 1 + 4 * kappa * (d + nu) * eta * k
        worst = max(worst, val - rhs - 3 * se_t)
    ok = worst <= 0
    report(7, "E[G]^(2/m) <= 1 + 4 kappa (d+nu) eta k + 3 SE", ok,
           f"max excess {worst:.3g} over k <= 1000")
    assert ok


# --- 8: inexact oracle ---------------------------------------------------------------------

def test_c8_inexact_propagation():
    eps, k, n = 0.01, 20, 10**4
    cfg = SamplerConfig("stable_proximal", step_size_policy(T2, "stable_proximal"), k,
                        chains=n, alpha=1.0, seed=SEED, eps_tv=eps, tail_envelope=True)
    run = run_chains(cfg, T2, [k])
    # a chain leaves its exact twin at its first corrupted oracle call
    frac = float(np.mean(run.first_corrupted >= 0))
    p = 1 - (1 - eps) ** k
    se = math.sqrt(p * (1 - p) / n)
    ok = abs(frac - p) <= 3 * se and frac <= inexact_tv_bound(0.0, k, eps) + 3 * se
    report(8, "divergence fraction", ok, f"{frac:.4f} vs 1-(1-eps)^k = {p:.4f}, SE {se:.4f}")
    assert ok


# --- 9: theory double entry ---------------------------------------------------------------

def test_c9_theory_double_entry():
    g = np.random.default_rng(SEED)
    ys = np.logspace(0, 12, 400)
    worst = 0.0

    def rel(a, b):
        return abs(a - b) / max(abs(b), 1e-300)

    for _ in range(100):
        C, eta, chi0 = g.uniform(0.1, 10), g.uniform(1e-3, 1), g.uniform(1, 1e4)
        k = int(g.integers(0, 500))
        worst = max(worst, rel(chi2_upper_bound(C, eta, k, chi0), ref.chi2_upper(C, eta, k, chi0)))
        tv0, e = g.uniform(), g.uniform(0, 0.01)
        worst = max(worst, rel(inexact_tv_bound(tv0, k, e), ref.inexact_tv(tv0, k, e)))
        eps = g.uniform(0.01, 0.5)
        worst = max(worst, rel(iterations_to_eps(C, eta, chi0, eps),
                               ref.iterations_to_eps(C, eta, chi0, eps)))
        c, nu = g.uniform(0.1, 5), g.uniform(0.1, 0.9)
        r, rinf = g.uniform(1e-4, 1), g.uniform(0, 3)
        worst = max(worst, rel(wfpi_chi2_bound(c, nu, eta, k, r, chi0, rinf),
                               ref.wfpi_bound(c, nu, eta, k, r, chi0, rinf)))
        worst = max(worst, rel(wfpi_optimal_r(c, nu, eta, eps, k, rinf),
                               ref.wfpi_r(c, nu, eta, eps, k, rinf)))
        worst = max(worst, rel(wfpi_iteration_threshold(c, nu, eta, eps, chi0, rinf),
                               ref.wfpi_threshold(c, nu, eta, eps, chi0, rinf)))
        d, nu2 = int(g.integers(1, 6)), g.uniform(0.5, 4)
        L, beta, yn = g.uniform(0.5, 20), g.uniform(0.05, 0.95), g.uniform(0, 10)
        worst = max(worst, rel(raso_log_proposal_bound(L, beta, d, yn, eta),
                               ref.raso_log_bound(L, beta, d, yn, eta)))
        # the log-gamma route rounds differently near R_inf = 0
        worst = max(worst, abs(renyi_inf_gaussian_init(d, nu2) - ref.renyi_inf(d, nu2))
                    / max(1.0, abs(ref.renyi_inf(d, nu2))))
        nu1 = g.uniform(0.3, 1) * nu2
        kappa = gaussian_kappa_min(d, nu2) * g.uniform(1, 2)
        E0, kk = g.uniform(1, 3), int(g.integers(0, 10**4))
        q = BoundQuery(nu1, nu2, d, kappa=kappa, E_G0=E0, y_grid=ys)
        mm = kappa * (d + nu2)
        worst = max(worst, rel(g_prox(q, kk, eta), ref.g_prox(d, nu2, kappa, E0, eta, kk)))
        worst = max(worst, rel(g_ld(q, eta * kk), ref.g_ld(d, nu2, kappa, E0, eta * kk)))
        yv = g.uniform(1, 1e6)
        worst = max(worst, rel(float(tail_f(q, yv, mm)), ref.f_tail(nu1, nu2, d, mm, yv)))
        a = gaussian_prox_tv_lower_bound(q, kk, eta)
        b = ref.gaussian_lower(nu1, nu2, d, kappa, E0, eta, kk, ys)
        worst = max(worst, abs(a - b) / max(b, 1e-3))
        a = ld_tv_lower_bound(q, eta * kk)
        b = ref.ld_lower(nu1, nu2, d, kappa, E0, eta * kk, ys)
        worst = max(worst, abs(a - b) / max(b, 1e-3))
        nus = g.uniform(0.1, 0.8)
        tau = nus + g.uniform(0.05, 0.95) * (1 - nus)
        qs = BoundQuery(nus, nus, 1, alpha=1.0, tau=tau, E_G0=E0, y_grid=ys)
        mt = stable_abs_moment(1.0, tau, 1)
        ks = int(g.integers(0, 300))
        worst = max(worst, rel(stable_prox_moment_bound(qs, ks, eta / 10, mt),
                               ref.stable_moment_recursion(E0, 1.0, tau, eta / 10, ks, mt)))
        a = stable_prox_tv_lower_bound(qs, ks, eta / 10, mt)
        b = ref.stable_lower(nus, nus, 1, 1.0, tau, E0, eta / 10, ks, mt, ys)
        worst = max(worst, abs(a - b) / max(b, 1e-3))
    # identity: the diffusion clock runs at eta*k, the Brownian clock at 2*eta*k
    ident = 0.0
    for _ in range(100):
        nu, d, E0 = g.uniform(0.3, 5), int(g.integers(1, 8)), g.uniform(1, 100)
        k, eta = int(g.integers(0, 10**6)), g.uniform(1e-4, 1)
        q = BoundQuery(nu, nu, d, E_G0=E0)
        gp = g_prox(q, k, eta)
        ident = max(ident, rel(g_ld(q, eta * k), gp), rel(g_heat(q, 2 * eta * k), gp))
    ok_de, ok_id = worst <= 1e-12, ident <= 1e-12
    report(9, "double entry", ok_de, f"max relative error {worst:.2e} over 100 draws")
    report(9, "clock identity", ok_id, f"g_LD(eta k) = g_heat(2 eta k) = g_prox(k), "
           f"max rel {ident:.1e}")
    assert ok_de and ok_id
