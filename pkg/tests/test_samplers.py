import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from htprox.oracles import OracleBudgetError
from htprox.rng import RngStream
from htprox.samplers import (SamplerConfig, run_chains, step_gaussian_proximal,
                             step_size_policy, step_stable_proximal, step_ula)
from htprox.targets import (FlatPotential, GeneralizedCauchy, Quadratic, TargetSpec,
                            cauchy_radial_cdf)

T = GeneralizedCauchy(1, 2.0)


def python_cauchy(dim, nu):
    """Same potential as GeneralizedCauchy but with no compiled kernel."""
    c = 0.5 * (dim + nu)
    return TargetSpec(dim, lambda x: c * np.log1p(np.sum(np.square(x), axis=-1)),
                      lambda x: 2 * c * x / (1 + np.sum(np.square(x))), np.zeros(dim), 0.0)


# --- single steps ----------------------------------------------------------------

def test_flat_gaussian_step_variance():
    n, eta = 10**5, 0.3
    cfg = SamplerConfig("gaussian_proximal", eta, 1, chains=n, init="point_mass", x0=(0.0,))
    x1 = run_chains(cfg, FlatPotential(1), [1]).samples[:, 0, 0]
    se = 2 * eta * math.sqrt(2 / n)
    assert abs(x1.var() - 2 * eta) <= 3 * se


def test_flat_stable_step_is_cauchy_scale_2eta():
    n, eta = 10**5, 0.25
    cfg = SamplerConfig("stable_proximal", eta, 1, chains=n, alpha=1.0, init="point_mass",
                        x0=(0.0,))
    r = np.abs(run_chains(cfg, FlatPotential(1), [1]).samples[:, 0, 0])
    cdf = lambda v: 2 / math.pi * np.arctan(v / (2 * eta))  # noqa: E731
    assert stats.ks_1samp(r, cdf).statistic <= 0.01


def test_small_eta_barely_moves():
    eta = 1e-6
    x0 = np.array([0.4, -0.2])
    tgt = GeneralizedCauchy(2, 1.0)
    msd = np.mean([np.sum((step_gaussian_proximal(tgt, x0, eta, RngStream(1, i))[1] - x0) ** 2)
                   for i in range(200)])
    assert msd <= 3 * eta * (2 + 1)


def test_step_functions_shapes():
    tgt = GeneralizedCauchy(3, 1.0)
    y, x, rej = step_stable_proximal(tgt, np.zeros(3), 0.05, 1.0, RngStream(2, 0))
    assert y.shape == x.shape == (3,) and rej >= 0
    y, x, rej = step_gaussian_proximal(tgt, np.ones(3), 0.05, RngStream(2, 1))
    assert x.shape == (3,)
    with pytest.raises(ValueError):
        step_stable_proximal(tgt, np.zeros(3), 0.05, 2.0, 0)


def test_ula_zero_gradient_variance():
    n, eta = 10**5, 0.2
    g = RngStream(3, 0).generator
    x = np.array([step_ula(FlatPotential(1), np.zeros(1), eta, g)[0] for _ in range(n)])
    assert abs(x.var() - 2 * eta) <= 3 * 2 * eta * math.sqrt(2 / n)


def test_ula_quadratic_stationary_variance():
    eta, n = 0.1, 20_000
    cfg = SamplerConfig("ula", eta, 300, chains=n, init="standard_gaussian", seed=4)
    x = run_chains(cfg, Quadratic(1), [300]).samples[:, 0, 0]
    v = 2 * eta / (1 - (1 - eta) ** 2)
    assert abs(x.var() - v) <= 3 * v * math.sqrt(2 / n)


# --- stationarity ------------------------------------------------------------------

@pytest.mark.parametrize("kind,alpha,nu", [("gaussian_proximal", None, 2.0),
                                           ("stable_proximal", 1.0, 2.0),
                                           ("stable_proximal", 1.0, 0.8)])
def test_exact_init_stays_stationary(kind, alpha, nu):
    tgt = GeneralizedCauchy(1, nu)
    eta = step_size_policy(tgt, kind, 1.0)
    cfg = SamplerConfig(kind, eta, 50, chains=5000, alpha=alpha, init="exact_target", seed=5,
                        tail_envelope=True)
    run = run_chains(cfg, tgt, [50])
    r = np.abs(run.at(50)[:, 0])
    assert stats.ks_1samp(r, lambda v: cauchy_radial_cdf(tgt, v)).pvalue > 0.01


# --- run_chains mechanics ------------------------------------------------------------

def test_zero_iterations_returns_init():
    cfg = SamplerConfig("stable_proximal", 0.1, 0, chains=5, alpha=1.0, init="point_mass",
                        x0=(1.5, -2.0))
    run = run_chains(cfg, GeneralizedCauchy(2, 1.0), [0])
    assert np.all(run.samples[:, 0, :] == [1.5, -2.0])


def test_same_seed_identical_and_thread_invariant():
    cfg = SamplerConfig("stable_proximal", 0.05, 30, chains=40, alpha=1.0, seed=9,
                        tail_envelope=True)
    a = run_chains(cfg, T, [0, 10, 30])
    b = run_chains(cfg, T, [0, 10, 30])
    c = run_chains(cfg, T, [0, 10, 30], threads=3)
    assert np.array_equal(a.samples, b.samples) and np.array_equal(a.samples, c.samples)
    assert np.array_equal(a.rejections, c.rejections)


def test_chain_depends_only_on_own_stream():
    cfg = SamplerConfig("gaussian_proximal", 0.1, 10, chains=6, seed=2)
    small = SamplerConfig("gaussian_proximal", 0.1, 10, chains=3, seed=2)
    assert np.array_equal(run_chains(cfg, T, [10]).samples[:3],
                          run_chains(small, T, [10]).samples)


@pytest.mark.parametrize("kind,alpha", [("gaussian_proximal", None), ("stable_proximal", 1.0),
                                        ("stable_proximal", 1.3), ("ula", None)])
def test_python_path_matches_kernel(kind, alpha):
    cfg = SamplerConfig(kind, 0.05, 15, chains=8, alpha=alpha, seed=11, eps_tv=0.0)
    a = run_chains(cfg, GeneralizedCauchy(2, 1.5), [0, 5, 15])
    b = run_chains(cfg, python_cauchy(2, 1.5), [0, 5, 15])
    assert np.allclose(a.samples, b.samples, rtol=0, atol=1e-12)
    assert np.array_equal(a.rejections, b.rejections)


def test_inexact_first_corruption_recorded():
    cfg = SamplerConfig("gaussian_proximal", 0.1, 20, chains=2000, seed=3, eps_tv=0.05)
    run = run_chains(cfg, T, [20])
    frac = np.mean(run.first_corrupted >= 0)
    p = 1 - 0.95**20
    assert abs(frac - p) <= 4 * math.sqrt(p * (1 - p) / 2000)
    assert run.first_corrupted.max() < 20


def test_budget_failure_names_chain():
    cfg = SamplerConfig("gaussian_proximal", 5.0, 50, chains=3, init="point_mass", x0=(300.0,),
                        budget=3)
    with pytest.raises(OracleBudgetError, match="chain 0"):
        run_chains(cfg, T, [50])


def test_record_at_validation():
    cfg = SamplerConfig("ula", 0.1, 5)
    with pytest.raises(ValueError):
        run_chains(cfg, T, [6])
    with pytest.raises(KeyError):
        run_chains(cfg, T, [0, 5]).at(3)


def test_rejections_mean_and_meta():
    cfg = SamplerConfig("stable_proximal", 0.1, 4, chains=10, alpha=1.0)
    run = run_chains(cfg, T, [4])
    assert run.rejections.shape == (4,)
    assert np.allclose(run.rejections_mean, run.rejections / 10)
    assert run.meta["config"]["kind"] == "stable_proximal" and run.wall_seconds > 0


@given(kind=st.sampled_from(["ula", "gaussian_proximal", "stable_proximal"]),
       eta=st.floats(0.001, 0.5), chains=st.integers(1, 5), n=st.integers(0, 5),
       seed=st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_run_chains_shapes_finite(kind, eta, chains, n, seed):
    alpha = 1.0 if kind == "stable_proximal" else None
    cfg = SamplerConfig(kind, eta, n, chains=chains, alpha=alpha, seed=seed, tail_envelope=True
                        if kind != "ula" else False)
    run = run_chains(cfg, GeneralizedCauchy(2, 1.0), list(range(n + 1)))
    assert run.samples.shape == (chains, n + 1, 2)
    assert np.isfinite(run.samples).all()


# --- configuration -------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(kind="mala", eta=0.1, iterations=1),
                                dict(kind="ula", eta=0.0, iterations=1),
                                dict(kind="ula", eta=0.1, iterations=-1),
                                dict(kind="ula", eta=0.1, iterations=1, chains=0),
                                dict(kind="stable_proximal", eta=0.1, iterations=1),
                                dict(kind="ula", eta=0.1, iterations=1, alpha=1.0),
                                dict(kind="stable_proximal", eta=0.1, iterations=1, alpha=2.0),
                                dict(kind="ula", eta=0.1, iterations=1, init="point_mass"),
                                dict(kind="ula", eta=0.1, iterations=1, eps_tv=2.0),
                                dict(kind="ula", eta=0.1, iterations=1, c_low=-1.0)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        SamplerConfig(**kw)


def test_policy_values():
    assert step_size_policy(T, "stable_proximal") == pytest.approx(3.0**-4, rel=1e-14)
    assert step_size_policy(T, "stable_proximal", c0=2.0) == pytest.approx(2 * 3.0**-4)
    assert step_size_policy(GeneralizedCauchy(4, 2.0), "gaussian_proximal") == pytest.approx(
        1 / 12, rel=1e-14)
    assert step_size_policy(GeneralizedCauchy(2, 0.5), "stable_proximal") == pytest.approx(
        2**-0.5 * 2.5**-8, rel=1e-14)


def test_policy_errors():
    with pytest.raises(ValueError, match="eta explicitly"):
        step_size_policy(T, "ula")
    with pytest.raises(ValueError, match=r"supply \(L, β\)"):
        step_size_policy(python_cauchy(1, 2.0), "stable_proximal")
    with pytest.raises(ValueError):
        step_size_policy(T, "stable_proximal", c0=0.0)
