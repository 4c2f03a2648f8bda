import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htprox.diagnostics import (hist_chi2_estimate, ks_estimate, radial_bin_edges,
                                radial_tv_estimate, radial_tv_noise_floor, surrogate_g,
                                surrogate_moment, surrogate_moment_track)
from htprox.rng import RngStream
from htprox.samplers import SamplerConfig, run_chains
from htprox.targets import GeneralizedCauchy, cauchy_radial_cdf, sample_exact

import reference as ref

T1 = GeneralizedCauchy(1, 1.0)
T2 = GeneralizedCauchy(1, 2.0)


def test_bin_edges_equal_mass():
    e = radial_bin_edges(T2, 10)
    m = np.diff(cauchy_radial_cdf(T2, e[:-1]))
    assert np.allclose(m, 0.0999, atol=1e-12)
    assert e[-1] == np.inf and e[0] == 0.0


def test_tv_exact_samples_small():
    x = sample_exact(T2, 10**5, RngStream(1, 0))
    est = radial_tv_estimate(x, T2, bins=200, n_boot=50)
    assert est.value <= 0.02
    assert est.kind == "radial_tv" and est.n == 10**5 and est.se_proxy > 0


def test_tv_disjoint_support():
    x = np.full((1000, 1), 1e3)
    assert radial_tv_estimate(x, T1, bins=200, n_boot=0).value >= 0.95


def test_tv_vs_quadrature_between_targets():
    x = sample_exact(GeneralizedCauchy(1, 3.0), 10**5, RngStream(2, 0))
    est = radial_tv_estimate(x, T1, bins=200, n_boot=0)
    assert abs(est.value - ref.radial_tv_quad(1, 3.0, 1.0)) <= 0.02


def test_noise_floor_matches_simulation():
    vals = [radial_tv_estimate(sample_exact(T2, 10**4, RngStream(3, i)), T2, bins=20,
                               n_boot=0).value for i in range(30)]
    assert abs(np.mean(vals) - radial_tv_noise_floor(10**4, 20)) < 0.003


@given(n=st.integers(5, 300), bins=st.integers(1, 40), seed=st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_tv_in_unit_interval(n, bins, seed):
    x = RngStream(seed).generator.standard_cauchy((n, 2))
    v = radial_tv_estimate(x, GeneralizedCauchy(2, 1.0), bins=bins, n_boot=0).value
    assert 0.0 <= v <= 1.0


def test_tv_rejects_empty():
    with pytest.raises(ValueError):
        radial_tv_estimate(np.empty((0, 1)), T1)


def test_hist_chi2_exact_samples():
    n, bins = 10**5, 100
    x = sample_exact(T2, n, RngStream(4, 0))
    est = hist_chi2_estimate(x, T2, bins=bins, n_boot=100)
    assert est.value <= 2 * bins / n + 3 * est.se_proxy


def test_hist_chi2_identical_histogram_zero():
    # one point per equal-probability bin reproduces the analytic masses
    bins = 50
    u = (np.arange(bins) + 0.5) / bins
    from htprox.targets import cauchy_radial_ppf
    x = cauchy_radial_ppf(T2, np.abs(2 * u - 1)) * np.sign(2 * u - 1)
    assert hist_chi2_estimate(x, T2, bins=bins, n_boot=0).value == pytest.approx(0, abs=1e-24)


def test_hist_chi2_d1_only():
    with pytest.raises(ValueError, match="d=1"):
        hist_chi2_estimate(np.zeros((10, 2)), GeneralizedCauchy(2, 1.0))


def test_ks_estimate():
    x = sample_exact(T2, 10**4, RngStream(5, 0))
    est = ks_estimate(x, T2)
    assert est.pvalue > 0.01 and est.value < 0.02
    far = ks_estimate(np.full((100, 1), 50.0), T2)
    assert far.pvalue < 1e-6


def test_surrogate_g_at_origin():
    x = np.zeros((100, 3))
    mean, se, _, bad = surrogate_moment(x, 2.0, 1.0)
    assert mean == 1.0 and se == 0.0 and not bad


def test_surrogate_kappa_zero():
    assert np.all(surrogate_g(np.ones((5, 2)) * 7, 0.0, 2.0) == 1.0)


def test_surrogate_track_and_tail_warning():
    cfg = SamplerConfig("gaussian_proximal", 0.05, 4, chains=200, init="point_mass", x0=(0.0,))
    run = run_chains(cfg, T2, [0, 2, 4])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tr = surrogate_moment_track(run, 0.1, 2.0)
    assert tr.mean[0] == 1.0 and tr.mean.shape == (3,)
    heavy = sample_exact(GeneralizedCauchy(1, 0.5), 10**4, RngStream(6, 0))
    run.samples[:, 2, :] = heavy[:200]
    run2 = type(run)(run.config, run.record_at, np.repeat(heavy[:, None, :], 3, axis=1),
                     run.rejections, run.first_corrupted)
    with pytest.warns(RuntimeWarning, match="unreliable"):
        surrogate_moment_track(run2, 2.0, 2.0)
