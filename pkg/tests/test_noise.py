"""Spectral noise model: spectra, filters, synthesis covariance, tails."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from torusnet.errors import ConfigError, SpectrumError
from torusnet.lattice import LatticeShape, idft_field
from torusnet.noise import (
    NoiseSpec,
    brownian_sup_bound,
    brownian_sup_tail_check,
    build_spectral_model,
    eta_star_sweep,
    sample_noise_paths,
    sample_norm_sums,
    tail_statistic,
    verify_covariance,
    wilson_interval,
)
from torusnet.timegrid import TimeGrid

from conftest import naive_dft


@pytest.fixture(scope="module")
def geo_model(shape_n4, grid_t1):
    spec = NoiseSpec(family="geometric", rho_a=0.4, sigma2=1.0)
    return build_spectral_model(spec, shape_n4, grid_t1)


@pytest.fixture(scope="module")
def white_model(shape_n4, grid_t1):
    spec = NoiseSpec(family="site_white", sigma2=1.0)
    return build_spectral_model(spec, shape_n4, grid_t1)


class TestSpectra:
    def test_site_white_identity_spectrum(self, white_model):
        np.testing.assert_allclose(white_model.a_tilde_spatial, 1.0, atol=1e-14)
        c = white_model.c_spatial
        assert c[4] == pytest.approx(1.0, abs=1e-14)
        c0 = c.copy()
        c0[4] = 0.0
        np.testing.assert_allclose(c0, 0.0, atol=1e-14)
        assert white_model.eta_star == 0.0

    def test_discrete_spectrum_matches_naive_dft(self, geo_model, shape_n4):
        oracle = naive_dft(geo_model.a_spatial, shape_n4)
        assert np.abs(oracle.imag).max() < 1e-12
        np.testing.assert_allclose(geo_model.a_tilde_spatial, oracle.real, atol=1e-12)

    def test_continuous_spectrum_positive_closed_form(self):
        # sum_j 0.4^|j| cos(j theta) = 0.84 / (1.16 - 0.8 cos theta) > 0 everywhere
        for theta in np.linspace(0, np.pi, 17):
            direct = sum(0.4 ** abs(j) * math.cos(theta * j) for j in range(-80, 81))
            closed = (1 - 0.16) / (1 - 0.8 * math.cos(theta) + 0.16)
            assert direct == pytest.approx(closed, rel=1e-12)
            assert closed > 0

    def test_filter_symmetry_exact(self, geo_model):
        assert np.abs(geo_model.c_spatial - geo_model.c_spatial[::-1]).max() == 0.0

    def test_per_step_covariance_algebra(self, geo_model, shape_n4):
        # autocorrelation of the filter reproduces the covariance kernel exactly
        ctilde = np.fft.fftshift(geo_model.c_tilde_wrapped)
        recon = idft_field(ctilde**2, shape_n4).real
        assert np.abs(recon - geo_model.a_spatial).max() <= 1e-14

    def test_negative_spectrum_rejected(self):
        shape = LatticeShape(d=1, n=2)
        grid = TimeGrid.from_spec(1.0, 1e-2)
        spec = NoiseSpec(family="table", table={(0,): 1.0, (1,): 0.8, (-1,): 0.8})
        with pytest.raises(SpectrumError, match="NEGATIVE_SPECTRUM"):
            build_spectral_model(spec, shape, grid)

    def test_constant_profile_eta_is_filter_gap(self, geo_model, shape_n4):
        # constant profile: time-derivative term vanishes, eta_{n,j} = |c^{n,j} - c^j|
        np.testing.assert_array_equal(geo_model.sqrt_g, 1.0)
        lr, n = geo_model.limit_radius, shape_n4.n
        ctr = slice(lr - n, lr + n + 1)
        expected_inside = np.abs(geo_model.c_spatial - geo_model.c_limit_window[ctr])
        np.testing.assert_allclose(geo_model.eta_per_offset[ctr], expected_inside, rtol=0, atol=1e-15)
        outside = geo_model.eta_per_offset[: lr - n]
        np.testing.assert_allclose(
            outside, np.abs(geo_model.c_limit_window[: lr - n]), rtol=0, atol=1e-15
        )

    def test_time_profile_validation(self):
        with pytest.raises(ConfigError):
            NoiseSpec(time_profile="cosine", profile_amp=1.5).validate()
        with pytest.raises(ConfigError):
            NoiseSpec(family="nope").validate()

    def test_quadrature_richardson(self, geo_model):
        assert geo_model.limit_quadrature_error <= 1e-12


class TestSampling:
    def test_initial_condition_zero(self, geo_model):
        ens = sample_noise_paths(geo_model, 3, seed=1, keep_paths=3)
        np.testing.assert_array_equal(ens.paths[:, :, 0], 0.0)

    def test_deterministic_given_seed(self, geo_model):
        a = sample_noise_paths(geo_model, 5, seed=9, keep_paths=5)
        b = sample_noise_paths(geo_model, 5, seed=9, keep_paths=5)
        np.testing.assert_array_equal(a.paths, b.paths)
        c = sample_noise_paths(geo_model, 5, seed=10, keep_paths=5)
        assert not np.array_equal(a.paths, c.paths)

    def test_chunking_invariance(self, geo_model):
        a = sample_noise_paths(geo_model, 30, seed=3, chunk_size=7)
        b = sample_noise_paths(geo_model, 30, seed=3, chunk_size=64)
        np.testing.assert_array_equal(a.sup_norms, b.sup_norms)
        s = sample_norm_sums(geo_model, 30, seed=3, chunk_size=11)
        np.testing.assert_allclose(s, a.norm_sums, rtol=0, atol=0)

    def test_site_white_paths_independent(self, white_model, grid_t1):
        ens = sample_noise_paths(white_model, 3000, seed=4, record_times=[grid_t1.T])
        rep = verify_covariance(ens, white_model)
        assert rep["max_abs_deviation_sigmas"] <= 4.0
        # empirical cross covariance near zero by the model's own structure
        vals = ens.values[:, 0, :]
        cross = np.cov(vals.T)
        off_diag = cross - np.diag(np.diag(cross))
        assert np.abs(off_diag).max() <= 4.0 / math.sqrt(3000)

    def test_covariance_geometric_torus(self, geo_model, grid_t1):
        ens = sample_noise_paths(geo_model, 6000, seed=5, record_times=[0.5, grid_t1.T])
        rep = verify_covariance(
            ens, geo_model, time_pairs=[(1.0, 1.0), (0.5, 1.0), (0.5, 0.5)]
        )
        assert rep["max_abs_deviation_sigmas"] <= 4.0
        row = next(r for r in rep["rows"] if r["k"] == (3,) and r["s"] == 1.0 and r["t"] == 1.0)
        assert row["model"] == pytest.approx(0.4**3, rel=1e-12)
        assert abs(row["empirical"] - 0.064) <= 4.0 * row["std_error"]

    def test_variance_linear_in_time(self, geo_model):
        ens = sample_noise_paths(geo_model, 6000, seed=6, record_times=[0.5, 1.0])
        v_half = ens.values[:, 0, 4] ** 2  # site 0 at t = 1/2
        v_full = ens.values[:, 1, 4] ** 2
        se = math.sqrt(v_half.var() / 6000 + v_full.var() / 4 / 6000)
        assert abs(v_half.mean() - v_full.mean() / 2) <= 4 * se

    def test_law_shift_invariant(self, geo_model):
        # covariance depends only on (k - j) mod V_n: compare shifted pairs
        ens = sample_noise_paths(geo_model, 8000, seed=7, record_times=[1.0])
        vals = ens.values[:, 0, :]
        pairs = [((0, 2), (3, 5)), ((1, 3), (6, 8)), ((0, 8), (4, 3))]
        for (j1, k1), (j2, k2) in pairs:
            c1 = vals[:, j1] * vals[:, k1]
            c2 = vals[:, j2] * vals[:, k2]
            se = math.sqrt(c1.var(ddof=1) / 8000 + c2.var(ddof=1) / 8000)
            assert abs(c1.mean() - c2.mean()) <= 4 * se

    def test_time_varying_profile_scales_steps(self, shape_n4):
        grid = TimeGrid.from_spec(1.0, 1e-2)
        spec = NoiseSpec(family="site_white", sigma2=1.0, time_profile="cosine", profile_amp=0.5)
        model = build_spectral_model(spec, shape_n4, grid)
        ens = sample_noise_paths(model, 4000, seed=8, record_times=[0.5, 1.0])
        rep = verify_covariance(model=model, ensemble=ens, time_pairs=[(0.5, 0.5), (1.0, 1.0)])
        assert rep["max_abs_deviation_sigmas"] <= 4.0
        # model variance integrates the profile: int_0^0.5 (1 + 0.5 cos(pi s)) ds
        row = next(r for r in rep["rows"] if r["k"] == (0,) and r["t"] == 0.5)
        assert row["model"] == pytest.approx(0.5 + 0.5 / np.pi, rel=1e-3)


class TestEta:
    def test_eta_decreases_with_n(self, grid_coarse):
        spec = NoiseSpec(family="geometric", rho_a=0.4, sigma2=1.0)
        rows = eta_star_sweep(spec, 1, [2, 4, 8, 16], grid_coarse)
        values = [r["eta_star"] for r in rows]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_eta_with_time_profile(self, shape_n4):
        grid = TimeGrid.from_spec(1.0, 1e-2)
        spec = NoiseSpec(family="geometric", rho_a=0.4, sigma2=1.0, time_profile="cosine")
        model = build_spectral_model(spec, shape_n4, grid)
        assert model.eta_star > 0
        const = build_spectral_model(NoiseSpec(family="geometric", rho_a=0.4), shape_n4, grid)
        assert model.eta_star > const.eta_star  # derivative term adds mass


class TestTails:
    def test_tail_statistic_monotone(self, geo_model):
        sums = sample_norm_sums(geo_model, 2000, seed=11)
        mean = sums.mean() / geo_model.shape.site_count
        rows = tail_statistic(sums, geo_model.shape.site_count, [0.01 * mean, mean, 2 * mean, 100 * mean])
        assert rows[0]["p_hat"] == 1.0  # tiny threshold: every replica exceeds it
        assert rows[-1]["hits"] == 0 and rows[-1]["zero_hits"]
        ps = [r["p_hat"] for r in rows]
        assert all(a >= b for a, b in zip(ps, ps[1:]))

    def test_brownian_bound_matches_quadrature(self):
        for b, T in ((2.0, 1.0), (1.0, 0.5), (3.0, 2.0)):
            oracle, _ = integrate.quad(
                lambda x: 4.0 / math.sqrt(2 * math.pi * T) * math.exp(-(x**2) / (2 * T)), b, np.inf
            )
            assert brownian_sup_bound(b, T) == pytest.approx(oracle, rel=1e-9)
        assert brownian_sup_bound(2.0, 1.0) == pytest.approx(4 * (1 - stats.norm.cdf(2.0)), rel=1e-12)
        assert brownian_sup_bound(2.0, 1.0) == pytest.approx(0.0910, abs=5e-4)

    def test_brownian_sup_tail_check(self):
        rep = brownian_sup_tail_check(8000, T=1.0, b_values=[0.0, 1.0, 2.0], seed=13, steps=400)
        assert rep["all_ok"]
        rows = {r["b"]: r for r in rep["rows"]}
        assert rows[0.0]["bound"] >= 1.0 >= rows[0.0]["empirical"]
        assert rows[1.0]["bound"] > rows[2.0]["bound"]

    def test_bound_exceeds_one_for_small_b(self):
        assert brownian_sup_bound(0.1, 1.0) > 1.0


class TestWilson:
    def test_zero_hits_interval(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0
        assert 0.0 < hi < 0.05

    def test_quadratic_equation_oracle(self):
        # Wilson endpoints solve (p_hat - p)^2 = z^2 p (1 - p) / n
        z = 1.959963984540054
        for hits, n in ((7, 50), (120, 1000), (1, 13)):
            p_hat = hits / n
            lo, hi = wilson_interval(hits, n)
            for p in (lo, hi):
                assert (p_hat - p) ** 2 == pytest.approx(z * z * p * (1 - p) / n, abs=1e-12)
