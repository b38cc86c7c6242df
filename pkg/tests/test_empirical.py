"""Empirical-measure structure: stationarity, marginals, distances, norms."""

import itertools

import numpy as np
import pytest

from torusnet.dynamics import FhnParams, LearningParams, simulate_network
from torusnet.empirical import (
    bl_distance,
    empirical_measure,
    marginal_statistics,
    spatial_covariance,
    stationarity_check,
    weighted_ensemble_norms,
)
from torusnet.lattice import LatticeShape, cube_indices, flat_index, mod_torus
from torusnet.noise import NoiseSpec, build_spectral_model
from torusnet.timegrid import TimeGrid


@pytest.fixture(scope="module")
def grid():
    return TimeGrid.from_spec(1.0, 1e-2)


@pytest.fixture(scope="module")
def sim_measure(grid):
    shape = LatticeShape(d=1, n=4)
    model = build_spectral_model(NoiseSpec(family="geometric", rho_a=0.4), shape, grid)
    ens = simulate_network(
        FhnParams(a_fr=0.3, c_fr=0.8),
        LearningParams(J_bar0=0.4, rho_J=0.5, R_J=4),
        model,
        shape,
        grid,
        replicas=2,
        seed=8,
        keep_paths=2,
    )
    return shape, ens


def random_field(shape, grid, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape.grid_shape() + (grid.K + 1,))


class TestConstruction:
    def test_single_site_single_atom(self, grid):
        shape = LatticeShape(d=1, n=0)
        mu = empirical_measure(random_field(shape, grid, 1), shape, grid)
        assert mu.atom_count == 1
        np.testing.assert_array_equal(mu.atom((0,)), mu.base.reshape(shape.grid_shape() + (-1,)))

    def test_constant_field_atoms_identical(self, grid):
        shape = LatticeShape(d=1, n=2)
        X = np.ones(shape.grid_shape() + (grid.K + 1,)) * 3.3
        mu = empirical_measure(X, shape, grid)
        for j in cube_indices(shape):
            np.testing.assert_array_equal(mu.atom(j), X)

    def test_atom_count_is_site_count(self, grid):
        shape = LatticeShape(d=2, n=1)
        mu = empirical_measure(random_field(shape, grid, 2), shape, grid)
        assert mu.atom_count == 9

    def test_atom_is_shifted_base(self, grid):
        from torusnet.lattice import shift_field

        shape = LatticeShape(d=1, n=3)
        X = random_field(shape, grid, 3)
        mu = empirical_measure(X, shape, grid)
        for j in [(1,), (-2,), (3,)]:
            np.testing.assert_array_equal(mu.atom(j), shift_field(X, j, shape))


class TestStationarity:
    def test_always_true_for_any_field(self, grid):
        for d, n in ((1, 3), (2, 1)):
            shape = LatticeShape(d=d, n=n)
            mu = empirical_measure(random_field(shape, grid, n + d), shape, grid)
            assert stationarity_check(mu)

    def test_identity_and_composed_shifts(self, grid):
        shape = LatticeShape(d=1, n=2)
        mu = empirical_measure(random_field(shape, grid, 5), shape, grid)
        assert stationarity_check(mu, shifts=[(0,)])
        assert stationarity_check(mu, shifts=[(7,), (-9,), (1,)])

    def test_simulated_measures_stationary(self, sim_measure, grid):
        shape, ens = sim_measure
        for r in range(2):
            mu = empirical_measure(ens.replica_path_field(r), shape, grid)
            assert stationarity_check(mu)


class TestMarginals:
    def test_constant_field(self, grid):
        shape = LatticeShape(d=1, n=2)
        X = np.full(shape.grid_shape() + (grid.K + 1,), 1.5)
        mu = empirical_measure(X, shape, grid)
        rows = marginal_statistics(mu, [(0,), (2,)], [0.5, 1.0])
        for row in rows:
            assert row["mean"] == 1.5
            assert row["variance"] == 0.0

    def test_offset_independence_exact_vs_two_loop_oracle(self, grid):
        shape = LatticeShape(d=1, n=3)
        X = random_field(shape, grid, 6)
        mu = empirical_measure(X, shape, grid)
        rows = marginal_statistics(mu, [(0,), (1,), (-3,)], [1.0])
        means = {r["offset"]: r["mean"] for r in rows}
        assert means[(0,)] == means[(1,)] == means[(-3,)]
        # two-loop oracle: average over atoms j of the field at (j + k) mod V_n
        t_idx = grid.index_of(1.0)
        flat = X.reshape(shape.site_count, -1)
        for k in [(0,), (1,), (-3,)]:
            acc = 0.0
            for j in cube_indices(shape):
                site = mod_torus((j[0] + k[0],), shape)
                acc += flat[flat_index(site, shape), t_idx]
            assert means[k] == pytest.approx(acc / shape.site_count, rel=1e-14)

    def test_quantiles_monotone(self, grid):
        shape = LatticeShape(d=1, n=4)
        mu = empirical_measure(random_field(shape, grid, 7), shape, grid)
        rows = marginal_statistics(mu, [(0,)], [1.0], quantile_levels=(0.1, 0.5, 0.9))
        row = rows[0]
        assert row["q0.1"] <= row["q0.5"] <= row["q0.9"]


class TestSpatialCovariance:
    def test_zero_offset_nonnegative(self, grid):
        shape = LatticeShape(d=1, n=4)
        mu = empirical_measure(random_field(shape, grid, 8), shape, grid)
        assert spatial_covariance(mu, (0,), 1.0) >= 0.0

    def test_symmetric_in_offset(self, grid):
        shape = LatticeShape(d=1, n=4)
        mu = empirical_measure(random_field(shape, grid, 9), shape, grid)
        for k in (1, 2, 4):
            assert spatial_covariance(mu, (k,), 1.0) == pytest.approx(
                spatial_covariance(mu, (-k,), 1.0), rel=1e-12
            )

    def test_decoupled_site_white_decorrelated(self, grid):
        # independent sites: spatial covariance at k != 0 carries only the
        # finite-size bias -sigma^2/|V_n| of mean-subtracted iid values, which
        # is lag-independent and shrinks as the torus grows
        def lag_covs(n, replicas, seed):
            shape = LatticeShape(d=1, n=n)
            model = build_spectral_model(NoiseSpec(family="site_white"), shape, grid)
            ens = simulate_network(
                FhnParams(a_fr=0.3, c_fr=0.8),
                LearningParams(J_bar0=0.0, rho_J=0.5, R_J=2),
                model,
                shape,
                grid,
                replicas=replicas,
                seed=seed,
                keep_paths=replicas,
            )
            out = {k: [] for k in (0, 1, 2)}
            for r in range(replicas):
                mu = empirical_measure(ens.replica_path_field(r), shape, grid)
                for k in out:
                    out[k].append(spatial_covariance(mu, (k,), 1.0))
            return {k: np.array(v) for k, v in out.items()}

        covs = lag_covs(n=4, replicas=96, seed=10)
        # equal bias across nonzero lags: the difference is centered at zero
        diff = covs[1] - covs[2]
        se = diff.std(ddof=1) / np.sqrt(diff.size)
        assert abs(diff.mean()) <= 4 * se
        # bias-corrected value is centered at zero
        sigma2_hat = covs[0] * 9 / 8
        corrected = covs[2] + sigma2_hat / 9
        se_c = corrected.std(ddof=1) / np.sqrt(corrected.size)
        assert abs(corrected.mean()) <= 4 * se_c
        # and the raw bias shrinks on a larger torus
        covs_big = lag_covs(n=12, replicas=96, seed=11)
        assert abs(covs_big[2].mean()) < abs(covs[2].mean())


class TestBlDistance:
    def test_identical_measures_zero(self, grid):
        shape = LatticeShape(d=1, n=3)
        mu = empirical_measure(random_field(shape, grid, 11), shape, grid)
        assert bl_distance(mu, mu, seed=1) == 0.0

    def test_bounded_and_symmetric(self, grid):
        shape = LatticeShape(d=1, n=3)
        m1 = empirical_measure(random_field(shape, grid, 12), shape, grid)
        m2 = empirical_measure(random_field(shape, grid, 13) * 5, shape, grid)
        d12 = bl_distance(m1, m2, seed=2)
        assert 0.0 <= d12 <= 2.0
        assert d12 == bl_distance(m2, m1, seed=2)

    def test_triangle_inequality_same_family(self, grid):
        shape = LatticeShape(d=1, n=3)
        mus = [empirical_measure(random_field(shape, grid, 14 + i), shape, grid) for i in range(3)]
        d01 = bl_distance(mus[0], mus[1], seed=3)
        d12 = bl_distance(mus[1], mus[2], seed=3)
        d02 = bl_distance(mus[0], mus[2], seed=3)
        assert d02 <= d01 + d12 + 1e-12

    def test_same_law_distance_shrinks_with_torus(self):
        # larger tori average more shifts: independent same-law fields get closer
        grid = TimeGrid.from_spec(1.0, 1e-2)
        dists = {}
        for n in (2, 8):
            shape = LatticeShape(d=1, n=n)
            proj = [(0,)]
            f1 = random_field(shape, grid, 100 + n)
            f2 = random_field(shape, grid, 200 + n)
            m1 = empirical_measure(f1, shape, grid)
            m2 = empirical_measure(f2, shape, grid)
            dists[n] = bl_distance(m1, m2, projection=proj, seed=4)
        assert dists[8] < dists[2]


class TestWeightedNorms:
    def test_zero_field(self, grid, ref_kernel_d1):
        shape = LatticeShape(d=1, n=4)
        mu = empirical_measure(np.zeros(shape.grid_shape() + (grid.K + 1,)), shape, grid)
        rep = weighted_ensemble_norms(mu, ref_kernel_d1)
        assert rep["max"] == 0.0

    def test_constant_one_field(self, grid, ref_kernel_d1):
        shape = LatticeShape(d=1, n=4)
        mu = empirical_measure(np.ones(shape.grid_shape() + (grid.K + 1,)), shape, grid)
        rep = weighted_ensemble_norms(mu, ref_kernel_d1)
        assert rep["min"] == pytest.approx(1.0, abs=1e-12)
        assert rep["max"] == pytest.approx(1.0, abs=1e-12)

    def test_atoms_of_constant_field_share_norm(self, grid, ref_kernel_d1):
        shape = LatticeShape(d=1, n=4)
        mu = empirical_measure(np.full(shape.grid_shape() + (grid.K + 1,), -2.0), shape, grid)
        rep = weighted_ensemble_norms(mu, ref_kernel_d1)
        assert np.ptp(rep["per_atom"]) == 0.0
