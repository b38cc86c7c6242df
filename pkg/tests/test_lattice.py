"""Torus geometry, shifts, and the DFT contract."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusnet.lattice import (
    LatticeShape,
    cube_indices,
    dft_field,
    flat_index,
    idft_field,
    mod_torus,
    neighbor_table,
    shift_field,
)

from conftest import mod_residue_oracle, naive_dft


class TestShape:
    def test_site_count(self):
        assert LatticeShape(d=1, n=0).site_count == 1
        assert LatticeShape(d=2, n=1).site_count == 9
        assert LatticeShape(d=3, n=2).site_count == 125

    @pytest.mark.parametrize("d", [0, 4, -1])
    def test_rejects_bad_dimension(self, d):
        with pytest.raises(ValueError):
            LatticeShape(d=d, n=1)

    def test_rejects_negative_radius(self):
        with pytest.raises(ValueError):
            LatticeShape(d=1, n=-1)


class TestCubeIndices:
    def test_single_site(self):
        assert cube_indices(LatticeShape(d=1, n=0)) == [(0,)]

    def test_d1_n1(self):
        assert cube_indices(LatticeShape(d=1, n=1)) == [(-1,), (0,), (1,)]

    def test_d2_n1_matches_enumeration(self):
        got = cube_indices(LatticeShape(d=2, n=1))
        expected = sorted(itertools.product([-1, 0, 1], repeat=2))
        assert len(got) == 9
        assert got == expected  # lexicographic, ascending from -n

    def test_flat_index_consistent(self):
        shape = LatticeShape(d=2, n=2)
        for pos, j in enumerate(cube_indices(shape)):
            assert flat_index(j, shape) == pos


class TestModTorus:
    def test_paper_example(self):
        assert mod_torus((2,), LatticeShape(d=1, n=1)) == (-1,)

    def test_identity(self):
        assert mod_torus((0,), LatticeShape(d=1, n=1)) == (0,)

    def test_d2_residue(self):
        shape = LatticeShape(d=2, n=2)
        assert mod_torus((7, -6), shape) == mod_residue_oracle((7, -6), 2) == (2, -1)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(min_value=0, max_value=5),
        st.tuples(st.integers(-100, 100), st.integers(-100, 100)),
        st.tuples(st.integers(-100, 100), st.integers(-100, 100)),
    )
    def test_idempotent_and_homomorphic(self, n, j, k):
        shape = LatticeShape(d=2, n=n)
        red = mod_torus(j, shape)
        assert mod_torus(red, shape) == red
        assert all(-n <= c <= n for c in red)
        assert all((r - c) % shape.side == 0 for r, c in zip(red, j))
        lhs = mod_torus(tuple(a + b for a, b in zip(j, k)), shape)
        rhs = mod_torus(tuple(a + b for a, b in zip(mod_torus(j, shape), mod_torus(k, shape))), shape)
        assert lhs == rhs


class TestShift:
    def test_identity_shift(self, shape_n4):
        rng = np.random.default_rng(0)
        X = rng.standard_normal(shape_n4.grid_shape())
        np.testing.assert_array_equal(shift_field(X, (0,), shape_n4), X)

    def test_d1_rotation(self):
        shape = LatticeShape(d=1, n=1)
        X = np.array([10.0, 20.0, 30.0])  # sites (-1, 0, 1)
        np.testing.assert_array_equal(shift_field(X, (1,), shape), [20.0, 30.0, 10.0])

    def test_definition_pointwise(self):
        shape = LatticeShape(d=2, n=2)
        rng = np.random.default_rng(1)
        X = rng.standard_normal(shape.grid_shape())
        j = (3, -2)
        Y = shift_field(X, j, shape)
        for m in cube_indices(shape):
            src = mod_torus(tuple(a + b for a, b in zip(m, j)), shape)
            assert Y[tuple(c + 2 for c in m)] == X[tuple(c + 2 for c in src)]

    def test_group_law_and_inverse(self, shape_n4):
        rng = np.random.default_rng(2)
        X = rng.standard_normal(shape_n4.grid_shape() + (3,))
        for j, k in [((1,), (2,)), ((4,), (4,)), ((-3,), (2,))]:
            lhs = shift_field(shift_field(X, k, shape_n4), j, shape_n4)
            rhs = shift_field(X, mod_torus((j[0] + k[0],), shape_n4), shape_n4)
            np.testing.assert_array_equal(lhs, rhs)
        back = shift_field(shift_field(X, (3,), shape_n4), (-3,), shape_n4)
        np.testing.assert_array_equal(back, X)

    def test_preserves_multiset_and_sum(self, shape_n4):
        rng = np.random.default_rng(3)
        X = rng.standard_normal(shape_n4.grid_shape())
        Y = shift_field(X, (2,), shape_n4)
        np.testing.assert_array_equal(np.sort(X), np.sort(Y))
        assert X.sum() == pytest.approx(Y.sum(), rel=1e-15)


class TestDft:
    def test_delta_gives_ones(self):
        shape = LatticeShape(d=1, n=2)
        X = np.zeros(5)
        X[2] = 1.0  # origin
        np.testing.assert_allclose(dft_field(X, shape), np.ones(5), atol=1e-14)

    def test_constant_gives_dc(self):
        shape = LatticeShape(d=2, n=1)
        X = np.full((3, 3), 2.5)
        Y = dft_field(X, shape)
        assert Y[1, 1] == pytest.approx(9 * 2.5)
        Y[1, 1] = 0.0
        np.testing.assert_allclose(Y, 0.0, atol=1e-12)

    @pytest.mark.parametrize("d,n", [(1, 4), (1, 40), (2, 4), (3, 1)])
    def test_matches_naive_oracle(self, d, n):
        shape = LatticeShape(d=d, n=n)
        if shape.site_count > 81:
            pytest.skip("oracle restricted to |V_n| <= 81")
        rng = np.random.default_rng(7)
        X = rng.standard_normal(shape.grid_shape())
        np.testing.assert_allclose(dft_field(X, shape), naive_dft(X, shape), atol=1e-10)

    @pytest.mark.parametrize("d,n", [(1, 6), (2, 3), (3, 2)])
    def test_roundtrip(self, d, n):
        shape = LatticeShape(d=d, n=n)
        rng = np.random.default_rng(8)
        X = rng.standard_normal(shape.grid_shape()) + 1j * rng.standard_normal(shape.grid_shape())
        back = idft_field(dft_field(X, shape), shape)
        assert np.abs(back - X).max() / np.abs(X).max() < 1e-12

    def test_trailing_axes_untouched(self):
        shape = LatticeShape(d=1, n=2)
        rng = np.random.default_rng(9)
        X = rng.standard_normal(shape.grid_shape() + (7,))
        Y = dft_field(X, shape)
        for q in range(7):
            np.testing.assert_allclose(Y[:, q], dft_field(X[:, q], shape), atol=1e-12)


def test_neighbor_table_wraps():
    shape = LatticeShape(d=1, n=2)
    tbl = neighbor_table(shape, [(0,), (1,), (-1,), (5,)])
    for s, site in enumerate(cube_indices(shape)):
        for o, off in enumerate([(0,), (1,), (-1,), (5,)]):
            target = mod_torus((site[0] + off[0],), shape)
            assert tbl[s, o] == flat_index(target, shape)
