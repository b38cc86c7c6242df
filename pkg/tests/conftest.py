"""Shared fixtures and independent oracles for the test suite.

Oracles here are deliberately naive (double loops, direct sums, quadrature)
so they stay independent of the implementation paths they check.
"""

import itertools

import numpy as np
import pytest

from torusnet.kernels import build_kappa, build_lambda
from torusnet.lattice import LatticeShape
from torusnet.timegrid import TimeGrid


def naive_dft(X: np.ndarray, shape: LatticeShape) -> np.ndarray:
    """O(N^2) centered DFT: out^k = sum_j exp(-2 pi i <j,k>/(2n+1)) X^j."""
    side = shape.side
    rng = range(-shape.n, shape.n + 1)
    out = np.zeros(shape.grid_shape(), dtype=complex)
    for k in itertools.product(rng, repeat=shape.d):
        acc = 0.0 + 0.0j
        for j in itertools.product(rng, repeat=shape.d):
            phase = -2.0j * np.pi * sum(jj * kk for jj, kk in zip(j, k)) / side
            acc += np.exp(phase) * X[tuple(c + shape.n for c in j)]
        out[tuple(c + shape.n for c in k)] = acc
    return out


def mod_residue_oracle(j, n):
    """Coordinate-wise residue into [-n, n] by explicit search."""
    out = []
    for c in j:
        r = c % (2 * n + 1)
        out.append(r if r <= n else r - (2 * n + 1))
    return tuple(out)


def domination_conv_oracle(kernel, j):
    """Direct double-loop sum_k lambda^{j-k} kappa^k over the stored support."""
    d, R = kernel.d, kernel.R
    total = 0.0
    for k in itertools.product(range(-R, R + 1), repeat=d):
        lam_off = tuple(j[p] - k[p] for p in range(d))
        total += kernel.kappa_at(k) * kernel.lambda_at(lam_off)
    return total


def weighted_norm_oracle(X, kernel, shape):
    """Direct definition: sqrt(sum over lambda support of lambda^j sup|X~^j|^2)."""
    from torusnet.lattice import flat_index, mod_torus

    flat = X.reshape(shape.site_count, -1)
    sups = np.abs(flat).max(axis=1)
    total = 0.0
    for j in itertools.product(range(-kernel.R_lambda, kernel.R_lambda + 1), repeat=kernel.d):
        total += kernel.lambda_at(j) * sups[flat_index(mod_torus(j, shape), shape)] ** 2
    return float(np.sqrt(total))


@pytest.fixture(scope="session")
def ref_kernel_d1():
    """Reference weight family: d=1, kappa^k = 0.5^|k|, R=40, R_lambda=60, M=4096."""
    fam = build_kappa(d=1, family="geometric", rho=0.5, scale=1.0, R=40)
    return build_lambda(fam, M=4096, R_lambda=60)


@pytest.fixture(scope="session")
def small_kernel_d2():
    fam = build_kappa(d=2, family="geometric", rho=0.4, scale=1.0, R=4)
    return build_lambda(fam, M=128, R_lambda=20)


@pytest.fixture(scope="session")
def shape_n4():
    return LatticeShape(d=1, n=4)


@pytest.fixture(scope="session")
def grid_t1():
    return TimeGrid.from_spec(1.0, 1e-3)


@pytest.fixture(scope="session")
def grid_coarse():
    return TimeGrid.from_spec(1.0, 1e-2)
