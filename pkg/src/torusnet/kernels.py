"""Interaction bounds kappa and the dominating weight sequence lambda.

The weights lambda are obtained by spectral inversion of the interaction
bounds: with ``ktilde(theta) = sum_k kappa^k exp(-i <theta, k>)`` and
``kappa_star = sum_k kappa^k``, set

    lambdatilde(theta) = h / (2 kappa_star - ktilde(theta)),   h = kappa_star,

and invert the Fourier series.  The choice h = kappa_star normalizes
``sum_j lambda^j = lambdatilde(0) = 1``.  The resulting weights are strictly
positive and dominate the bounds in the convolution sense

    sum_k lambda^{j-k} kappa^k  <=  2 kappa_star lambda^j,

with equality deficit concentrated at j = 0.  ``check_domination`` measures
this inequality numerically on the safe interior of the stored support.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .errors import KernelConstructionError
from .lattice import LatticeShape, cube_indices

LAMBDA_TAIL_LIMIT = 1e-6


@dataclass(frozen=True)
class KernelFamily:
    """Interaction bound table kappa^k plus (once built) the weights lambda^j.

    kappa is stored on the cube |k|_inf <= R; kappa_star is the
    full-lattice mass (closed form for the built-in families, table sum
    otherwise).  lam, when present, is stored on |j|_inf <= R_lambda and
    rescaled so that its entries sum to one exactly.
    """

    d: int
    R: int
    kappa: np.ndarray
    kappa_star: float
    family: str
    rho: float = 0.0
    scale: float = 1.0
    R_lambda: int | None = None
    lam: np.ndarray | None = None
    M: int | None = None
    lambda_tail_mass: float = 0.0

    def kappa_at(self, offset) -> float:
        idx = tuple(int(c) + self.R for c in offset)
        if any(i < 0 or i > 2 * self.R for i in idx):
            return 0.0
        return float(self.kappa[idx])

    def lambda_at(self, offset) -> float:
        if self.lam is None:
            raise KernelConstructionError("lambda weights not built yet")
        idx = tuple(int(c) + self.R_lambda for c in offset)
        if any(i < 0 or i > 2 * self.R_lambda for i in idx):
            return 0.0
        return float(self.lam[idx])

    def kappa_tail(self, n: int) -> float:
        """Mass of kappa outside the cube V_n, full-lattice accounting."""
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.family == "geometric":
            inside = self.scale * _geometric_cube_mass(self.rho, n) ** self.d
            return max(self.kappa_star - inside, 0.0)
        # exponential / table: mass inside V_n from the stored table, the
        # remainder of kappa_star accounted as tail.
        lo = max(self.R - n, 0)
        hi = self.R + min(n, self.R) + 1
        sl = tuple(slice(lo, hi) for _ in range(self.d))
        inside = float(self.kappa[sl].sum())
        return max(self.kappa_star - inside, 0.0)


def _geometric_cube_mass(rho: float, n: int) -> float:
    # sum_{|k| <= n} rho^|k| along one dimension
    return 1.0 + 2.0 * rho * (1.0 - rho**n) / (1.0 - rho)


def _offset_grid(R: int, d: int) -> np.ndarray:
    rng = np.arange(-R, R + 1)
    grids = np.meshgrid(*([rng] * d), indexing="ij")
    return np.stack(grids, axis=-1)


def build_kappa(
    d: int,
    family: str = "geometric",
    rho: float = 0.5,
    scale: float = 1.0,
    R: int = 40,
    table: Mapping[tuple, float] | None = None,
) -> KernelFamily:
    """Construct the interaction bound family on the cube |k|_inf <= R.

    family "geometric":   kappa^k = scale * rho^(sum_p |k_p|), rho in (0,1)
    family "exponential": kappa^k = scale * exp(-rho * |k|_2),  rho > 0
    family "table":       explicit mapping offset -> value; must be positive
                          and symmetric under coordinate sign flips.
    """
    if R < 1:
        raise KernelConstructionError(f"support radius R must be >= 1, got {R}")
    offs = _offset_grid(R, d)
    if family == "geometric":
        if not 0.0 < rho < 1.0:
            raise KernelConstructionError(f"geometric rate must be in (0,1), got {rho}")
        if scale <= 0:
            raise KernelConstructionError(f"scale must be > 0, got {scale}")
        kappa = scale * rho ** np.abs(offs).sum(axis=-1).astype(float)
        kappa_star = scale * ((1.0 + rho) / (1.0 - rho)) ** d
    elif family == "exponential":
        if rho <= 0:
            raise KernelConstructionError(f"exponential rate must be > 0, got {rho}")
        if scale <= 0:
            raise KernelConstructionError(f"scale must be > 0, got {scale}")
        kappa = scale * np.exp(-rho * np.sqrt((offs.astype(float) ** 2).sum(axis=-1)))
        kappa_star = float(kappa.sum()) + _exponential_tail(d, rho, scale, R)
    elif family == "table":
        if table is None:
            raise KernelConstructionError("family 'table' requires an explicit table")
        kappa = np.zeros((2 * R + 1,) * d)
        for off, val in table.items():
            if len(off) != d:
                raise KernelConstructionError(f"offset {off} has wrong dimension")
            if any(abs(c) > R for c in off):
                raise KernelConstructionError(f"offset {off} outside support radius {R}")
            kappa[tuple(int(c) + R for c in off)] = float(val)
        if np.any(kappa <= 0):
            raise KernelConstructionError("table must assign a positive value to every offset in the cube")
        for p in range(d):
            if not np.allclose(kappa, np.flip(kappa, axis=p), rtol=0, atol=1e-12 * kappa.max()):
                raise KernelConstructionError("table must be symmetric under coordinate sign flips")
        kappa_star = float(kappa.sum())
    else:
        raise KernelConstructionError(f"unknown kernel family {family!r}")
    return KernelFamily(d=d, R=R, kappa=kappa, kappa_star=kappa_star, family=family, rho=rho, scale=scale)


def _exponential_tail(d: int, rate: float, scale: float, R: int) -> float:
    # numeric shell sums until the increment is negligible
    total = 0.0
    m = R + 1
    while True:
        rng = np.arange(-m, m + 1)
        grids = np.meshgrid(*([rng] * d), indexing="ij")
        coords = np.stack(grids, axis=-1)
        shell = np.abs(coords).max(axis=-1) == m
        inc = scale * np.exp(-rate * np.sqrt((coords[shell].astype(float) ** 2).sum(axis=-1))).sum()
        total += float(inc)
        if inc < 1e-16 * max(total, scale):
            return total
        m += 1
        if m > R + 2000:
            raise KernelConstructionError("exponential tail sum did not converge")


def build_lambda(kernel: KernelFamily, M: int, R_lambda: int) -> KernelFamily:
    """Invert the weight spectrum on a uniform M^d frequency grid.

    Returns a new family carrying lambda on |j|_inf <= R_lambda.  The grid
    quadrature is an exact M-point inverse DFT (trapezoid rule for a smooth
    periodic integrand), so the error decays geometrically in M.
    """
    if R_lambda <= kernel.R:
        raise KernelConstructionError(
            f"R_lambda ({R_lambda}) must exceed the kappa support radius ({kernel.R})"
        )
    if M < 4 * R_lambda:
        raise KernelConstructionError(f"spectral grid M ({M}) must be >= 4 R_lambda ({4 * R_lambda})")
    d, R = kernel.d, kernel.R
    grid = np.zeros((M,) * d)
    offs = np.arange(-R, R + 1) % M
    idx = np.ix_(*([offs] * d))
    grid[idx] = kernel.kappa
    ktilde = np.fft.fftn(grid)
    if np.abs(ktilde.imag).max() > 1e-9 * kernel.kappa_star:
        raise KernelConstructionError("kappa spectrum has a non-negligible imaginary part")
    ktilde = ktilde.real
    denom = 2.0 * kernel.kappa_star - ktilde
    if denom.min() <= 0.0:
        raise KernelConstructionError("2 kappa_star - ktilde(theta) is not positive on the grid")
    h = kernel.kappa_star
    lam_wrapped = np.fft.ifftn(h / denom).real
    offs_l = np.arange(-R_lambda, R_lambda + 1) % M
    lam = lam_wrapped[np.ix_(*([offs_l] * d))].copy()
    if lam.min() <= 0.0:
        raise KernelConstructionError("computed lambda weights are not all positive")
    lam_total = h / denom.flat[0]  # lambdatilde(0) = total mass of the full sequence
    stored = float(lam.sum())
    tail = max(lam_total - stored, 0.0)
    if tail > LAMBDA_TAIL_LIMIT:
        raise KernelConstructionError(
            f"lambda tail mass beyond R_lambda is {tail:.3e} > {LAMBDA_TAIL_LIMIT:.0e}; increase R_lambda"
        )
    lam /= stored  # redistribute truncated mass so the stored sum is exactly one
    return replace(kernel, R_lambda=R_lambda, lam=lam, M=M, lambda_tail_mass=tail)


def check_domination(kernel: KernelFamily) -> dict:
    """Measure the convolution inequality on the safe interior |j| <= R_lambda - R.

    Returns max_violation = max_j (sum_k lambda^{j-k} kappa^k - 2 kappa_star
    lambda^j) / lambda^j, the stored-sum normalization error, the smallest
    stored weight, and the (strictly negative) deficit at the origin.
    """
    if kernel.lam is None:
        raise KernelConstructionError("lambda weights not built yet")
    d, R, RL = kernel.d, kernel.R, kernel.R_lambda
    Ri = RL - R
    conv = np.zeros((2 * Ri + 1,) * d)
    it = np.ndindex(*kernel.kappa.shape)
    for pos in it:
        kval = kernel.kappa[pos]
        sl = tuple(slice(2 * R - pos[p], 2 * R - pos[p] + 2 * Ri + 1) for p in range(d))
        conv += kval * kernel.lam[sl]
    sl_int = tuple(slice(R, R + 2 * Ri + 1) for _ in range(d))
    lam_int = kernel.lam[sl_int]
    resid = conv - 2.0 * kernel.kappa_star * lam_int
    rel = resid / lam_int
    origin = tuple(Ri for _ in range(d))
    return {
        "max_violation": float(rel.max()),
        "max_abs_violation": float(resid.max()),
        "normalization_error": float(abs(kernel.lam.sum() - 1.0)),
        "min_lambda": float(kernel.lam.min()),
        "origin_deficit": float(resid[origin]),
        "interior_radius": Ri,
    }


def wrapped_lambda_weights(kernel: KernelFamily, shape: LatticeShape) -> np.ndarray:
    """Accumulate lambda onto the torus: w[l] = sum_{j = l mod V_n} lambda^j.

    The result sums to one and turns the lattice-weighted path norm into a
    finite sum over torus sites for periodic fields.
    """
    if kernel.lam is None:
        raise KernelConstructionError("lambda weights not built yet")
    if kernel.d != shape.d:
        raise ValueError("kernel and lattice dimension mismatch")
    side = shape.side
    w = np.zeros(shape.grid_shape())
    rng = (np.arange(-kernel.R_lambda, kernel.R_lambda + 1) + shape.n) % side
    np.add.at(w, np.ix_(*([rng] * shape.d)), kernel.lam)
    return w


def weighted_norm(
    X: np.ndarray,
    kernel: KernelFamily,
    shape: LatticeShape,
    weights: np.ndarray | None = None,
) -> float:
    """Weighted path norm sqrt( sum_j lambda^j sup_t |X^j_t|^2 ).

    X is a periodic path field with site axes first and time last; the sup
    runs over the discrete time grid and off-cube sites read the periodic
    interpolant (hence the torus-wrapped weights).
    """
    if weights is None:
        weights = wrapped_lambda_weights(kernel, shape)
    sup = np.abs(X).max(axis=-1)
    return float(np.sqrt((weights * sup**2).sum()))


def kernel_to_csv(kernel: KernelFamily, path, which: str = "kappa") -> None:
    """Write a kernel table as rows of (offset coordinates..., value)."""
    if which == "kappa":
        tbl, radius = kernel.kappa, kernel.R
    elif which == "lambda":
        if kernel.lam is None:
            raise KernelConstructionError("lambda weights not built yet")
        tbl, radius = kernel.lam, kernel.R_lambda
    else:
        raise ValueError(f"unknown table {which!r}")
    shape = LatticeShape(d=kernel.d, n=radius)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"k{p+1}" for p in range(kernel.d)] + ["value"])
        for off in cube_indices(shape):
            writer.writerow(list(off) + [repr(float(tbl[tuple(c + radius for c in off)]))])


def kernel_table_from_csv(path, d: int) -> dict[tuple, float]:
    """Read an offset/value table written by :func:`kernel_to_csv`."""
    out: dict[tuple, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != d + 1:
            raise ValueError(f"expected {d + 1} columns, got {len(header)}")
        for row in reader:
            out[tuple(int(c) for c in row[:d])] = float(row[d])
    return out


TailFn = Callable[[int], float]
