"""Torus geometry: index arithmetic, shift operators and the d-dimensional DFT.

Fields over the torus are numpy arrays whose first ``d`` axes are site axes
of length ``2n + 1``; the site with coordinates ``j`` lives at array position
``j + n`` per axis.  Trailing axes (time, replicas) are carried along
untouched by all operations here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

IndexTuple = tuple[int, ...]


@dataclass(frozen=True)
class LatticeShape:
    """Cube of lattice sites {-n, ..., n}^d with toroidal wrap-around.

    d: spatial dimension, restricted to 1..3.
    n: torus radius; the side length is 2n + 1.
    """

    d: int
    n: int

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 0:
            raise ValueError(f"torus radius must be >= 0, got {self.n}")

    @property
    def side(self) -> int:
        return 2 * self.n + 1

    @property
    def site_count(self) -> int:
        return self.side**self.d

    @property
    def site_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))

    def grid_shape(self) -> tuple[int, ...]:
        return (self.side,) * self.d


def cube_indices(shape: LatticeShape) -> list[IndexTuple]:
    """All site indices of the cube, lexicographic, coordinates ascending from -n.

    The k-th tuple corresponds to flat offset k of a C-order flattened field
    array (see :func:`flat_index`).
    """
    rng = range(-shape.n, shape.n + 1)
    out: list[IndexTuple] = [()]
    for _ in range(shape.d):
        out = [prefix + (c,) for prefix in out for c in rng]
    return out


def flat_index(j: Sequence[int], shape: LatticeShape) -> int:
    """C-order flat offset of site ``j`` via (coord + n) positional encoding."""
    idx = 0
    for p in range(shape.d):
        c = j[p]
        if not -shape.n <= c <= shape.n:
            raise ValueError(f"coordinate {c} outside [-{shape.n}, {shape.n}]")
        idx = idx * shape.side + (c + shape.n)
    return idx


def mod_torus(j: Sequence[int], shape: LatticeShape) -> IndexTuple:
    """Reduce an arbitrary integer tuple coordinate-wise into [-n, n]."""
    if len(j) != shape.d:
        raise ValueError(f"expected {shape.d} coordinates, got {len(j)}")
    side = shape.side
    return tuple((int(c) + shape.n) % side - shape.n for c in j)


def mod_torus_array(coords: np.ndarray, shape: LatticeShape) -> np.ndarray:
    """Vectorized :func:`mod_torus`; last axis holds the d coordinates."""
    return (np.asarray(coords) + shape.n) % shape.side - shape.n


def shift_field(X: np.ndarray, j: Sequence[int], shape: LatticeShape) -> np.ndarray:
    """Shift operator: ``(S^j X)^m = X^{(m + j) mod V_n}``."""
    if len(j) != shape.d:
        raise ValueError(f"expected {shape.d} shift coordinates, got {len(j)}")
    return np.roll(X, shift=[-int(c) for c in j], axis=shape.site_axes)


def dft_field(X: np.ndarray, shape: LatticeShape) -> np.ndarray:
    """Forward DFT over the site axes with the centered index convention.

    Output entry at frequency k (stored at k + n per axis) equals
    ``sum_j exp(-2 pi i <j, k> / (2n+1)) X^j``.
    """
    axes = shape.site_axes
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(X, axes=axes), axes=axes), axes=axes)


def idft_field(Y: np.ndarray, shape: LatticeShape) -> np.ndarray:
    """Inverse of :func:`dft_field`; includes the 1/|V_n| normalization."""
    axes = shape.site_axes
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(Y, axes=axes), axes=axes), axes=axes)


def neighbor_table(shape: LatticeShape, offsets: Iterable[IndexTuple]) -> np.ndarray:
    """Flat-index lookup ``tbl[s, o] = flat((site_s + offset_o) mod V_n)``.

    Used to vectorize interaction sums over a fixed offset support.
    """
    sites = np.array(cube_indices(shape), dtype=np.int64).reshape(shape.site_count, shape.d)
    offs = np.array(list(offsets), dtype=np.int64).reshape(-1, shape.d)
    wrapped = mod_torus_array(sites[:, None, :] + offs[None, :, :], shape) + shape.n
    tbl = np.zeros(wrapped.shape[:2], dtype=np.int64)
    for p in range(shape.d):
        tbl = tbl * shape.side + wrapped[..., p]
    return tbl
