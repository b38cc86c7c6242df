"""FitzHugh-Nagumo lattice network with chemical synapses and Hebbian plasticity.

The per-site state is (v, w); the voltage receives the noise and the synaptic
input, the recovery variable relaxes linearly:

    dv^j = (v - v^3/3 - w + sum_k J^k f1(v^j) f2(v^{(j+k) mod V_n})) dt + dW^j
    dw^j = (v + a - c w) dt,          v_0 = w_0 = U_ini (default 0).

Synaptic conductances J^k(j) live on ordered (site, offset) pairs, clamped to
[0, Jbar^k], and follow the Hebbian rule

    dJ/dt = J_corr (Jbar^k - J) act(U^j) act(U^{j+k}) - J_dec J.

Everything is integrated by explicit Euler-Maruyama with the interaction and
the learning rule read at the step start.  The same integrator realizes the
deterministic solution maps (driving path in, voltage path field out), whose
Lipschitz, truncation and growth envelopes are measured by the check
functions at the bottom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DegenerateInputError, NonFiniteStateError
from .kernels import KernelFamily, weighted_norm, wrapped_lambda_weights
from .lattice import LatticeShape, cube_indices, neighbor_table
from .noise import NoiseEnsemble, SpectralNoiseModel, noise_increments, replica_rng
from .timegrid import TimeGrid


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class ResponseFn:
    """Bounded globally-Lipschitz scalar response with declared constants."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    bound: float
    lipschitz: float

    def validate_bound(self, samples: np.ndarray | None = None) -> None:
        xs = samples if samples is not None else np.linspace(-50.0, 50.0, 2001)
        vals = np.abs(self.fn(xs))
        if vals.max() > self.bound + 1e-12:
            raise ConfigError(f"response {self.name!r} exceeds its declared bound {self.bound}")


RESPONSE_FUNCTIONS: dict[str, ResponseFn] = {
    "sigmoid": ResponseFn("sigmoid", _sigmoid, bound=1.0, lipschitz=0.25),
    "tanh01": ResponseFn("tanh01", lambda x: 0.5 * (1.0 + np.tanh(x)), bound=1.0, lipschitz=0.5),
    "one": ResponseFn("one", lambda x: np.ones_like(x, dtype=float), bound=1.0, lipschitz=0.0),
}

# activity functions act(v, w) for the learning rule
ACTIVITY_FUNCTIONS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "sigmoid": lambda v, w: _sigmoid(v),
    "zero": lambda v, w: np.zeros_like(v),
}


@dataclass(frozen=True)
class FhnParams:
    """FitzHugh-Nagumo constants and response functions.

    a_fr >= 0 is the recovery offset, c_fr > 0 the recovery decay rate.
    """

    a_fr: float = 0.3
    c_fr: float = 0.8
    f1: str = "sigmoid"
    f2: str = "sigmoid"
    U_ini: float = 0.0

    def __post_init__(self) -> None:
        if self.c_fr <= 0:
            raise ConfigError(f"c_fr must be > 0, got {self.c_fr}")
        if self.a_fr < 0:
            raise ConfigError(f"a_fr must be >= 0, got {self.a_fr}")
        for name in (self.f1, self.f2):
            if name not in RESPONSE_FUNCTIONS:
                raise ConfigError(f"unknown response function {name!r}")

    @property
    def f1_fn(self) -> ResponseFn:
        return RESPONSE_FUNCTIONS[self.f1]

    @property
    def f2_fn(self) -> ResponseFn:
        return RESPONSE_FUNCTIONS[self.f2]

    @property
    def f_bar(self) -> float:
        return max(self.f1_fn.bound, self.f2_fn.bound)

    def drift_difference_constant(self, T: float) -> float:
        """One-sided Lipschitz constant of the internal drift.

        The cubic voltage term only ever shrinks a positive gap
        (x - x^3/3 has one-sided differences <= ||x - z||), contributing 1.
        The recovery feedback enters the voltage equation through
        -w_t = -int_0^t exp(-c (t-s)) (v_s + a) ds, whose difference is
        bounded by (1/c)(1 - exp(-c t)) ||dv||_t <= ||dv||_t / c.  An extra
        T/c margin conservatively covers the recovery offset a accumulated
        over the horizon, giving C_tilde = 1 + 1/c + T/c.
        """
        return 1.0 + 1.0 / self.c_fr + T / self.c_fr


@dataclass(frozen=True)
class LearningParams:
    """Hebbian learning constants and the maximal-conductance profile.

    Jbar^k = J_bar0 * rho_J^(sum_p |k_p|) on the offset cube |k|_inf <= R_J;
    initial conductances are j_ini_frac * Jbar^k.
    """

    J_bar0: float = 0.4
    rho_J: float = 0.5
    R_J: int = 4
    J_corr: float = 1.0
    J_dec: float = 1.0
    v_fn: str = "sigmoid"
    j_ini_frac: float = 1.0

    def __post_init__(self) -> None:
        if self.J_bar0 < 0:
            raise ConfigError(f"J_bar0 must be >= 0, got {self.J_bar0}")
        if not 0.0 < self.rho_J < 1.0:
            raise ConfigError(f"rho_J must be in (0,1), got {self.rho_J}")
        if self.R_J < 0:
            raise ConfigError(f"R_J must be >= 0, got {self.R_J}")
        if self.J_corr < 0 or self.J_dec < 0:
            raise ConfigError("J_corr and J_dec must be >= 0")
        if not 0.0 <= self.j_ini_frac <= 1.0:
            raise ConfigError(f"j_ini_frac must be in [0,1], got {self.j_ini_frac}")
        if self.v_fn not in ACTIVITY_FUNCTIONS:
            raise ConfigError(f"unknown activity function {self.v_fn!r}")

    def offsets(self, d: int) -> list[tuple[int, ...]]:
        return cube_indices(LatticeShape(d=d, n=self.R_J))

    def j_bar_values(self, d: int) -> np.ndarray:
        offs = np.array(self.offsets(d), dtype=float).reshape(-1, d)
        return self.J_bar0 * self.rho_J ** np.abs(offs).sum(axis=1)

    @property
    def activity(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        return ACTIVITY_FUNCTIONS[self.v_fn]


@dataclass
class SynapticState:
    """Conductances J for every ordered (site, offset) pair on the torus."""

    shape: LatticeShape
    offsets: tuple[tuple[int, ...], ...]
    J_bar: np.ndarray                 # (n_off,)
    J: np.ndarray                     # (..., sites, n_off)
    nbr: np.ndarray                   # (sites, n_off) flat index of (site + offset) mod V_n
    params: LearningParams

    @classmethod
    def initial(
        cls,
        shape: LatticeShape,
        params: LearningParams,
        batch: tuple[int, ...] = (),
        restrict_radius: int | None = None,
    ) -> "SynapticState":
        offs = params.offsets(shape.d)
        jbar = params.j_bar_values(shape.d)
        if restrict_radius is not None:
            keep = [i for i, o in enumerate(offs) if max(abs(c) for c in o) <= restrict_radius]
            offs = [offs[i] for i in keep]
            jbar = jbar[keep]
        nbr = neighbor_table(shape, offs)
        J = np.broadcast_to(params.j_ini_frac * jbar, batch + (shape.site_count, jbar.size)).copy()
        return cls(shape=shape, offsets=tuple(offs), J_bar=jbar, J=J, nbr=nbr, params=params)


def interaction_field(state: SynapticState, fhn: FhnParams, v_values: np.ndarray) -> np.ndarray:
    """Synaptic drive per site: f1(v^j) * sum_k J^k(j) f2(v^{(j+k) mod V_n}).

    v_values has flat sites on the last axis; leading axes are batch.
    """
    f1v = fhn.f1_fn.fn(v_values)
    f2v = fhn.f2_fn.fn(v_values)
    return f1v * (state.J * f2v[..., state.nbr]).sum(axis=-1)


def interaction_sum(state: SynapticState, fhn: FhnParams, v_values: np.ndarray, site: int) -> float:
    """Single-site interaction term (flat site index)."""
    return float(interaction_field(state, fhn, v_values)[..., site])


def hebbian_step(
    state: SynapticState,
    v_values: np.ndarray,
    w_values: np.ndarray,
    dt: float,
) -> SynapticState:
    """Explicit Euler step of the learning rule, clamped to [0, Jbar^k]."""
    act = state.params.activity(v_values, w_values)
    J = _hebbian_update(state.J, act, state.nbr, state.J_bar, state.params, dt)
    return replace(state, J=J)


def _hebbian_update(
    J: np.ndarray,
    act: np.ndarray,
    nbr: np.ndarray,
    J_bar: np.ndarray,
    params: LearningParams,
    dt: float,
) -> np.ndarray:
    corr = params.J_corr * (J_bar - J) * act[..., None] * act[..., nbr]
    J_new = J + (corr - params.J_dec * J) * dt
    np.clip(J_new, 0.0, J_bar, out=J_new)
    return J_new


@dataclass
class PathEnsemble:
    """Simulation output: per-replica summaries plus retained full paths."""

    shape: LatticeShape
    grid: TimeGrid
    seed: int
    replica_count: int
    v_sup: np.ndarray                    # (R, sites)
    w_sup: np.ndarray                    # (R, sites)
    v_terminal: np.ndarray               # (R, sites)
    noise_sup: np.ndarray                # (R, sites)
    j_min: np.ndarray                    # (R,) running min of J over steps/pairs
    j_max_excess: np.ndarray             # (R,) running max of J - Jbar (<= 0 when clamped)
    offsets: tuple[tuple[int, ...], ...]
    j_mean_traj: np.ndarray | None = None   # (K+1, n_off) site-mean J of replica 0
    v_paths: np.ndarray | None = None       # (keep, sites, K+1)
    w_paths: np.ndarray | None = None
    noise_paths: np.ndarray | None = None

    def replica_path_field(self, r: int) -> np.ndarray:
        """Grid-shaped voltage path field of a retained replica."""
        if self.v_paths is None or r >= self.v_paths.shape[0]:
            raise ValueError(f"replica {r} was not retained with full paths")
        return self.v_paths[r].reshape(self.shape.grid_shape() + (self.grid.K + 1,))


def _euler_sweep(
    shape: LatticeShape,
    grid: TimeGrid,
    fhn: FhnParams,
    state: SynapticState,
    drive: np.ndarray,
    keep_paths: int = 0,
    record_j_traj: bool = False,
    track_noise_sup: bool = True,
) -> dict:
    """Core explicit Euler loop over one batch.

    drive holds increments of the driving path (noise or deterministic
    input), shape (B, K, sites).  All per-site updates read the previous
    step's field, so the sweep is synchronous.
    """
    B, K, sites = drive.shape
    dt = grid.dt
    learn = state.params.J_corr != 0.0 or state.params.J_dec != 0.0
    has_syn = state.J_bar.size > 0 and state.J_bar.max() > 0.0

    v = np.full((B, sites), fhn.U_ini, dtype=float)
    w = np.zeros((B, sites))
    W_run = np.zeros((B, sites))
    v_sup = np.abs(v).copy()
    w_sup = np.zeros((B, sites))
    noise_sup = np.zeros((B, sites))
    j_min = np.full(B, state.J.min() if state.J.size else 0.0)
    j_excess = np.full(B, (state.J - state.J_bar).max() if state.J.size else 0.0)

    keep = min(keep_paths, B)
    v_paths = np.empty((keep, sites, K + 1)) if keep else None
    w_paths = np.empty((keep, sites, K + 1)) if keep else None
    n_paths = np.empty((keep, sites, K + 1)) if keep else None
    if keep:
        v_paths[:, :, 0] = v[:keep]
        w_paths[:, :, 0] = 0.0
        n_paths[:, :, 0] = 0.0
    j_traj = np.empty((K + 1, state.J_bar.size)) if record_j_traj else None
    if record_j_traj:
        j_traj[0] = state.J[0].mean(axis=0)

    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(K):
            inter = interaction_field(state, fhn, v) if has_syn else 0.0
            drift_v = v - v**3 / 3.0 - w + inter
            drift_w = v + fhn.a_fr - fhn.c_fr * w
            if learn and state.J.size:
                act = state.params.activity(v, w)
                state.J = _hebbian_update(state.J, act, state.nbr, state.J_bar, state.params, dt)
                j_min = np.minimum(j_min, state.J.min(axis=(-2, -1)))
                j_excess = np.maximum(j_excess, (state.J - state.J_bar).max(axis=(-2, -1)))
            v = v + drift_v * dt + drive[:, m]
            w = w + drift_w * dt
            if not np.isfinite(v).all() or not np.isfinite(w).all():
                bad = np.argwhere(~np.isfinite(v) | ~np.isfinite(w))
                b, s = (int(bad[0][0]), int(bad[0][1])) if bad.size else (0, 0)
                raise NonFiniteStateError(
                    f"NONFINITE_STATE at site {s}, t = {(m + 1) * dt:.6g}: reduce dt",
                    site=s,
                    time=(m + 1) * dt,
                )
            np.maximum(v_sup, np.abs(v), out=v_sup)
            np.maximum(w_sup, np.abs(w), out=w_sup)
            if track_noise_sup:
                W_run += drive[:, m]
                np.maximum(noise_sup, np.abs(W_run), out=noise_sup)
            if keep:
                v_paths[:, :, m + 1] = v[:keep]
                w_paths[:, :, m + 1] = w[:keep]
                n_paths[:, :, m + 1] = W_run[:keep]
            if record_j_traj:
                j_traj[m + 1] = state.J[0].mean(axis=0)

    return {
        "v": v,
        "w": w,
        "v_sup": v_sup,
        "w_sup": w_sup,
        "noise_sup": noise_sup,
        "j_min": j_min,
        "j_excess": j_excess,
        "v_paths": v_paths,
        "w_paths": w_paths,
        "noise_paths": n_paths,
        "j_traj": j_traj,
    }


def _drive_chunk(
    model: SpectralNoiseModel | None,
    ensemble: NoiseEnsemble | None,
    start: int,
    stop: int,
    seed: int,
    grid: TimeGrid,
    sites: int,
    rng_offset: int = 0,
) -> np.ndarray:
    if ensemble is not None:
        if ensemble.paths is None or ensemble.paths.shape[0] < stop:
            raise ValueError("supplied noise ensemble must retain full paths for every replica")
        return np.diff(ensemble.paths[start:stop], axis=-1).transpose(0, 2, 1).copy()
    if model is None or model.spec.sigma2 == 0.0:
        return np.zeros((stop - start, grid.K, sites))
    dB = np.empty((stop - start, grid.K, sites))
    root_dt = math.sqrt(grid.dt)
    for i, r in enumerate(range(start + rng_offset, stop + rng_offset)):
        dB[i] = replica_rng(seed, r).standard_normal((grid.K, sites)) * root_dt
    return noise_increments(model, dB)


def simulate_network(
    fhn: FhnParams,
    learning: LearningParams,
    noise: SpectralNoiseModel | NoiseEnsemble | None,
    shape: LatticeShape,
    grid: TimeGrid,
    replicas: int,
    seed: int,
    keep_paths: int = 2,
    chunk_size: int = 256,
    kernel: KernelFamily | None = None,
    replica_offset: int = 0,
) -> PathEnsemble:
    """Euler-Maruyama ensemble of the network SDE.

    Noise can come from a spectral model (fresh increments per replica,
    reproducible from (seed, replica)), from a previously sampled ensemble
    with retained paths, or be absent (deterministic dynamics).
    replica_offset shifts the global replica ids used to derive noise
    streams, letting worker pools split one ensemble without changing it.
    """
    if learning.R_J > shape.n:
        raise ConfigError(f"synapse support radius {learning.R_J} exceeds torus radius {shape.n}")
    if kernel is not None:
        validate_interaction_bounds(kernel, learning, fhn, shape.d)
    model = noise if isinstance(noise, SpectralNoiseModel) else None
    supplied = noise if isinstance(noise, NoiseEnsemble) else None
    if supplied is not None:
        replicas = supplied.replica_count

    sites = shape.site_count
    v_sup = np.empty((replicas, sites))
    w_sup = np.empty((replicas, sites))
    v_term = np.empty((replicas, sites))
    noise_sup = np.empty((replicas, sites))
    j_min = np.empty(replicas)
    j_excess = np.empty(replicas)
    keep = min(keep_paths, replicas)
    v_paths = np.empty((keep, sites, grid.K + 1)) if keep else None
    w_paths = np.empty((keep, sites, grid.K + 1)) if keep else None
    n_paths = np.empty((keep, sites, grid.K + 1)) if keep else None
    j_traj = None
    offsets: tuple = ()

    for start in range(0, replicas, chunk_size):
        stop = min(start + chunk_size, replicas)
        drive = _drive_chunk(model, supplied, start, stop, seed, grid, sites, rng_offset=replica_offset)
        state = SynapticState.initial(shape, learning, batch=(stop - start,))
        offsets = state.offsets
        res = _euler_sweep(
            shape,
            grid,
            fhn,
            state,
            drive,
            keep_paths=max(0, keep - start),
            record_j_traj=(start == 0),
        )
        v_sup[start:stop] = res["v_sup"]
        w_sup[start:stop] = res["w_sup"]
        v_term[start:stop] = res["v"]
        noise_sup[start:stop] = res["noise_sup"]
        j_min[start:stop] = res["j_min"]
        j_excess[start:stop] = res["j_excess"]
        if start == 0:
            j_traj = res["j_traj"]
        if keep > start and res["v_paths"] is not None:
            take = res["v_paths"].shape[0]
            v_paths[start : start + take] = res["v_paths"]
            w_paths[start : start + take] = res["w_paths"]
            n_paths[start : start + take] = res["noise_paths"]

    return PathEnsemble(
        shape=shape,
        grid=grid,
        seed=seed,
        replica_count=replicas,
        v_sup=v_sup,
        w_sup=w_sup,
        v_terminal=v_term,
        noise_sup=noise_sup,
        j_min=j_min,
        j_max_excess=j_excess,
        offsets=offsets,
        j_mean_traj=j_traj,
        v_paths=v_paths,
        w_paths=w_paths,
        noise_paths=n_paths,
    )


def validate_interaction_bounds(
    kernel: KernelFamily,
    learning: LearningParams,
    fhn: FhnParams,
    d: int,
) -> None:
    """Interaction-bound compliance: kappa^k >= Jbar^k * f_bar^2 on the support."""
    jbar = learning.j_bar_values(d)
    fb2 = fhn.f_bar**2
    for off, jb in zip(learning.offsets(d), jbar):
        if kernel.kappa_at(off) + 1e-15 < jb * fb2:
            raise ConfigError(
                f"kappa{tuple(off)} = {kernel.kappa_at(off):.6g} does not dominate "
                f"Jbar * f_bar^2 = {jb * fb2:.6g}"
            )


def solve_driven(
    w_input: np.ndarray,
    trunc_radius: int | None,
    fhn: FhnParams,
    learning: LearningParams,
    shape: LatticeShape,
    grid: TimeGrid,
) -> np.ndarray:
    """Deterministic solution map: driving path field -> voltage path field.

    w_input is grid-shaped with time last, zero at t = 0.  The interaction
    sum runs over the synapse support, restricted to offsets in the cube of
    radius trunc_radius when given (the truncated map); site indices wrap
    modulo the torus of the input.
    """
    gs = shape.grid_shape()
    if w_input.shape != gs + (grid.K + 1,):
        raise ValueError(f"w_input must have shape {gs + (grid.K + 1,)}, got {w_input.shape}")
    if np.abs(w_input[..., 0]).max() > 0.0:
        raise ValueError("driving path must vanish at t = 0")
    flat = w_input.reshape(shape.site_count, grid.K + 1)
    out = _solve_driven_batch(flat[None, ...], trunc_radius, fhn, learning, shape, grid)
    return out[0].reshape(gs + (grid.K + 1,))


def _solve_driven_batch(
    w_inputs: np.ndarray,
    trunc_radius: int | None,
    fhn: FhnParams,
    learning: LearningParams,
    shape: LatticeShape,
    grid: TimeGrid,
) -> np.ndarray:
    B = w_inputs.shape[0]
    drive = np.diff(w_inputs, axis=-1).transpose(0, 2, 1).copy()
    state = SynapticState.initial(shape, learning, batch=(B,), restrict_radius=trunc_radius)
    res = _euler_sweep(
        shape, grid, fhn, state, drive, keep_paths=B, record_j_traj=False, track_noise_sup=False
    )
    return res["v_paths"]


def psi_lipschitz_log_bound(kernel: KernelFamily, fhn: FhnParams, grid: TimeGrid) -> float:
    """log of the solution-map Lipschitz bound Psi_C.

    Psi_C^2 = 8 exp(4 T^2 kappa_star^2 exp(2 C T) + 2 C T) with
    C = C_tilde + kappa_star; returned in log form since the bound
    overflows double precision for typical constants.
    """
    T = grid.T
    ks = kernel.kappa_star
    C = fhn.drift_difference_constant(T) + ks
    log_psi_sq = math.log(8.0) + 4.0 * T**2 * ks**2 * math.exp(2.0 * C * T) + 2.0 * C * T
    return 0.5 * log_psi_sq


def lipschitz_ratio(
    w_field: np.ndarray,
    v_field: np.ndarray,
    fhn: FhnParams,
    learning: LearningParams,
    kernel: KernelFamily,
    shape: LatticeShape,
    grid: TimeGrid,
    trunc_radius: int | None = None,
    weights: np.ndarray | None = None,
) -> float:
    """Ratio ||solve(w) - solve(v)||_{T,lambda} / ||w - v||_{T,lambda}.

    Returns 0 for identical inputs; raises DIVISION_DEGENERATE if the inputs
    differ as arrays yet have zero weighted distance.
    """
    if weights is None:
        weights = wrapped_lambda_weights(kernel, shape)
    denom = weighted_norm(w_field - v_field, kernel, shape, weights=weights)
    if denom == 0.0:
        if np.array_equal(w_field, v_field):
            return 0.0
        raise DegenerateInputError("input paths differ but have zero weighted distance")
    batch = np.stack(
        [w_field.reshape(shape.site_count, -1), v_field.reshape(shape.site_count, -1)]
    )
    sols = _solve_driven_batch(batch, trunc_radius, fhn, learning, shape, grid)
    num = weighted_norm(
        (sols[0] - sols[1]).reshape(shape.grid_shape() + (-1,)), kernel, shape, weights=weights
    )
    return num / denom


def brownian_path_field(
    shape: LatticeShape, grid: TimeGrid, seed: int, stream: int = 0, scale: float = 1.0
) -> np.ndarray:
    """Independent Brownian paths per site, grid-shaped, zero at t = 0."""
    rng = replica_rng(seed, stream)
    inc = rng.standard_normal((shape.site_count, grid.K)) * (scale * math.sqrt(grid.dt))
    paths = np.concatenate([np.zeros((shape.site_count, 1)), np.cumsum(inc, axis=1)], axis=1)
    return paths.reshape(shape.grid_shape() + (grid.K + 1,))


def truncation_gap(
    w_input: np.ndarray,
    trunc_radius: int,
    fhn: FhnParams,
    learning: LearningParams,
    kernel: KernelFamily,
    shape: LatticeShape,
    grid: TimeGrid,
) -> dict:
    """Gap sum_j ||Psi(w)^j - Psi^n(w)^j||_T between full and truncated maps.

    The full map runs over the entire synapse support on the input torus.
    bound_ratio divides the gap by kappa_tail(n) * (|V_m| + sum_j ||w^j||_T),
    the self-consistency envelope whose constancy across n is the point of
    interest.
    """
    flat = w_input.reshape(shape.site_count, grid.K + 1)
    full = _solve_driven_batch(flat[None], None, fhn, learning, shape, grid)[0]
    trunc = _solve_driven_batch(flat[None], trunc_radius, fhn, learning, shape, grid)[0]
    gap = float(np.abs(full - trunc).max(axis=-1).sum())
    w_norm_sum = float(np.abs(flat).max(axis=-1).sum())
    kbar = kernel.kappa_tail(trunc_radius)
    envelope = kbar * (shape.site_count + w_norm_sum)
    return {
        "n": trunc_radius,
        "gap": gap,
        "kappa_tail": kbar,
        "envelope_base": shape.site_count + w_norm_sum,
        "bound_ratio": gap / envelope if envelope > 0 else (0.0 if gap == 0.0 else math.inf),
        "exact_zero_expected": trunc_radius >= learning.R_J,
    }


def growth_bound_check(
    w_input: np.ndarray,
    fhn: FhnParams,
    learning: LearningParams,
    kernel: KernelFamily,
    shape: LatticeShape,
    grid: TimeGrid,
    alphas: Sequence[float] | None = None,
) -> dict:
    """Check sum_j ||Psi(w)^j||_alpha against its exponential growth envelope.

    Envelope: exp((C + kappa_star) alpha) (|V_m| (|U_ini| + alpha kappa_star)
    + 2 sum_j ||w^j||_alpha) with C = C_tilde + kappa_star.
    """
    if alphas is None:
        alphas = [grid.T * f for f in (0.25, 0.5, 0.75, 1.0)]
    sol = solve_driven(w_input, None, fhn, learning, shape, grid)
    flat_sol = sol.reshape(shape.site_count, grid.K + 1)
    flat_w = w_input.reshape(shape.site_count, grid.K + 1)
    ks = kernel.kappa_star
    C = fhn.drift_difference_constant(grid.T) + ks
    rows = []
    for alpha in alphas:
        i = grid.index_of(alpha)
        lhs = float(np.abs(flat_sol[:, : i + 1]).max(axis=1).sum())
        w_sum = float(np.abs(flat_w[:, : i + 1]).max(axis=1).sum())
        rhs = math.exp((C + ks) * alpha) * (
            shape.site_count * (abs(fhn.U_ini) + alpha * ks) + 2.0 * w_sum
        )
        rows.append({"alpha": float(alpha), "lhs": lhs, "rhs": rhs, "ok": lhs <= rhs})
    return {"rows": rows, "all_ok": all(r["ok"] for r in rows), "C": C, "kappa_star": ks}
