"""Property-verification suites: per-check pass/fail with measured margins.

Each suite exercises the constructive guarantees the model is built on, at
the configured parameters: positivity/normalization/domination of the weight
sequence, synthesis-algebra and statistical covariance of the noise,
equivariance/Lipschitz/truncation/growth behavior of the solution maps, and
exact stationarity of empirical measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .dynamics import (
    FhnParams,
    LearningParams,
    brownian_path_field,
    growth_bound_check,
    lipschitz_ratio,
    psi_lipschitz_log_bound,
    simulate_network,
    solve_driven,
    truncation_gap,
)
from .empirical import bl_distance, empirical_measure, marginal_statistics, stationarity_check
from .kernels import build_lambda, check_domination, wrapped_lambda_weights
from .lattice import LatticeShape, idft_field, shift_field
from .noise import build_spectral_model, sample_noise_paths, verify_covariance
from .runner import simulate_config
from .timegrid import TimeGrid

SUITES = ("kernels", "noise", "dynamics", "empirical")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _check(suite: str, name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail)


def run_suite(cfg: RunConfig, suite: str, replicas: int | None = None, workers: int = 1) -> list[CheckResult]:
    if suite == "all":
        out: list[CheckResult] = []
        for s in SUITES:
            out.extend(run_suite(cfg, s, replicas=replicas, workers=workers))
        return out
    if suite == "kernels":
        return _kernels_suite(cfg)
    if suite == "noise":
        return _noise_suite(cfg, replicas)
    if suite == "dynamics":
        return _dynamics_suite(cfg)
    if suite == "empirical":
        return _empirical_suite(cfg, workers)
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")


def _kernels_suite(cfg: RunConfig) -> list[CheckResult]:
    fam = cfg.kernel_family(with_lambda=True)
    rep = check_domination(fam)
    out = [
        _check("kernels", "lambda_positive", rep["min_lambda"] > 0.0, f"min lambda = {rep['min_lambda']:.3e}"),
        _check(
            "kernels",
            "lambda_normalized",
            rep["normalization_error"] <= 1e-8,
            f"|sum lambda - 1| = {rep['normalization_error']:.3e}",
        ),
        _check(
            "kernels",
            "domination_inequality",
            rep["max_violation"] <= 1e-8,
            f"max relative violation = {rep['max_violation']:.3e} on interior radius {rep['interior_radius']}",
        ),
        _check(
            "kernels",
            "origin_strict_deficit",
            rep["origin_deficit"] < 0.0,
            f"conv - 2 kappa_star lambda at origin = {rep['origin_deficit']:.6g}",
        ),
    ]
    fam2 = build_lambda(fam, M=2 * fam.M, R_lambda=fam.R_lambda)
    dbl = float(np.abs(fam.lam - fam2.lam).max())
    out.append(_check("kernels", "spectral_grid_converged", dbl <= 1e-9, f"max |lambda(M) - lambda(2M)| = {dbl:.3e}"))
    return out


def _noise_suite(cfg: RunConfig, replicas: int | None) -> list[CheckResult]:
    shape = cfg.lattice_shape()
    grid = cfg.time_grid()
    model = build_spectral_model(cfg.noise_spec(), shape, grid)
    out = []
    sym = float(np.abs(model.c_spatial - np.flip(model.c_spatial)).max())
    out.append(_check("noise", "filter_symmetry", sym == 0.0, f"max |c^(n,k) - c^(n,-k)| = {sym:.3e}"))
    recon = idft_field(np.fft.fftshift(model.c_tilde_wrapped) ** 2, shape).real
    alg = float(np.abs(recon - model.a_spatial).max())
    out.append(
        _check("noise", "per_step_covariance_algebra", alg <= 1e-12, f"max |IDFT(ctilde^2) - a| = {alg:.3e}")
    )
    out.append(
        _check(
            "noise",
            "quadrature_converged",
            model.limit_quadrature_error <= 1e-10,
            f"limit-filter Richardson error = {model.limit_quadrature_error:.3e}",
        )
    )
    n_rep = replicas if replicas is not None else max(cfg["run"]["replicas"], 2000)
    half = grid.T / 2
    ens = sample_noise_paths(model, n_rep, cfg["run"]["seed"], record_times=[half, grid.T])
    rep = verify_covariance(ens, model, time_pairs=[(grid.T, grid.T), (half, grid.T), (half, half)])
    out.append(
        _check(
            "noise",
            "covariance_4sigma",
            rep["max_abs_deviation_sigmas"] <= 4.0,
            f"max deviation = {rep['max_abs_deviation_sigmas']:.2f} sigma at {n_rep} replicas",
        )
    )
    mart = [
        r
        for r in rep["rows"]
        if r["s"] == half and r["t"] == grid.T
    ]
    worst = max(r["deviation_sigmas"] for r in mart) if mart else 0.0
    out.append(
        _check("noise", "martingale_covariance", worst <= 4.0, f"E[W_s W_t] vs E[W_s W_s]: worst {worst:.2f} sigma")
    )
    return out


def _dynamics_suite(cfg: RunConfig) -> list[CheckResult]:
    shape = cfg.lattice_shape()
    grid = cfg.time_grid()
    fhn = cfg.fhn_params()
    learning = cfg.learning_params()
    kernel = cfg.kernel_family(with_lambda=True)
    weights = wrapped_lambda_weights(kernel, shape)
    out = []

    # equilibrium: zero drive, zero offsets, zero coupling stays at zero
    fhn0 = FhnParams(a_fr=0.0, c_fr=fhn.c_fr, f1=fhn.f1, f2=fhn.f2)
    learn0 = LearningParams(
        J_bar0=0.0, rho_J=learning.rho_J, R_J=learning.R_J, J_corr=0.0, J_dec=0.0, v_fn=learning.v_fn
    )
    ens0 = simulate_network(fhn0, learn0, None, shape, grid, replicas=1, seed=0, keep_paths=1)
    eq = float(np.abs(ens0.v_paths).max() + np.abs(ens0.w_paths).max())
    out.append(_check("dynamics", "zero_equilibrium", eq == 0.0, f"max |state| = {eq:.3e}"))

    # exact shift equivariance on random driving fields
    worst = 0.0
    for i in range(5):
        w = brownian_path_field(shape, grid, seed=cfg["run"]["seed"] + 17, stream=i)
        j = tuple(int(c) for c in np.random.default_rng(i).integers(-shape.n, shape.n + 1, shape.d))
        lhs = solve_driven(shift_field(w, j, shape), None, fhn, learning, shape, grid)
        rhs = shift_field(solve_driven(w, None, fhn, learning, shape, grid), j, shape)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    out.append(_check("dynamics", "shift_equivariance", worst <= 1e-10, f"max deviation = {worst:.3e}"))

    # Lipschitz bound on random Brownian pairs
    log_bound = psi_lipschitz_log_bound(kernel, fhn, grid)
    worst_ratio = 0.0
    for i in range(20):
        w = brownian_path_field(shape, grid, seed=cfg["run"]["seed"] + 29, stream=2 * i)
        v = brownian_path_field(shape, grid, seed=cfg["run"]["seed"] + 29, stream=2 * i + 1)
        worst_ratio = max(
            worst_ratio, lipschitz_ratio(w, v, fhn, learning, kernel, shape, grid, weights=weights)
        )
    ok = math.log(worst_ratio) <= log_bound if worst_ratio > 0 else True
    out.append(
        _check(
            "dynamics",
            "solution_map_lipschitz",
            ok,
            f"worst ratio = {worst_ratio:.4g}, log bound = {log_bound:.4g}",
        )
    )

    # growth envelope
    wf = brownian_path_field(shape, grid, seed=cfg["run"]["seed"] + 43)
    g = growth_bound_check(wf, fhn, learning, kernel, shape, grid)
    margin = min(r["rhs"] / r["lhs"] if r["lhs"] > 0 else math.inf for r in g["rows"])
    out.append(_check("dynamics", "growth_envelope", g["all_ok"], f"min envelope slack factor = {margin:.3g}"))

    # truncation gap decreases (only meaningful with support to cut)
    if learning.R_J >= 3:
        radii = sorted({max(1, learning.R_J // 3), max(2, (2 * learning.R_J) // 3)})
        gaps = [
            truncation_gap(wf, r, fhn, learning, kernel, shape, grid)["gap"] for r in radii
        ]
        dec = all(gaps[i] > gaps[i + 1] for i in range(len(gaps) - 1))
        out.append(
            _check(
                "dynamics",
                "truncation_gap_decreasing",
                dec,
                f"radii {radii} -> gaps {[f'{g:.3e}' for g in gaps]}",
            )
        )

    # Euler self-convergence on the deterministic configuration
    terms = {}
    for dt in (grid.dt, grid.dt / 2, grid.dt / 4):
        g2 = TimeGrid.from_spec(grid.T, dt)
        e = simulate_network(fhn, learning, None, shape, g2, replicas=1, seed=0, keep_paths=1)
        terms[dt] = e.v_paths[0, :, -1]
    d1 = float(np.abs(terms[grid.dt] - terms[grid.dt / 2]).max())
    d2 = float(np.abs(terms[grid.dt / 2] - terms[grid.dt / 4]).max())
    ratio = d1 / d2 if d2 > 0 else math.inf
    out.append(
        _check("dynamics", "euler_self_convergence", ratio >= 1.8, f"halving ratio = {ratio:.3f} (diffs {d1:.2e}, {d2:.2e})")
    )

    # Hebbian clamp and pure-decay law
    learn_z = LearningParams(
        J_bar0=max(learning.J_bar0, 0.1),
        rho_J=learning.rho_J,
        R_J=learning.R_J,
        J_corr=learning.J_corr,
        J_dec=max(learning.J_dec, 0.5),
        v_fn="zero",
        j_ini_frac=1.0,
    )
    ens_z = simulate_network(fhn, learn_z, None, shape, grid, replicas=1, seed=0)
    traj = ens_z.j_mean_traj
    rel = float(np.abs(traj[-1] / traj[0] - math.exp(-learn_z.J_dec * grid.T)).max()) / math.exp(
        -learn_z.J_dec * grid.T
    )
    ok = rel <= 2.0 * grid.dt and ens_z.j_min.min() >= 0.0 and ens_z.j_max_excess.max() <= 0.0
    out.append(_check("dynamics", "hebbian_clamp_and_decay", ok, f"decay relative error = {rel:.3e}"))
    return out


def _empirical_suite(cfg: RunConfig, workers: int = 1) -> list[CheckResult]:
    shape = cfg.lattice_shape()
    grid = cfg.time_grid()
    out = []
    small = cfg.with_overrides(run={"replicas": 3, "keep_paths": 3})
    ens = simulate_config(small, workers=workers)
    mus = [
        empirical_measure(ens.replica_path_field(r), shape, grid) for r in range(ens.v_paths.shape[0])
    ]
    out.append(
        _check(
            "empirical",
            "stationarity_exact",
            all(stationarity_check(mu) for mu in mus),
            f"{len(mus)} simulated measures, all shifts",
        )
    )
    mu = mus[0]
    offs = [(0,) * shape.d, (1,) + (0,) * (shape.d - 1)]
    stats = marginal_statistics(mu, offs, [grid.T])
    mean_gap = abs(stats[0]["mean"] - stats[1]["mean"])
    out.append(_check("empirical", "marginal_offset_independent", mean_gap == 0.0, f"mean gap = {mean_gap:.3e}"))
    d12 = bl_distance(mus[0], mus[1], seed=7)
    d11 = bl_distance(mus[0], mus[0], seed=7)
    d21 = bl_distance(mus[1], mus[0], seed=7)
    ok = d11 == 0.0 and d12 == d21 and 0.0 <= d12 <= 2.0
    out.append(_check("empirical", "bl_distance_pseudometric", ok, f"d(mu1,mu2) = {d12:.4f}"))
    return out
