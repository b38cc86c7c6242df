"""Rare-event Monte Carlo estimation and finite-size scaling diagnostics.

Plain Monte Carlo only: the limiting rate function has no computable form,
so importance-sampling tilts could not be validated; estimates carry Wilson
95% intervals instead.  The scaling report records the normalized quantity
-log p / |V_n| across torus radii without asserting a limit value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import PathEnsemble
from .errors import DuplicateNameError
from .lattice import flat_index
from .noise import wilson_interval


@dataclass(frozen=True)
class ReplicaSummary:
    """Per-replica functionals a registered observable may read."""

    site_count: int
    origin_flat: int
    v_sup: np.ndarray        # (sites,) sup_t |v^j|
    v_terminal: np.ndarray   # (sites,) v^j_T
    noise_sup: np.ndarray    # (sites,) sup_t |W^j|


@dataclass(frozen=True)
class Observable:
    name: str
    evaluator: Callable[[ReplicaSummary], float]


_REGISTRY: dict[str, Observable] = {}


def register_observable(name: str, evaluator: Callable[[ReplicaSummary], float]) -> Observable:
    """Register an evaluator under a unique name for estimators and the CLI."""
    if name in _REGISTRY:
        raise DuplicateNameError(f"DUPLICATE_NAME: observable {name!r} already registered")
    obs = Observable(name=name, evaluator=evaluator)
    _REGISTRY[name] = obs
    return obs


def get_observable(name: str) -> Observable:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown observable {name!r}; known: {sorted(_REGISTRY)}") from None


def observable_names() -> list[str]:
    return sorted(_REGISTRY)


register_observable("site0_sup", lambda r: float(r.v_sup[r.origin_flat]))
register_observable("spatial_mean_sup", lambda r: float(r.v_sup.mean()))
register_observable("terminal_mean", lambda r: float(r.v_terminal.mean()))
register_observable("noise_mass", lambda r: float(r.noise_sup.mean()))


def replica_summaries(ensemble: PathEnsemble):
    """Iterate ReplicaSummary views over a simulated ensemble."""
    origin = flat_index((0,) * ensemble.shape.d, ensemble.shape)
    for r in range(ensemble.replica_count):
        yield ReplicaSummary(
            site_count=ensemble.shape.site_count,
            origin_flat=origin,
            v_sup=ensemble.v_sup[r],
            v_terminal=ensemble.v_terminal[r],
            noise_sup=ensemble.noise_sup[r],
        )


def observable_values(ensemble: PathEnsemble, observable: Observable | str) -> np.ndarray:
    obs = get_observable(observable) if isinstance(observable, str) else observable
    return np.array([obs.evaluator(s) for s in replica_summaries(ensemble)])


def estimate_from_values(values: np.ndarray, threshold: float) -> dict:
    """Tail estimate P(observable > threshold) with Wilson 95% interval.

    Zero-hit estimates are flagged; their informative content is the interval
    upper bound alone.
    """
    n = values.size
    if n < 1:
        raise ValueError("need at least one replica")
    hits = int((values > threshold).sum())
    p_hat = hits / n
    lo, hi = wilson_interval(hits, n)
    return {
        "threshold": float(threshold),
        "replicas": n,
        "hits": hits,
        "p_hat": p_hat,
        "ci_lo": lo,
        "ci_hi": hi,
        "zero_hits": hits == 0,
    }


def estimate_rare_event(
    runner: Callable[[int, int], PathEnsemble],
    observable: Observable | str,
    threshold: float,
    replicas: int,
    seed: int,
) -> dict:
    """Plain MC rare-event estimate with fresh independent noise per replica."""
    if replicas < 100:
        raise ValueError(f"need >= 100 replicas for a rare-event estimate, got {replicas}")
    ensemble = runner(replicas, seed)
    values = observable_values(ensemble, observable)
    return estimate_from_values(values, threshold)


def auto_threshold(values: np.ndarray, quantile: float = 0.9) -> float:
    """Empirical quantile threshold keeping hits nonzero across a sweep."""
    return float(np.quantile(values, quantile))


def scaling_row(n: int, site_count: int, est: dict) -> dict:
    """One row of the scaling table; zero-hit rows carry the Wilson upper bound.

    For zero hits the normalized log uses the interval upper bound, which
    lower-bounds the true -log p / |V_n| (documented convention).
    """
    p_for_log = est["ci_hi"] if est["zero_hits"] else est["p_hat"]
    return {
        "n": int(n),
        "sites": int(site_count),
        "replicas": est["replicas"],
        "threshold": est["threshold"],
        "hits": est["hits"],
        "p_hat": est["p_hat"],
        "ci_lo": est["ci_lo"],
        "ci_hi": est["ci_hi"],
        "zero_hits": est["zero_hits"],
        "norm_log_p": math.log(p_for_log) / site_count if p_for_log > 0 else -math.inf,
    }


def wilson_coverage(
    p_true: float, trials: int, repetitions: int, seed: int = 0
) -> float:
    """Fraction of Wilson intervals covering the true Bernoulli parameter."""
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xC0F)))
    covered = 0
    for _ in range(repetitions):
        hits = int(rng.binomial(trials, p_true))
        lo, hi = wilson_interval(hits, trials)
        covered += lo <= p_true <= hi
    return covered / repetitions
