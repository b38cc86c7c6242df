"""Command-line entry points: simulate, verify, scaling.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure (non-finite state).  Outputs are byte-deterministic for a
fixed (config, seed), independent of --workers.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .deviations import observable_names, observable_values, get_observable
from .errors import ConfigError, NonFiniteStateError, TorusnetError
from .io import write_ensemble_outputs, write_json, write_scaling_csv
from .runner import ldp_scaling_report, simulate_config
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusnet",
        description="Lattice neural-network simulation with torus-correlated noise",
    )
    parser.add_argument("--version", action="version", version=f"torusnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_required: bool) -> None:
        p.add_argument("--config", required=True, help="path to an INI or JSON run configuration")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override [run] seed")
        p.add_argument("--replicas", type=int, default=None, help="override [run] replicas")
        p.add_argument("--workers", type=int, default=1, help="worker processes (must not affect results)")

    p_sim = sub.add_parser("simulate", help="run the network ensemble and write outputs")
    common(p_sim, out_required=True)

    p_ver = sub.add_parser("verify", help="run property-verification suites")
    common(p_ver, out_required=False)
    p_ver.add_argument("--suite", default="all", choices=SUITES + ("all",))

    p_sca = sub.add_parser("scaling", help="rare-event scaling sweep across torus radii")
    common(p_sca, out_required=True)
    p_sca.add_argument("--n-list", required=True, help="comma-separated torus radii, e.g. 1,2,3")
    p_sca.add_argument("--observable", required=True, help=f"one of {observable_names()}")
    p_sca.add_argument("--threshold", default="auto", help="threshold value or 'auto'")
    return parser


def _manifest(cfg: RunConfig, overrides: dict) -> dict:
    payload = cfg.to_dict()
    for section, kv in overrides.items():
        if kv:
            payload.setdefault(section, {}).update(kv)
    meta = dict(payload.get("meta", {}))
    meta["code_version"] = __version__
    payload["meta"] = meta
    return payload


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    run_over = {}
    if args.seed is not None:
        run_over["seed"] = args.seed
    if args.replicas is not None:
        run_over["replicas"] = args.replicas
    if run_over:
        cfg = cfg.with_overrides(run=run_over)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ens = simulate_config(cfg, workers=args.workers)
    written = write_ensemble_outputs(out_dir, ens, cfg["run"]["outputs"])
    summary = {
        "replicas": ens.replica_count,
        "sites": ens.shape.site_count,
        "observables": {
            name: _stats(observable_values(ens, name)) for name in observable_names()
        },
        "synapse_bounds": {
            "j_min": float(ens.j_min.min()),
            "j_max_excess": float(ens.j_max_excess.max()),
        },
        "files": written,
    }
    write_json(out_dir / "summary.json", summary)
    write_json(out_dir / "manifest.json", _manifest(cfg, {"run": run_over}))
    return EXIT_OK


def _stats(values: np.ndarray) -> dict:
    return {
        "mean": float(values.mean()),
        "min": float(values.min()),
        "max": float(values.max()),
        "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
    }


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(run={"seed": args.seed})
    results = run_suite(cfg, args.suite, replicas=args.replicas, workers=args.workers)
    failed = 0
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        print(f"[{tag}] {r.suite}.{r.name}: {r.detail}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(
            out_dir / "verify.json",
            {
                "suite": args.suite,
                "results": [r.__dict__ for r in results],
                "passed": failed == 0,
            },
        )
    return EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED


def cmd_scaling(args) -> int:
    cfg = load_config(args.config)
    try:
        get_observable(args.observable)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    try:
        n_values = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--n-list must be comma-separated integers, got {args.n_list!r}") from None
    if not n_values:
        raise ConfigError("--n-list is empty")
    threshold = args.threshold
    if threshold != "auto":
        try:
            threshold = float(threshold)
        except ValueError:
            raise ConfigError(f"--threshold must be a number or 'auto', got {threshold!r}") from None
    replicas = args.replicas if args.replicas is not None else cfg["run"]["replicas"]
    seed = args.seed if args.seed is not None else cfg["run"]["seed"]
    rows = ldp_scaling_report(
        cfg, n_values, args.observable, threshold, replicas, seed=seed, workers=args.workers
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_scaling_csv(out_dir / "scaling.csv", rows)
    write_json(
        out_dir / "manifest.json",
        _manifest(
            cfg,
            {
                "run": {"seed": seed, "replicas": replicas},
            },
        )
        | {
            "scaling": {
                "observable": args.observable,
                "n_list": n_values,
                "threshold": args.threshold if args.threshold == "auto" else float(threshold),
                "resolved_threshold": rows[0]["threshold"] if rows else None,
            }
        },
    )
    for row in rows:
        flag = " ZERO_HITS" if row["zero_hits"] else ""
        print(
            f"n={row['n']} sites={row['sites']} p_hat={row['p_hat']:.4g} "
            f"norm_log_p={row['norm_log_p']:.6g}{flag}"
        )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "scaling":
            return cmd_scaling(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteStateError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TorusnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
