"""Deterministic file output: CSV tables, JSON reports, binary path dumps.

All writers are byte-deterministic for fixed inputs: floats are rendered with
repr (shortest round-trip form), JSON keys are sorted, newlines are '\\n',
and no timestamps are embedded.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dynamics import PathEnsemble
from .lattice import LatticeShape
from .noise import NoiseEnsemble
from .timegrid import TimeGrid

_MAGIC = b"TORUSNET"
_BIN_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_json(path: str | Path, payload: Mapping) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_path_csv(path: str | Path, paths: np.ndarray, times: np.ndarray) -> None:
    """Rows (replica, site, time, value) for a (replicas, sites, K+1) array."""
    R, sites, _ = paths.shape

    def rows():
        for r in range(R):
            for s in range(sites):
                vals = paths[r, s]
                for q, t in enumerate(times):
                    yield (r, s, fmt(float(t)), fmt(float(vals[q])))

    write_csv(path, ("replica", "site", "time", "value"), rows())


def write_path_binary(path: str | Path, paths: np.ndarray, shape: LatticeShape, grid: TimeGrid) -> None:
    """Compact dump: fixed header, then row-major (replica, site, time) float64.

    Header layout, little-endian:
      8s magic | u32 version | u32 d | u32 n | u32 K | f64 T | f64 dt |
      u32 replicas | u32 sites
    """
    R, sites, Kp1 = paths.shape
    header = struct.pack(
        "<8sIIIIddII", _MAGIC, _BIN_VERSION, shape.d, shape.n, grid.K, grid.T, grid.dt, R, sites
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(paths, dtype="<f8").tobytes())


def read_path_binary(path: str | Path) -> tuple[np.ndarray, LatticeShape, TimeGrid]:
    with open(path, "rb") as fh:
        head = fh.read(struct.calcsize("<8sIIIIddII"))
        magic, version, d, n, K, T, dt, R, sites = struct.unpack("<8sIIIIddII", head)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a torusnet binary path file")
        if version != _BIN_VERSION:
            raise ValueError(f"{path}: unsupported binary version {version}")
        payload = np.frombuffer(fh.read(), dtype="<f8").reshape(R, sites, K + 1)
    return payload.copy(), LatticeShape(d=d, n=n), TimeGrid(T=T, dt=dt, K=K)


def write_ensemble_outputs(out_dir: str | Path, ensemble: PathEnsemble, outputs: str) -> list[str]:
    """Retained-path dumps for a simulation (one file per variable)."""
    out_dir = Path(out_dir)
    written: list[str] = []
    if outputs == "none" or ensemble.v_paths is None or ensemble.v_paths.shape[0] == 0:
        return written
    times = ensemble.grid.times
    fields = {"v": ensemble.v_paths, "w": ensemble.w_paths, "noise": ensemble.noise_paths}
    for name, arr in fields.items():
        if arr is None:
            continue
        if outputs == "csv":
            p = out_dir / f"paths_{name}.csv"
            write_path_csv(p, arr, times)
        else:
            p = out_dir / f"paths_{name}.bin"
            write_path_binary(p, arr, ensemble.shape, ensemble.grid)
        written.append(p.name)
    return written


def write_noise_ensemble_csv(path: str | Path, ensemble: NoiseEnsemble) -> None:
    if ensemble.paths is None:
        raise ValueError("noise ensemble has no retained paths")
    write_path_csv(path, ensemble.paths, ensemble.grid.times)


def write_scaling_csv(path: str | Path, rows: Sequence[Mapping]) -> None:
    header = ("n", "sites", "replicas", "threshold", "hits", "p_hat", "ci_lo", "ci_hi", "norm_log_p")
    write_csv(path, header, ([row[k] for k in header] for row in rows))


def write_stats_csv(path: str | Path, rows: Sequence[Mapping]) -> None:
    if not rows:
        raise ValueError("no rows to write")
    header = list(rows[0].keys())
    write_csv(path, header, ([row[k] for k in header] for row in rows))
