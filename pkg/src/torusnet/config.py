"""Run configuration: plain-text sections of key=value pairs, strictly validated.

Configs are INI files (configparser dialect) or JSON objects with one object
per section.  Every key has a documented default; unknown sections or keys
are hard errors, since silent typos are the main reproducibility hazard.
Resolved configs echo every default, so the manifest written next to any run
is itself a valid config (the optional [meta] section is carried along and
ignored by the physics).
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .dynamics import FhnParams, LearningParams, validate_interaction_bounds
from .errors import ConfigError
from .kernels import KernelFamily, build_kappa, build_lambda
from .lattice import LatticeShape
from .noise import NoiseSpec, SpectralNoiseModel, build_spectral_model
from .timegrid import TimeGrid

_AUTO = "auto"

# schema: section -> key -> (type, default); "auto" defaults resolve against
# the rest of the configuration during validation.
SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "lattice": {"d": (int, 1), "n": (int, 4)},
    "time": {"T": (float, 1.0), "dt": (float, 1e-3)},
    "kernel": {
        "family": (str, "geometric"),
        "rho": (float, 0.5),
        "scale": (float, 1.0),
        "R": (int, _AUTO),          # 40 / 8 / 4 by dimension
        "R_lambda": (int, _AUTO),   # 60 / 28 / 20 by dimension
        "M": (int, _AUTO),          # 4096 / 256 / 80 by dimension
    },
    "noise": {
        "family": (str, "geometric"),
        "rho_a": (float, 0.4),
        "sigma2": (float, 1.0),
        "time_profile": (str, "constant"),
        "profile_amp": (float, 0.5),
    },
    "fhn": {
        "a_fr": (float, 0.3),
        "c_fr": (float, 0.8),
        "f1": (str, "sigmoid"),
        "f2": (str, "sigmoid"),
    },
    "learning": {
        "J_bar0": (float, 0.4),
        "rho_J": (float, 0.5),
        "R_J": (int, _AUTO),        # min(n, 6)
        "J_corr": (float, 1.0),
        "J_dec": (float, 1.0),
        "v_fn": (str, "sigmoid"),
        "j_ini_frac": (float, 1.0),
    },
    "run": {
        "seed": (int, 0),
        "replicas": (int, 100),
        "outputs": (str, "csv"),    # csv | binary | none
        "keep_paths": (int, 2),
    },
}

_KERNEL_R_BY_D = {1: 40, 2: 8, 3: 4}
_KERNEL_RL_BY_D = {1: 60, 2: 28, 3: 20}
_KERNEL_M_BY_D = {1: 4096, 2: 256, 3: 80}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration; every field concrete, defaults echoed."""

    sections: dict

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def to_dict(self) -> dict:
        return {s: dict(kv) for s, kv in self.sections.items()}

    # -- builders ----------------------------------------------------------
    def lattice_shape(self) -> LatticeShape:
        return LatticeShape(d=self["lattice"]["d"], n=self["lattice"]["n"])

    def time_grid(self) -> TimeGrid:
        return TimeGrid.from_spec(self["time"]["T"], self["time"]["dt"])

    def kernel_family(self, with_lambda: bool = True) -> KernelFamily:
        k = self["kernel"]
        fam = build_kappa(
            d=self["lattice"]["d"], family=k["family"], rho=k["rho"], scale=k["scale"], R=k["R"]
        )
        if with_lambda:
            fam = build_lambda(fam, M=k["M"], R_lambda=k["R_lambda"])
        return fam

    def noise_spec(self) -> NoiseSpec:
        nz = self["noise"]
        return NoiseSpec(
            family=nz["family"],
            rho_a=nz["rho_a"],
            sigma2=nz["sigma2"],
            time_profile=nz["time_profile"],
            profile_amp=nz["profile_amp"],
        )

    def noise_model(self) -> SpectralNoiseModel:
        return build_spectral_model(self.noise_spec(), self.lattice_shape(), self.time_grid())

    def fhn_params(self) -> FhnParams:
        f = self["fhn"]
        return FhnParams(a_fr=f["a_fr"], c_fr=f["c_fr"], f1=f["f1"], f2=f["f2"])

    def learning_params(self) -> LearningParams:
        l = self["learning"]
        return LearningParams(
            J_bar0=l["J_bar0"],
            rho_J=l["rho_J"],
            R_J=l["R_J"],
            J_corr=l["J_corr"],
            J_dec=l["J_dec"],
            v_fn=l["v_fn"],
            j_ini_frac=l["j_ini_frac"],
        )

    def with_overrides(self, **section_updates: Mapping[str, Any]) -> "RunConfig":
        """New config with per-section key updates, re-validated."""
        merged = self.to_dict()
        meta = merged.pop("meta", None)
        for section, kv in section_updates.items():
            if kv:
                merged.setdefault(section, {}).update(kv)
        cfg = resolve_config(merged)
        if meta is not None:
            cfg.sections["meta"] = meta
        return cfg


def _convert(section: str, key: str, raw: Any, typ: type) -> Any:
    if isinstance(raw, str):
        text = raw.strip()
        try:
            if typ is int:
                return int(text)
            if typ is float:
                return float(text)
            return text
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {typ.__name__}") from None
    if typ is float and isinstance(raw, (int, float)):
        return float(raw)
    if typ is int:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid int")
        return raw
    if not isinstance(raw, typ):
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {typ.__name__}")
    return raw


def resolve_config(data: Mapping[str, Mapping[str, Any]]) -> RunConfig:
    """Apply the schema: reject unknown keys, fill defaults, cross-validate."""
    sections: dict[str, dict] = {}
    meta = None
    for section, kv in data.items():
        if section == "meta":
            meta = dict(kv)
            continue
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        spec = SCHEMA[section]
        out = {}
        for key, raw in kv.items():
            if key not in spec:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            out[key] = _convert(section, key, raw, spec[key][0])
        sections[section] = out
    for section, spec in SCHEMA.items():
        out = sections.setdefault(section, {})
        for key, (_, default) in spec.items():
            out.setdefault(key, default)

    d = sections["lattice"]["d"]
    n = sections["lattice"]["n"]
    if d not in (1, 2, 3):
        raise ConfigError(f"[lattice] d must be 1, 2 or 3, got {d}")
    if n < 0:
        raise ConfigError(f"[lattice] n must be >= 0, got {n}")
    k = sections["kernel"]
    if k["R"] == _AUTO:
        k["R"] = _KERNEL_R_BY_D[d]
    if k["R_lambda"] == _AUTO:
        k["R_lambda"] = _KERNEL_RL_BY_D[d]
    if k["M"] == _AUTO:
        k["M"] = _KERNEL_M_BY_D[d]
    l = sections["learning"]
    if l["R_J"] == _AUTO:
        l["R_J"] = min(n, 6)
    if sections["run"]["outputs"] not in ("csv", "binary", "none"):
        raise ConfigError(f"[run] outputs must be csv, binary or none, got {sections['run']['outputs']!r}")
    if sections["run"]["replicas"] < 1:
        raise ConfigError("[run] replicas must be >= 1")
    if sections["run"]["keep_paths"] < 0:
        raise ConfigError("[run] keep_paths must be >= 0")

    cfg = RunConfig(sections=sections)
    _cross_validate(cfg)
    if meta is not None:
        cfg.sections["meta"] = meta
    return cfg


def _cross_validate(cfg: RunConfig) -> None:
    cfg.time_grid()  # dt divides T within 1e-12
    shape = cfg.lattice_shape()
    try:
        fhn = cfg.fhn_params()
        learning = cfg.learning_params()
    except ConfigError:
        raise
    if learning.R_J > shape.n:
        raise ConfigError(
            f"[learning] R_J = {learning.R_J} exceeds the torus radius n = {shape.n}"
        )
    cfg.noise_spec().validate()
    kernel = cfg.kernel_family(with_lambda=False)
    validate_interaction_bounds(kernel, learning, fhn, shape.d)
    k = cfg["kernel"]
    if k["R_lambda"] <= k["R"]:
        raise ConfigError(f"[kernel] R_lambda ({k['R_lambda']}) must exceed R ({k['R']})")
    if k["M"] < 4 * k["R_lambda"]:
        raise ConfigError(f"[kernel] M ({k['M']}) must be >= 4 R_lambda ({4 * k['R_lambda']})")


def load_config(path: str | Path) -> RunConfig:
    """Read an INI or JSON config file and resolve it against the schema."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError(f"{path}: JSON config must map section names to objects")
        return resolve_config(data)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (T, R_lambda, J_bar0, ...)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    data = {s: dict(parser.items(s)) for s in parser.sections()}
    return resolve_config(data)


def default_config() -> RunConfig:
    """The reference configuration: every schema default, resolved."""
    return resolve_config({})


def config_to_ini(cfg: RunConfig) -> str:
    lines = []
    for section, kv in cfg.sections.items():
        lines.append(f"[{section}]")
        for key, val in kv.items():
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)
