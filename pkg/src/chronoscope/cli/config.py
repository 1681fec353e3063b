"""Experiment configuration: JSON schema validation with key-path errors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


class ConfigError(Exception):
    """Invalid configuration; message carries the offending key or line."""


EXPERIMENTS = (
    "ising-fringe",
    "two-arrows",
    "pxp-scars",
    "wavepacket",
    "theorem",
    "qec",
    "sdo",
    "custom",
)

_TOP_KEYS = {
    "experiment": str,
    "n_qubits": int,
    "model": dict,
    "dt": (int, float),
    "n_steps": int,
    "T": (int, float),
    "initial_state": dict,
    "ci_method": dict,
    "seed": int,
    "tolerance": (int, float),
    "output_dir": str,
    "svg": bool,
    "theorem": dict,
    "qec": dict,
    "sdo": dict,
}

_MODEL_KEYS = {"name": str, "J": (int, float), "hx": (int, float), "hz": (int, float)}
_STATE_KEYS = {"kind": str, "bits": str, "center": (int, float), "sigma": (int, float),
               "momentum": (int, float)}
_CI_KEYS = {"kind": str, "samples": int, "seed": int}
_THEOREM_KEYS = {"tau": (int, float), "q": int, "x": int, "x_prime": int}
_QEC_KEYS = {"code": str, "blocks": int, "k": int, "z_l": (int, float), "t": (int, float),
             "h_z": (int, float)}
_SDO_KEYS = {"a_sites": list, "b_sites": list, "t_a": (int, float), "t_b": (int, float)}


@dataclass
class ExperimentConfig:
    experiment: str
    n_qubits: int = 8
    model: dict = field(default_factory=lambda: {"name": "ising", "J": 1.0, "hx": 0.01, "hz": -0.21})
    dt: float = 0.005
    n_steps: int | None = None
    T: float | None = None
    initial_state: dict = field(default_factory=lambda: {"kind": "product", "bits": ""})
    ci_method: dict = field(default_factory=lambda: {"kind": "exact"})
    seed: int = 1234
    tolerance: float = 1e-12
    output_dir: str = "chronoscope-out"
    svg: bool = False
    theorem: dict = field(default_factory=dict)
    qec: dict = field(default_factory=dict)
    sdo: dict = field(default_factory=dict)

    def resolved_steps(self) -> int:
        if self.n_steps is not None:
            return self.n_steps
        if self.T is not None:
            return max(1, round(self.T / self.dt))
        raise ConfigError("one of n_steps or T is required")


def _check_keys(section: dict, allowed: dict, path: str) -> None:
    for key, val in section.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")
        want = allowed[key]
        if not isinstance(val, want):
            raise ConfigError(f"key {path}{key!r} expects {want}, got {type(val).__name__}")


def validate_config(raw: dict[str, Any]) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "")
    if "experiment" not in raw:
        raise ConfigError("missing required key 'experiment'")
    if raw["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {raw['experiment']!r}")
    for name, allowed in (("model", _MODEL_KEYS), ("initial_state", _STATE_KEYS),
                          ("ci_method", _CI_KEYS), ("theorem", _THEOREM_KEYS),
                          ("qec", _QEC_KEYS), ("sdo", _SDO_KEYS)):
        if name in raw:
            _check_keys(raw[name], allowed, f"{name}.")
    cfg = ExperimentConfig(**raw)
    if cfg.n_qubits < 2 or cfg.n_qubits > 24:
        raise ConfigError("n_qubits must lie in [2, 24]")
    if cfg.dt <= 0:
        raise ConfigError("dt must be positive")
    if not 1e-14 < cfg.tolerance < 1e-4:
        raise ConfigError("tolerance must lie in (1e-14, 1e-4)")
    if cfg.ci_method.get("kind", "exact") not in ("exact", "monte-carlo"):
        raise ConfigError("ci_method.kind must be 'exact' or 'monte-carlo'")
    return cfg


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
