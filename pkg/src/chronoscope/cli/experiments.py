"""Experiment runners: build the paper-style scenarios at desk scale and emit
machine-readable artifacts (field JSON, entropy CSV, optional SVG, manifest).
"""

from __future__ import annotations

import itertools
import json
import os
import platform
import time

import numpy as np

import chronoscope
from chronoscope.acausal import build_ising_acausal_state, build_ising_single_branch, theorem_check
from chronoscope.aot import SpacetimeLattice, aot_field
from chronoscope.causal import ci_exact
from chronoscope.cli.config import ConfigError, ExperimentConfig
from chronoscope.cli.svg import render_field_svg
from chronoscope.hamlib import HamiltonianSpec, build_ising, build_pxp, evolve
from chronoscope.qcore import StateVector
from chronoscope.qec import (
    boxed_ci_ll,
    boxed_phys_anc,
    boxed_rep_phys_anc,
    boxed_rep_phys_logical,
    ci_phys_anc,
    eci_exact,
    five_qubit_code,
    iceberg_self_influence,
    rep_code_ci,
)
from chronoscope.sdo import sdo_build, sdo_correlator


def build_model(cfg: ExperimentConfig) -> HamiltonianSpec:
    m = cfg.model
    name = m.get("name", "ising")
    if name == "ising":
        return build_ising(cfg.n_qubits, m.get("J", 1.0), m.get("hx", 0.01), m.get("hz", -0.21))
    if name == "pxp":
        return build_pxp(cfg.n_qubits)
    raise ConfigError(f"unknown model {name!r}")


def _product_bits(cfg: ExperimentConfig) -> str:
    bits = cfg.initial_state.get("bits", "")
    return bits if bits else "0" * cfg.n_qubits


def _wavepacket(cfg: ExperimentConfig) -> StateVector:
    """Momentum-filtered single-magnon Gaussian; a reconstruction, recorded in
    the manifest (the source gives no explicit preparation)."""
    n = cfg.n_qubits
    center = cfg.initial_state.get("center", (n - 1) / 2.0)
    sigma = cfg.initial_state.get("sigma", 1.2)
    k = cfg.initial_state.get("momentum", -np.pi / 2)
    amp = np.zeros(1 << n, dtype=np.complex128)
    for j in range(n):
        weight = np.exp(1j * k * j - (j - center) ** 2 / (4 * sigma**2))
        amp[1 << (n - 1 - j)] = weight
    return StateVector.from_amplitudes(amp, normalize=True)


def build_initial_state(cfg: ExperimentConfig, H: HamiltonianSpec) -> StateVector:
    kind = cfg.initial_state.get("kind", "product")
    n = cfg.n_qubits
    if cfg.experiment == "ising-fringe":
        kind = "backward-evolved"
    elif cfg.experiment == "two-arrows":
        kind = "two-sided"
    elif cfg.experiment == "pxp-scars":
        kind = "neel"
    elif cfg.experiment == "wavepacket":
        kind = "wavepacket"
    if kind == "product":
        return StateVector.computational(n, _product_bits(cfg))
    if kind == "neel":
        return StateVector.computational(n, "01" * (n // 2) + "0" * (n % 2))
    if kind == "backward-evolved":
        T = (cfg.T if cfg.T is not None else cfg.resolved_steps() * cfg.dt)
        prod = StateVector.computational(n, _product_bits(cfg))
        return evolve(prod, H, -T / 2.0, cfg.tolerance).state
    if kind == "two-sided":
        T = (cfg.T if cfg.T is not None else cfg.resolved_steps() * cfg.dt)
        half = n // 2
        m = cfg.model
        h_left = build_ising(half, m.get("J", 1.0), m.get("hx", 0.01), m.get("hz", -0.21))
        h_right = build_ising(n - half, m.get("J", 1.0), m.get("hx", 0.01), m.get("hz", -0.21))
        left = evolve(StateVector.computational(half, 0), h_left, +T / 2.0, cfg.tolerance).state
        right = evolve(StateVector.computational(n - half, 0), h_right, -T / 2.0, cfg.tolerance).state
        return left.tensor(right)
    if kind == "wavepacket":
        return _wavepacket(cfg)
    raise ConfigError(f"unknown initial_state.kind {kind!r}")


class RunOutputs:
    """Tracks written artifact files so failures can remove partial output."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[str] = []
        self.created_dir = not os.path.isdir(out_dir)
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.files.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.files:
            if os.path.exists(p):
                os.remove(p)
        if self.created_dir and os.path.isdir(self.out_dir) and not os.listdir(self.out_dir):
            os.rmdir(self.out_dir)


def _write_json(path: str, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(cfg: ExperimentConfig, extra: dict, started: float) -> dict:
    return {
        "chronoscope_version": chronoscope.__version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "config": {
            "experiment": cfg.experiment,
            "n_qubits": cfg.n_qubits,
            "model": cfg.model,
            "dt": cfg.dt,
            "n_steps": cfg.n_steps,
            "T": cfg.T,
            "seed": cfg.seed,
            "tolerance": cfg.tolerance,
            "ci_method": cfg.ci_method,
        },
        "tolerances": {"evolution": cfg.tolerance},
        "seeds": {"config": cfg.seed, **extra.pop("seeds", {})},
        "desk_scale_note": "full-scale 20-100 qubit figures replaced by <=14-qubit equivalents",
        "wall_time_s": round(time.time() - started, 3),
        **extra,
    }


def run_field_experiment(cfg: ExperimentConfig, out: RunOutputs) -> dict:
    started = time.time()
    H = build_model(cfg)
    psi0 = build_initial_state(cfg, H)
    lattice = SpacetimeLattice.build(psi0, H, cfg.dt, cfg.resolved_steps(), tol=cfg.tolerance)
    field = aot_field(lattice)
    points = []
    for row in field.vectors:
        for v in row:
            points.append({
                "t": v.t_index * cfg.dt,
                "x": float(v.x_index),
                "v_t": v.v_t,
                "v_x": v.v_x,
                "contributions": [
                    {"t_index": c.t_index, "x_index": c.x_index, "ci": c.ci,
                     "v_t": c.v_t, "v_x": c.v_x}
                    for c in v.contributions
                ],
            })
    _write_json(out.path("field.json"), {
        "experiment": cfg.experiment,
        "dt": cfg.dt,
        "dx": 1.0,
        "n_sites": cfg.n_qubits,
        "n_slices": lattice.n_slices,
        "points": points,
    })
    with open(out.path("entropy.csv"), "w") as fh:
        fh.write("t,x,von_neumann,renyi2\n")
        for k in range(lattice.n_slices):
            for x in range(cfg.n_qubits):
                fh.write(f"{float(k * cfg.dt)!r},{x},{float(field.entropy.von_neumann[k, x])!r},"
                         f"{float(field.entropy.renyi2[k, x])!r}\n")
    extra: dict = {}
    if cfg.svg:
        v_t = np.array([[v.v_t for v in row] for row in field.vectors])
        v_x = np.array([[v.v_x for v in row] for row in field.vectors])
        text, scale = render_field_svg(field.entropy.von_neumann, v_t, v_x)
        with open(out.path("field.svg"), "w") as fh:
            fh.write(text)
        extra["svg_scale_px_per_unit"] = scale
    if cfg.experiment == "wavepacket":
        extra["initial_state_note"] = "momentum-filtered single-magnon Gaussian (reconstruction)"
    manifest = _manifest(cfg, extra, started)
    _write_json(out.path("manifest.json"), manifest)
    return {"field": field, "manifest": manifest}


def run_theorem_experiment(cfg: ExperimentConfig, out: RunOutputs) -> dict:
    started = time.time()
    params = cfg.theorem
    n = cfg.n_qubits
    tau = params.get("tau", 0.3)
    q = params.get("q", n // 2 - 1)
    x = params.get("x", n // 2)
    xp = params.get("x_prime", 2 * x - q)
    H = build_ising(n, 1.0, 0.0, 0.0)
    state = build_ising_acausal_state(n, tau, q, x, xp)
    report = theorem_check(state, q, x, H, tau)
    ci = ci_exact(state, H, q, x, tau)
    branches = {}
    for b in (1, 2):
        sb = build_ising_single_branch(n, tau, q, x, xp, b)
        branches[f"branch_{b}"] = {
            "ci": ci_exact(sb, H, q, x, tau).value,
            "verdict": theorem_check(sb, q, x, H, tau).verdict,
        }
    payload = {
        "engineered_state": {
            "verdict": report.verdict,
            "max_residual": report.max_residual,
            "degenerate": report.degenerate,
            "basis_residual_max": list(report.basis_residual_max),
            "ci": ci.value,
        },
        "single_branches": branches,
        "geometry": {"q": q, "x": x, "x_prime": xp, "tau": tau, "n": n},
    }
    _write_json(out.path("theorem.json"), payload)
    _write_json(out.path("manifest.json"), _manifest(cfg, {}, started))
    return payload


def run_qec_experiment(cfg: ExperimentConfig, out: RunOutputs) -> dict:
    started = time.time()
    params = cfg.qec
    name = params.get("code", "five-qubit")
    payload: dict = {"code": name}
    if name == "five-qubit":
        blocks = params.get("blocks", 1)
        code = five_qubit_code(blocks)
        psi = code.logical_state(np.eye(1 << blocks)[0])
        d = 1 << blocks
        payload["ci_ll"] = {
            "computed": eci_exact(code, psi, ("logical",), ("logical",)).value,
            "boxed": boxed_ci_ll(d),
        }
        if blocks == 1:
            payload["phys_logical"] = eci_exact(code, psi, ("physical", 0), ("logical",)).value
            payload["phys_anc_pre"] = {
                "computed": ci_phys_anc(code, psi, measured=False).value,
                "boxed": boxed_phys_anc(code.n_syndromes, False),
            }
            payload["phys_anc_post"] = {
                "computed": ci_phys_anc(code, psi, measured=True).value,
                "boxed": boxed_phys_anc(code.n_syndromes, True),
            }
    elif name == "repetition":
        z_l = params.get("z_l", 0.0)
        alpha = np.sqrt((1 + z_l) / 2)
        beta = np.sqrt((1 - z_l) / 2)
        res = rep_code_ci(alpha, beta)
        payload["phys_logical"] = {"computed": res["phys_logical"].value,
                                   "boxed": boxed_rep_phys_logical(z_l)}
        payload["phys_anc_pre"] = {"computed": res["phys_anc_pre"].value,
                                   "boxed": boxed_rep_phys_anc(z_l, 4, False)}
        payload["phys_anc_post"] = {"computed": res["phys_anc_post"].value,
                                    "boxed": boxed_rep_phys_anc(z_l, 4, True)}
    elif name == "iceberg":
        k = params.get("k", 2)
        t = params.get("t", 0.1)
        h_z = params.get("h_z", 0.5)
        payload["self_influence_no_field"] = iceberg_self_influence(k, t, False).value
        payload["self_influence_with_field"] = iceberg_self_influence(k, t, True, h_z).value
    else:
        raise ConfigError(f"unknown qec code {name!r} (named builders only)")
    _write_json(out.path("qec.json"), payload)
    _write_json(out.path("manifest.json"), _manifest(cfg, {}, started))
    return payload


def run_sdo_experiment(cfg: ExperimentConfig, out: RunOutputs) -> dict:
    started = time.time()
    params = cfg.sdo
    a_sites = tuple(params.get("a_sites", [0]))
    b_sites = tuple(params.get("b_sites", [cfg.n_qubits - 1]))
    t_a = params.get("t_a", 0.0)
    t_b = params.get("t_b", 0.3)
    H = build_model(cfg)
    psi0 = build_initial_state(cfg, H)
    sdo = sdo_build(psi0, H, a_sites, t_a, b_sites, t_b, tol=cfg.tolerance)
    table = []
    for oa in itertools.product("IXYZ", repeat=len(a_sites)):
        for ob in itertools.product("IXYZ", repeat=len(b_sites)):
            val = sdo_correlator(sdo, "".join(oa), "".join(ob))
            table.append({"o_a": "".join(oa), "o_b": "".join(ob),
                          "re": val.real, "im": val.imag})
    evals = np.linalg.eigvalsh(sdo.matrix)
    payload = {
        "a_sites": list(a_sites), "b_sites": list(b_sites),
        "t_a": t_a, "t_b": t_b,
        "trace": float(np.real(np.trace(sdo.matrix))),
        "min_eigenvalue": float(evals.min()),
        "correlators": table,
    }
    _write_json(out.path("sdo.json"), payload)
    _write_json(out.path("manifest.json"), _manifest(cfg, {}, started))
    return payload


def run(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Dispatch an experiment; on compute failure partial outputs are removed."""
    out = RunOutputs(out_dir or cfg.output_dir)
    try:
        if cfg.experiment in ("ising-fringe", "two-arrows", "pxp-scars", "wavepacket", "custom"):
            return run_field_experiment(cfg, out)
        if cfg.experiment == "theorem":
            return run_theorem_experiment(cfg, out)
        if cfg.experiment == "qec":
            return run_qec_experiment(cfg, out)
        if cfg.experiment == "sdo":
            return run_sdo_experiment(cfg, out)
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    except ConfigError:
        out.cleanup()
        raise
    except Exception:
        out.cleanup()
        raise
