"""chronoscope command line: configuration-driven experiment runner.

Exit codes: 0 success, 2 configuration error, 3 compute error.
"""

from __future__ import annotations

import argparse
import json
import sys

from chronoscope.cli.config import EXPERIMENTS, ConfigError, load_config_file, validate_config
from chronoscope.cli.experiments import RunOutputs, build_initial_state, build_model, run
from chronoscope.qcore import ChronoscopeError

FIELD_EXPERIMENTS = ("ising-fringe", "two-arrows", "pxp-scars", "wavepacket", "custom")


def _base_parser(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--n", type=int, dest="n_qubits", help="number of qubits")
    sub.add_argument("--T", type=float, dest="T", help="total evolution time")
    sub.add_argument("--dt", type=float, help="time step")
    sub.add_argument("--steps", type=int, dest="n_steps", help="number of steps")
    sub.add_argument("--seed", type=int, help="random seed")
    sub.add_argument("--tol", type=float, dest="tolerance", help="evolution tolerance")
    sub.add_argument("--out", dest="output_dir", help="output directory")
    sub.add_argument("--svg", action="store_true", default=None, help="emit SVG rendering")


def _gather(args: argparse.Namespace, forced: dict) -> dict:
    raw = load_config_file(args.config) if args.config else {}
    for key in ("n_qubits", "T", "dt", "n_steps", "seed", "tolerance", "output_dir", "svg"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    raw.update(forced)
    return raw


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="chronoscope")
    subs = parser.add_subparsers(dest="command", required=True)

    p_evolve = subs.add_parser("evolve", help="evolve a product state and write the result")
    _base_parser(p_evolve)
    p_evolve.add_argument("--t", type=float, default=0.5, help="evolution time")
    p_evolve.add_argument("--bits", default="", help="initial computational bitstring")

    p_ci = subs.add_parser("ci", help="causal influence between two sites")
    _base_parser(p_ci)
    p_ci.add_argument("--site-a", type=int, required=True)
    p_ci.add_argument("--site-b", type=int, required=True)
    p_ci.add_argument("--t", type=float, required=True, help="signed evolution time")

    p_field = subs.add_parser("aot-field", help="arrow-of-time vectorfield experiments")
    _base_parser(p_field)
    p_field.add_argument("--experiment", choices=FIELD_EXPERIMENTS, default=None)

    p_thm = subs.add_parser("theorem-check", help="engineered acausal-state check")
    _base_parser(p_thm)
    p_thm.add_argument("--tau", type=float, default=None)

    p_qec = subs.add_parser("qec", help="error-corrected causal influence values")
    _base_parser(p_qec)
    p_qec.add_argument("--code", choices=("five-qubit", "repetition", "iceberg"), default=None)

    p_sdo = subs.add_parser("sdo", help="superdensity-operator correlator table")
    _base_parser(p_sdo)

    subs.add_parser("list-experiments", help="list known experiment names")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ChronoscopeError, ValueError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 3


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(name)
        return 0

    if args.command == "evolve":
        raw = _gather(args, {"experiment": "custom"})
        if args.bits:
            raw.setdefault("initial_state", {})["kind"] = "product"
            raw["initial_state"]["bits"] = args.bits
        cfg = validate_config(raw)
        H = build_model(cfg)
        psi0 = build_initial_state(cfg, H)
        from chronoscope.hamlib import evolve

        res = evolve(psi0, H, args.t, cfg.tolerance)
        out = RunOutputs(cfg.output_dir)
        payload = {
            "t": args.t,
            "residual_estimate": res.residual_estimate,
            "amplitudes": [[float(a.real), float(a.imag)] for a in res.state.amplitudes],
        }
        with open(out.path("state.json"), "w") as fh:
            json.dump(payload, fh, sort_keys=True)
        print(f"evolved to t={args.t}: residual {res.residual_estimate:.2e}")
        return 0

    if args.command == "ci":
        raw = _gather(args, {"experiment": "custom"})
        cfg = validate_config(raw)
        H = build_model(cfg)
        psi0 = build_initial_state(cfg, H)
        from chronoscope.causal import ci_exact, ci_monte_carlo

        if cfg.ci_method.get("kind", "exact") == "monte-carlo":
            v = ci_monte_carlo(psi0, H, (args.site_a,), (args.site_b,), args.t,
                               cfg.ci_method.get("samples", 10000),
                               cfg.ci_method.get("seed", cfg.seed))
            print(f"CI[{args.site_a}->{args.site_b}](t={args.t}) = {v.value:.6e} +- {v.stderr:.1e}")
        else:
            v = ci_exact(psi0, H, args.site_a, args.site_b, args.t, tol=cfg.tolerance)
            print(f"CI[{args.site_a}->{args.site_b}](t={args.t}) = {v.value:.6e}")
        return 0

    raw = _gather(args, {})
    if args.command == "aot-field":
        if args.experiment:
            raw["experiment"] = args.experiment
        elif "experiment" not in raw:
            raw["experiment"] = "ising-fringe"
        elif raw["experiment"] not in FIELD_EXPERIMENTS:
            raise ConfigError(
                f"config experiment {raw['experiment']!r} is not a field experiment"
            )
        if raw["experiment"] == "pxp-scars":
            raw.setdefault("model", {"name": "pxp"})
    else:
        wanted = {"theorem-check": "theorem", "qec": "qec", "sdo": "sdo"}[args.command]
        if raw.get("experiment", wanted) != wanted:
            raise ConfigError(
                f"config experiment {raw['experiment']!r} conflicts with the "
                f"{args.command} subcommand"
            )
        raw["experiment"] = wanted
        if args.command == "theorem-check" and args.tau is not None:
            raw.setdefault("theorem", {})["tau"] = args.tau
        if args.command == "qec" and args.code:
            raw.setdefault("qec", {})["code"] = args.code
    cfg = validate_config(raw)
    result = run(cfg)
    del result
    print(f"wrote artifacts to {cfg.output_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
