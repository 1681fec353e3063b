"""Benchmark the compiled statevector kernel against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
The fallback is forced in a subprocess via CHRONOSCOPE_PURE_PYTHON=1 so both
paths run on identical inputs.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def bench(n_qubits: int, repeats: int) -> dict:
    from chronoscope.hamlib import build_ising, evolve
    from chronoscope.kernels import backend_name
    from chronoscope.qcore import StateVector

    H = build_ising(n_qubits, 1.0, 0.01, -0.21)
    rng = np.random.default_rng(0)
    amp = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    state = StateVector.from_amplitudes(amp, normalize=True)
    psum = H.to_pauli_sum()
    vec = state.amplitudes

    psum.apply(vec)  # warm up / compile masks
    t0 = time.perf_counter()
    for _ in range(repeats):
        psum.apply(vec)
    matvec_s = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    evolve(state, H, 0.1, tol=1e-12)
    evolve_s = time.perf_counter() - t0
    return {
        "backend": backend_name(),
        "n_qubits": n_qubits,
        "matvec_us": matvec_s * 1e6,
        "evolve_ms": evolve_s * 1e3,
    }


def main() -> None:
    if os.environ.get("CHRONOSCOPE_BENCH_CHILD"):
        rows = [bench(n, repeats=200) for n in (8, 10, 12, 14)]
        print(json.dumps(rows))
        return
    results = {}
    for label, env_extra in (("compiled", {}), ("fallback", {"CHRONOSCOPE_PURE_PYTHON": "1"})):
        env = dict(os.environ, CHRONOSCOPE_BENCH_CHILD="1", **env_extra)
        out = subprocess.run([sys.executable, __file__], env=env, capture_output=True, text=True)
        results[label] = json.loads(out.stdout)
    print(f"{'n':>4} {'compiled matvec':>16} {'fallback matvec':>16} {'speedup':>8}"
          f" {'compiled evolve':>16} {'fallback evolve':>16}")
    for comp, fall in zip(results["compiled"], results["fallback"]):
        if comp["backend"] == fall["backend"]:
            print("note: compiled extension unavailable; both rows ran the fallback")
        speed = fall["matvec_us"] / comp["matvec_us"]
        print(f"{comp['n_qubits']:>4} {comp['matvec_us']:>13.1f} us {fall['matvec_us']:>13.1f} us "
              f"{speed:>7.2f}x {comp['evolve_ms']:>13.2f} ms {fall['evolve_ms']:>13.2f} ms")


if __name__ == "__main__":
    main()
