"""Superdensity operator of two spacetime regions, built by the ancilla
coupling protocol: all ancillas start in |+>, each region qubit is coupled to
one CX-control ancilla and one CZ-control ancilla at its region's time, and
the reduced ancilla density matrix then encodes every two-time Pauli
correlator of the regions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chronoscope.hamlib import HamiltonianSpec, evolve_amp
from chronoscope.pauli import PauliString
from chronoscope.qcore import ChronoscopeError, StateVector, partial_trace

ANCILLA_BUDGET = 4  # max n + m region qubits


@dataclass(frozen=True)
class SuperdensityOperator:
    a_sites: tuple[int, ...]
    b_sites: tuple[int, ...]
    t_a: float
    t_b: float
    matrix: np.ndarray  # ancilla density matrix, dim 4^(n+m)

    @property
    def ancilla_count(self) -> int:
        return 2 * (len(self.a_sites) + len(self.b_sites))


def _controlled_pauli(amp: np.ndarray, n_total: int, control: int, target: int, letter: str) -> np.ndarray:
    """Apply control-(X or Z) with the ancilla as control, in place on a copy."""
    t = amp.reshape([2] * n_total).copy()
    sl = [slice(None)] * n_total
    sl[control] = 1
    sub = t[tuple(sl)]
    # within the control=1 block, target axis index shifts down by one when
    # the target site comes after the control -- it never does here since
    # ancillas are appended after all system sites
    tgt_axis = target if target < control else target - 1
    if letter == "X":
        t[tuple(sl)] = np.flip(sub, axis=tgt_axis)
    elif letter == "Z":
        sl2 = [slice(None)] * (n_total - 1)
        sl2[tgt_axis] = 1
        sub[tuple(sl2)] *= -1.0
        t[tuple(sl)] = sub
    else:
        raise ValueError(letter)
    return t.reshape(-1)


def sdo_build(state: StateVector, H: HamiltonianSpec, a_sites, t_a: float,
              b_sites, t_b: float, tol: float = 1e-12,
              interleaved: bool = False) -> SuperdensityOperator:
    """Run the coupling protocol and return the ancilla density matrix.

    Ancilla register order: [A CX-controls, A CZ-controls, B CX-controls,
    B CZ-controls], appended after the system sites. `interleaved` couples
    each qubit's CX and CZ back to back instead of in two rounds (the gates
    on distinct qubits commute, so the result is identical).
    """
    a_sites, b_sites = tuple(a_sites), tuple(b_sites)
    if t_a == t_b and set(a_sites) & set(b_sites):
        raise ChronoscopeError("regions must be disjoint when taken at equal times")
    n_reg = len(a_sites) + len(b_sites)
    if n_reg > ANCILLA_BUDGET:
        raise ChronoscopeError(f"ancilla budget exceeded: {n_reg} > {ANCILLA_BUDGET}")
    n_sys = state.n_qubits
    n_anc = 2 * n_reg
    n_total = n_sys + n_anc

    sys_amp, _ = evolve_amp(state.amplitudes, H, t_a, tol)
    plus = np.full(1 << n_anc, 1.0 / np.sqrt(1 << n_anc), dtype=np.complex128)
    amp = np.kron(sys_amp, plus)

    h_joint = HamiltonianSpec(
        n_total,
        tuple((c, PauliString(s.letters + "I" * n_anc)) for c, s in H.terms),
    )

    def couple(sites, anc_offset):
        nonlocal amp
        nx = len(sites)
        if interleaved:
            for i, s in enumerate(sites):
                amp = _controlled_pauli(amp, n_total, n_sys + anc_offset + i, s, "X")
                amp = _controlled_pauli(amp, n_total, n_sys + anc_offset + nx + i, s, "Z")
        else:
            for i, s in enumerate(sites):
                amp = _controlled_pauli(amp, n_total, n_sys + anc_offset + i, s, "X")
            for i, s in enumerate(sites):
                amp = _controlled_pauli(amp, n_total, n_sys + anc_offset + nx + i, s, "Z")

    couple(a_sites, 0)
    amp, _ = evolve_amp(amp, h_joint, t_b - t_a, tol)
    couple(b_sites, 2 * len(a_sites))

    anc_sites = tuple(range(n_sys, n_total))
    rho = partial_trace(StateVector(n_total, amp), anc_sites).matrix
    return SuperdensityOperator(a_sites, b_sites, t_a, t_b, rho)


_ETA = {"I": 1.0 + 0j, "X": 1.0 + 0j, "Z": 1.0 + 0j, "Y": 1j}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def sdo_correlator(sdo: SuperdensityOperator, o_a: str, o_b: str) -> complex:
    """Extract <O_B(t_B) O_A(t_A)> for Pauli letters per region site.

    o_a / o_b give one letter per site of the A / B region (region order).
    The read-off uses Z^a X^b = eta * sigma with eta = i per Y letter, so one
    matrix element of the ancilla state determines each correlator.
    """
    if len(o_a) != len(sdo.a_sites) or len(o_b) != len(sdo.b_sites):
        raise ValueError("need one Pauli letter per region site")
    for c in o_a + o_b:
        if c not in "IXYZ":
            raise ChronoscopeError(f"unsupported operator letter {c!r}")
    xbits_a = [_BITS[c][0] for c in o_a]
    zbits_a = [_BITS[c][1] for c in o_a]
    xbits_b = [_BITS[c][0] for c in o_b]
    zbits_b = [_BITS[c][1] for c in o_b]
    bits = xbits_a + zbits_a + xbits_b + zbits_b
    row = int("".join(map(str, bits)), 2)
    eta = np.prod([_ETA[c] for c in o_a + o_b])
    dim = sdo.matrix.shape[0]
    return complex(dim * sdo.matrix[row, 0] / eta)


def direct_two_time_correlator(state: StateVector, H: HamiltonianSpec,
                               o_a: PauliString, t_a: float,
                               o_b: PauliString, t_b: float,
                               tol: float = 1e-12) -> complex:
    """<psi| O_B^H(t_b) O_A^H(t_a) |psi> by direct evolution (the SDO oracle)."""
    v, _ = evolve_amp(state.amplitudes, H, t_a, tol)
    w = o_a.apply(v)
    v2, _ = evolve_amp(v, H, t_b - t_a, tol)
    w2, _ = evolve_amp(w, H, t_b - t_a, tol)
    return complex(np.vdot(v2, o_b.apply(w2)))
