import numpy as np
import pytest

from chronoscope.qcore import StateVector


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_state(rng, n: int) -> StateVector:
    amp = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector.from_amplitudes(amp, normalize=True)


def random_real_state(rng, n: int) -> StateVector:
    amp = rng.normal(size=1 << n)
    return StateVector.from_amplitudes(amp, normalize=True)


def brute_force_partial_trace(state: StateVector, keep: tuple[int, ...]) -> np.ndarray:
    """Index-loop oracle for the reduced density matrix (independent of qcore)."""
    n = state.n_qubits
    rest = [i for i in range(n) if i not in keep]
    dk, dr = 1 << len(keep), 1 << len(rest)
    rho = np.zeros((dk, dk), dtype=complex)
    amp = state.amplitudes

    def index(keep_bits, rest_bits):
        bits = [0] * n
        for pos, site in enumerate(keep):
            bits[site] = (keep_bits >> (len(keep) - 1 - pos)) & 1
        for pos, site in enumerate(rest):
            bits[site] = (rest_bits >> (len(rest) - 1 - pos)) & 1
        out = 0
        for b in bits:
            out = (out << 1) | b
        return out

    for a in range(dk):
        for b in range(dk):
            for r in range(dr):
                rho[a, b] += amp[index(a, r)] * np.conj(amp[index(b, r)])
    return rho


def pauli_coefficients(mat: np.ndarray, n: int) -> np.ndarray:
    """Coefficients c[i1..in] with mat = sum c * sigma^{i1} x ... (oracle helper)."""
    sig = np.array([
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ], dtype=complex)
    t = mat.reshape([2] * (2 * n))
    # move to per-site (row, col) pairs
    order = []
    for i in range(n):
        order += [i, n + i]
    t = t.transpose(order).reshape([4] * n)
    # c_a = tr(sigma^a m)/2 = sum_{r,c} sigma^a[c,r] m[r,c] / 2 per site
    basis = np.array([s.T.reshape(4) for s in sig]) / 2.0
    for axis in range(n):
        t = np.tensordot(basis, t, axes=([1], [axis]))
        t = np.moveaxis(t, 0, axis)
    return t
