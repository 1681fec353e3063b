"""Complex linear-algebra substrate: statevectors, dense subsystem operators,
partial traces, Schmidt splits, entropies, and the normalized operator inner
product.

Conventions
-----------
Site 0 is the most significant bit of the amplitude index: a state on n qubits
reshaped to shape (2,)*n has axis j addressing lattice site j. All objects are
immutable after construction and every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from chronoscope.pauli import SIGMA

NORM_ATOL = 1e-12
SCHMIDT_DEGENERACY_TOL = 1e-12


class ChronoscopeError(Exception):
    """Base class for package errors."""


@dataclass(frozen=True)
class StateVector:
    """Pure state of an n-qubit lattice."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude length {amp.shape} does not match 2^{self.n_qubits}"
            )
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amp = np.asarray(amplitudes, dtype=np.complex128)
        n = int(round(np.log2(amp.size)))
        if 1 << n != amp.size:
            raise ValueError("amplitude length is not a power of two")
        if normalize:
            amp = amp / np.linalg.norm(amp)
        return cls(n, amp)

    @classmethod
    def computational(cls, n_qubits: int, bits: str | int = 0) -> "StateVector":
        """Basis state |bits>, bits given as a bitstring ('0101') or an index."""
        if isinstance(bits, str):
            if len(bits) != n_qubits:
                raise ValueError("bitstring length mismatch")
            index = int(bits, 2)
        else:
            index = bits
        amp = np.zeros(1 << n_qubits, dtype=np.complex128)
        amp[index] = 1.0
        return cls(n_qubits, amp)

    @classmethod
    def product(cls, single_qubit_states) -> "StateVector":
        """Tensor product of per-site single-qubit states (length-2 arrays)."""
        amp = np.array([1.0 + 0j])
        for s in single_qubit_states:
            s = np.asarray(s, dtype=np.complex128)
            amp = np.kron(amp, s / np.linalg.norm(s))
        return cls.from_amplitudes(amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_normalized(self, atol: float = NORM_ATOL) -> None:
        if abs(self.norm - 1.0) > atol:
            raise ChronoscopeError(f"state norm {self.norm} deviates from 1 beyond {atol}")

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(
            self.n_qubits + other.n_qubits,
            np.kron(self.amplitudes, other.amplitudes),
        )


@dataclass(frozen=True)
class DenseOperator:
    """Dense operator on an explicit ordered list of sites."""

    support: tuple[int, ...]
    matrix: np.ndarray
    hermitian: bool | None = None
    unitary: bool | None = None

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        dim = 1 << len(self.support)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match 2^{len(self.support)}")
        if len(set(self.support)) != len(self.support):
            raise ValueError("duplicate sites in support")
        if self.hermitian:
            if np.linalg.norm(mat - mat.conj().T) > NORM_ATOL * max(1.0, np.linalg.norm(mat)):
                raise ValueError("operator flagged hermitian is not")
        if self.unitary:
            if np.linalg.norm(mat.conj().T @ mat - np.eye(dim)) > 1e-12 * dim:
                raise ValueError("operator flagged unitary is not")
        mat.flags.writeable = False
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return 1 << len(self.support)


@dataclass(frozen=True)
class SchmidtPair:
    """Rank-<=2 Schmidt decomposition of a pure state across one site q.

    state = sqrt(p1)|psi1>_q|phi1>_{q^c} + sqrt(p2)|psi2>_q|phi2>_{q^c},
    weights sorted descending.
    """

    q_site: int
    weights: tuple[float, float]
    local_vectors: np.ndarray       # shape (2, 2), columns |psi_k>
    complement_vectors: np.ndarray  # shape (2, 2^{n-1}), rows |phi_k>
    degenerate: bool = field(default=False)

    @property
    def p1(self) -> float:
        return self.weights[0]

    @property
    def p2(self) -> float:
        return self.weights[1]


def _move_sites_front(amp: np.ndarray, n: int, sites: tuple[int, ...]) -> np.ndarray:
    rest = [i for i in range(n) if i not in sites]
    t = amp.reshape([2] * n).transpose(list(sites) + rest)
    return t.reshape(1 << len(sites), -1)


def partial_trace(state: StateVector, keep) -> DenseOperator:
    """Reduced density matrix of a pure state on the `keep` sites (in the given order)."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep must be nonempty")
    if len(set(keep)) != len(keep):
        raise ValueError("duplicate sites in keep")
    for s in keep:
        if not 0 <= s < state.n_qubits:
            raise ValueError(f"site {s} out of range")
    m = _move_sites_front(state.amplitudes, state.n_qubits, keep)
    rho = m @ m.conj().T
    return DenseOperator(keep, rho)


def partial_trace_matrix(mat: np.ndarray, n: int, keep: tuple[int, ...]) -> np.ndarray:
    """Partial trace of a dense n-site operator, keeping `keep` (in the given order)."""
    keep = tuple(keep)
    rest = [i for i in range(n) if i not in keep]
    perm = list(keep) + rest
    t = mat.reshape([2] * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    dk, dr = 1 << len(keep), 1 << len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("arbr->ab", t)


def schmidt_split(state: StateVector, q: int) -> SchmidtPair:
    """Schmidt decomposition across the cut {q} | rest (rank <= 2 since q is a qubit)."""
    state.check_normalized(1e-10)
    if not 0 <= q < state.n_qubits:
        raise ValueError(f"site {q} out of range")
    m = _move_sites_front(state.amplitudes, state.n_qubits, (q,))
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    p = s**2
    p1, p2 = float(p[0]), float(p[1]) if p.size > 1 else 0.0
    if p2 < SCHMIDT_DEGENERACY_TOL:
        p2 = max(p2, 0.0)
    degenerate = abs(p1 - p2) < 1e-9
    local = u  # columns
    comp = vh  # rows
    return SchmidtPair(q, (p1, p2), local, comp, degenerate)


def schmidt_reconstruct(pair: SchmidtPair, n_qubits: int) -> StateVector:
    """Rebuild the global state from a SchmidtPair (used by the invariant tests)."""
    m = np.zeros((2, 1 << (n_qubits - 1)), dtype=complex)
    for k in range(2):
        m += np.sqrt(pair.weights[k]) * np.outer(pair.local_vectors[:, k], pair.complement_vectors[k])
    rest = [i for i in range(n_qubits) if i != pair.q_site]
    inv = np.argsort([pair.q_site] + rest)
    amp = m.reshape([2] * n_qubits).transpose(inv).reshape(-1)
    return StateVector(n_qubits, amp)


def purity(rho: DenseOperator | np.ndarray) -> float:
    mat = rho.matrix if isinstance(rho, DenseOperator) else rho
    return float(np.real(np.trace(mat @ mat)))


def renyi2_entropy(rho: DenseOperator | np.ndarray) -> float:
    """Second Renyi entropy -log tr(rho^2); requires unit trace within 1e-8."""
    mat = rho.matrix if isinstance(rho, DenseOperator) else rho
    tr = np.real(np.trace(mat))
    if abs(tr - 1.0) > 1e-8:
        raise ChronoscopeError(f"density matrix trace {tr} deviates from 1")
    return float(-np.log(purity(mat)))


def von_neumann_entropy(rho: DenseOperator | np.ndarray) -> float:
    mat = rho.matrix if isinstance(rho, DenseOperator) else rho
    evals = np.linalg.eigvalsh(mat)
    evals = evals[evals > 1e-14]
    return float(-np.sum(evals * np.log(evals)))


def hs_inner(a: DenseOperator | np.ndarray, b: DenseOperator | np.ndarray) -> complex:
    """Normalized Hilbert-Schmidt inner product (A|B) = tr(A^dag B)/d."""
    ma = a.matrix if isinstance(a, DenseOperator) else a
    mb = b.matrix if isinstance(b, DenseOperator) else b
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch {ma.shape} vs {mb.shape}")
    return complex(np.trace(ma.conj().T @ mb) / ma.shape[0])


def pad_identity(op: DenseOperator, n_qubits: int) -> np.ndarray:
    """Embed a subsystem operator into the full n-qubit space (identity elsewhere)."""
    rest = [i for i in range(n_qubits) if i not in op.support]
    full = np.kron(op.matrix, np.eye(1 << len(rest)))
    order = list(op.support) + rest
    inv = np.argsort(order)
    t = full.reshape([2] * (2 * n_qubits))
    t = t.transpose(list(inv) + [n_qubits + i for i in inv])
    return t.reshape(1 << n_qubits, 1 << n_qubits)


def apply_site_matrix(amp: np.ndarray, mat2: np.ndarray, site: int, n: int) -> np.ndarray:
    """Apply a single-qubit matrix at `site` to a flat amplitude array."""
    t = np.moveaxis(amp.reshape([2] * n), site, 0)
    out = np.tensordot(mat2, t, axes=([1], [0]))
    return np.moveaxis(out, 0, site).reshape(-1)


def apply_region_matrix(amp: np.ndarray, mat: np.ndarray, sites: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix on the ordered `sites` of a flat amplitude array."""
    k = len(sites)
    t = amp.reshape([2] * n)
    t = np.moveaxis(t, sites, range(k)).reshape(1 << k, -1)
    t = (mat @ t).reshape([2] * n)
    return np.moveaxis(t, range(k), sites).reshape(-1)


def apply_pauli_letter(amp: np.ndarray, letter: str, site: int, n: int) -> np.ndarray:
    return apply_site_matrix(amp, SIGMA[letter], site, n)
