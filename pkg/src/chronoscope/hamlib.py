"""Hamiltonian builders and high-accuracy time evolution.

Evolution uses a Lanczos (Krylov-subspace) approximation of exp(-iHt)|psi>
with full reorthogonalization, adaptive subspace size, and time substepping;
a dense eigendecomposition path is provided for small systems and oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from chronoscope.pauli import SIGMA, PauliString, PauliSum
from chronoscope.qcore import ChronoscopeError, StateVector, apply_pauli_letter

MAX_KRYLOV_DIM = 64
MAX_SUBSTEP_DEPTH = 24


class EvolutionError(ChronoscopeError):
    """Raised when the Krylov iteration cannot reach the requested tolerance."""


@dataclass(frozen=True)
class HamiltonianSpec:
    """Hermitian Pauli-sum Hamiltonian: sum_k coeff_k * string_k, coeffs real."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        for coeff, string in self.terms:
            if abs(np.imag(coeff)) > 0:
                raise ValueError("Hamiltonian coefficients must be real")
            if string.n_qubits != self.n_qubits:
                raise ValueError("term support outside the lattice")
        object.__setattr__(self, "terms", tuple(self.terms))

    def to_pauli_sum(self) -> PauliSum:
        cached = getattr(self, "_psum", None)
        if cached is None:
            cached = PauliSum.from_strings(self.n_qubits, [(c, s) for c, s in self.terms])
            object.__setattr__(self, "_psum", cached)
        return cached

    def apply(self, amp: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return self.to_pauli_sum().apply(amp, out)

    def expectation(self, state: StateVector) -> float:
        return float(np.real(self.to_pauli_sum().expectation(state.amplitudes)))

    def to_matrix(self) -> np.ndarray:
        return self.to_pauli_sum().to_matrix()

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm: sum of |coefficients|."""
        return float(sum(abs(c) for c, _ in self.terms))


@dataclass(frozen=True)
class EvolutionResult:
    state: StateVector
    time: float
    residual_estimate: float


def build_ising(n: int, J: float, hx: float, hz: float) -> HamiltonianSpec:
    """J sum X_j X_{j+1} + hx sum X_j + hz sum Z_j, open boundaries."""
    if n < 2:
        raise ValueError("Ising chain needs n >= 2")
    terms: list[tuple[float, PauliString]] = []
    if J != 0.0:
        for j in range(n - 1):
            terms.append((J, PauliString.from_ops(n, {j: "X", j + 1: "X"})))
    if hx != 0.0:
        for j in range(n):
            terms.append((hx, PauliString.from_ops(n, {j: "X"})))
    if hz != 0.0:
        for j in range(n):
            terms.append((hz, PauliString.from_ops(n, {j: "Z"})))
    return HamiltonianSpec(n, tuple(terms))


def build_pxp(n: int) -> HamiltonianSpec:
    """PXP chain sum_i P_{i-1} X_i P_{i+1}, P = (1+Z)/2, one-sided at the edges."""
    if n < 3:
        raise ValueError("PXP chain needs n >= 3")
    terms: list[tuple[float, PauliString]] = []

    def add(coeff, ops):
        terms.append((coeff, PauliString.from_ops(n, ops)))

    # left edge: X_0 P_1
    add(0.5, {0: "X"})
    add(0.5, {0: "X", 1: "Z"})
    # bulk: P_{i-1} X_i P_{i+1} = (X + ZX + XZ + ZXZ)/4
    for i in range(1, n - 1):
        add(0.25, {i: "X"})
        add(0.25, {i - 1: "Z", i: "X"})
        add(0.25, {i: "X", i + 1: "Z"})
        add(0.25, {i - 1: "Z", i: "X", i + 1: "Z"})
    # right edge: P_{n-2} X_{n-1}
    add(0.5, {n - 1: "X"})
    add(0.5, {n - 2: "Z", n - 1: "X"})
    return HamiltonianSpec(n, tuple(terms))


def _lanczos_step(h_apply, v0: np.ndarray, t: float, budget: float):
    """One Krylov solve of exp(-iHt)v0. Returns (vector, error_estimate) or None."""
    dim = v0.shape[0]
    m_max = min(MAX_KRYLOV_DIM, dim)
    V = np.empty((m_max, dim), dtype=np.complex128)
    alphas: list[float] = []
    betas: list[float] = []
    nrm = float(np.linalg.norm(v0))
    V[0] = v0 / nrm
    for m in range(1, m_max + 1):
        w = h_apply(V[m - 1])
        a = float(np.real(np.vdot(V[m - 1], w)))
        alphas.append(a)
        w -= a * V[m - 1]
        if m >= 2:
            w -= betas[-1] * V[m - 2]
        # full reorthogonalization keeps the basis clean up to m ~ 64
        w -= V[:m].T @ (V[:m].conj() @ w)
        b = float(np.linalg.norm(w))
        y = _expm_tridiag(alphas, betas, t)
        if b < 1e-14:  # happy breakdown: Krylov space is invariant, result exact
            return nrm * (V[:m].T @ y), 0.0
        err = abs(b * t * y[-1])
        if err <= budget:
            return nrm * (V[:m].T @ y), float(err)
        if m < m_max:
            betas.append(b)
            V[m] = w / b
    return None


def _expm_tridiag(alphas, betas, t: float) -> np.ndarray:
    evals, evecs = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas[: len(alphas) - 1]))
    return evecs @ (np.exp(-1j * t * evals) * evecs[0].conj())


def evolve_amp(amp: np.ndarray, H: HamiltonianSpec, t: float, tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """exp(-iHt) @ amp via adaptive Lanczos; returns (amplitudes, residual estimate)."""
    if t == 0.0 or not H.terms:
        return np.array(amp, dtype=np.complex128), 0.0
    psum = H.to_pauli_sum()
    h_apply = lambda v: psum.apply(v)
    n_sub = max(1, int(np.ceil(abs(t) * H.norm_bound() / 6.0)))
    vec = np.array(amp, dtype=np.complex128)
    residual = 0.0
    remaining = [(t / n_sub, 0)] * n_sub
    total = abs(t)
    while remaining:
        dt, depth = remaining.pop()
        step = _lanczos_step(h_apply, vec, dt, budget=0.25 * tol * abs(dt) / total)
        if step is None:
            if depth >= MAX_SUBSTEP_DEPTH:
                raise EvolutionError(
                    f"Krylov evolution failed to reach tol={tol} at substep depth {depth}"
                )
            remaining.append((dt / 2, depth + 1))
            remaining.append((dt / 2, depth + 1))
            continue
        vec, err = step
        vec /= np.linalg.norm(vec)
        residual += err
    return vec, residual


def evolve(state: StateVector, H: HamiltonianSpec, t: float, tol: float = 1e-12) -> EvolutionResult:
    """Evolve |psi> by exp(-iHt) (t signed) to accuracy tol."""
    if not (1e-14 < tol < 1e-4):
        raise ValueError("tol must lie in (1e-14, 1e-4)")
    state.check_normalized(1e-10)
    amp, residual = evolve_amp(state.amplitudes, H, t, tol)
    return EvolutionResult(StateVector(state.n_qubits, amp), t, residual)


def dense_evolver(H: HamiltonianSpec):
    """Return U(t) as a dense matrix factory, caching the eigendecomposition.

    Oracle path for n <= ~10; exact up to the eigensolver.
    """
    evals, evecs = np.linalg.eigh(H.to_matrix())

    def u_of_t(t: float) -> np.ndarray:
        return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T

    return u_of_t


def evolve_dense(state: StateVector, H: HamiltonianSpec, t: float) -> StateVector:
    amp = dense_evolver(H)(t) @ state.amplitudes
    return StateVector(state.n_qubits, amp)


class SiteChannelBasis:
    """Matrix-free matrix elements of the Heisenberg site decomposition.

    For a fixed perturbed site q, signed time tau, and two complement vectors
    |phi_1>, |phi_2> on q^c, evolves the four product states |s>_q|phi_b> once
    and then serves <phi_a| nu^{alpha,beta}(tau) |phi_b> for any target site x,
    where sigma^alpha_x(tau) = 1_q (x) nu^{alpha,0} + sum_beta sigma^beta_q (x)
    nu^{alpha,beta}.
    """

    def __init__(self, H: HamiltonianSpec, q: int, tau: float, phis: np.ndarray,
                 tol: float = 1e-12, evolver=None):
        self.n = H.n_qubits
        self.q = q
        self.tau = tau
        n = self.n
        self.w = np.empty((2, 2, 1 << n), dtype=np.complex128)  # [s, b, :]
        for s in range(2):
            for b in range(2):
                full = np.zeros([2] * n, dtype=np.complex128)
                sl = [slice(None)] * n
                sl[q] = s
                full[tuple(sl)] = phis[b].reshape([2] * (n - 1))
                flat = full.reshape(-1)
                if evolver is not None:
                    self.w[s, b] = evolver(flat, tau)
                else:
                    self.w[s, b], _ = evolve_amp(flat, H, tau, tol)

    def transfer_matrix(self, alpha: str, x: int) -> np.ndarray:
        """T[(s',a),(s,b)] = <s' phi_a| sigma^alpha_x(tau) |s phi_b>."""
        return self.transfer_matrix_op(lambda v: apply_pauli_letter(v, alpha, x, self.n))

    def transfer_matrix_op(self, apply_fn) -> np.ndarray:
        """Transfer matrix for an arbitrary operator given by its action on vectors."""
        T = np.empty((2, 2, 2, 2), dtype=np.complex128)  # [s', a, s, b]
        moved = [apply_fn(self.w[s, b]) for s in range(2) for b in range(2)]
        for sp in range(2):
            for a in range(2):
                bra = self.w[sp, a]
                for s in range(2):
                    for b in range(2):
                        T[sp, a, s, b] = np.vdot(bra, moved[2 * s + b])
        return T

    def nu_elements(self, alpha: str, x: int) -> dict[str, np.ndarray]:
        """2x2 dyad-basis matrices of nu^{alpha,beta} for beta in {0,X,Y,Z}."""
        return self._nu_from_transfer(self.transfer_matrix(alpha, x))

    def nu_elements_op(self, apply_fn) -> dict[str, np.ndarray]:
        """Channel matrices for a general Heisenberg observable (e.g. a logical Pauli)."""
        return self._nu_from_transfer(self.transfer_matrix_op(apply_fn))

    def _nu_from_transfer(self, T: np.ndarray) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for beta in ("I", "X", "Y", "Z"):
            sig = SIGMA[beta]
            nu = np.zeros((2, 2), dtype=np.complex128)
            for a in range(2):
                for b in range(2):
                    acc = 0j
                    for s in range(2):
                        for sp in range(2):
                            acc += sig[s, sp] * T[sp, a, s, b]
                    nu[a, b] = 0.5 * acc
            out["0" if beta == "I" else beta] = nu
        return out


def heisenberg_site_decomposition(H: HamiltonianSpec, alpha: str, x: int, q: int, tau: float,
                                  complement_vectors: np.ndarray | None = None,
                                  dense: bool = False, tol: float = 1e-12,
                                  dense_site_cap: int = 10):
    """Decompose sigma^alpha_x(tau) relative to site q.

    Default (matrix-free) mode requires two complement vectors and returns the
    2x2 matrices {<phi_a|nu^{alpha,beta}|phi_b>} for beta in {0,X,Y,Z}. Dense
    mode returns the nu operators as matrices on q^c (site order: all sites
    except q, ascending), and is capped at `dense_site_cap` qubits.
    """
    if alpha not in "XYZ":
        raise ValueError("alpha must be one of X, Y, Z")
    if dense:
        n = H.n_qubits
        if n > dense_site_cap:
            raise ChronoscopeError(
                f"dense Heisenberg decomposition needs n <= {dense_site_cap}, got {n}"
            )
        u = dense_evolver(H)(tau)
        sig_x = _site_matrix(alpha, x, n)
        heis = u.conj().T @ sig_x @ u
        rest = tuple(i for i in range(n) if i != q)
        out = {}
        for beta in ("I", "X", "Y", "Z"):
            sig_q = _site_matrix(beta, q, n)
            prod = sig_q @ heis
            # (1/2) tr_q(sigma^beta_q sigma^alpha_x(tau)) as an operator on q^c
            out["0" if beta == "I" else beta] = 0.5 * _trace_out_site(prod, n, q)
        return out
    if complement_vectors is None:
        raise ValueError("matrix-free mode needs complement_vectors (2 x 2^{n-1})")
    basis = SiteChannelBasis(H, q, tau, complement_vectors, tol=tol)
    return basis.nu_elements(alpha, x)


def _site_matrix(letter: str, site: int, n: int) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    for i in range(n):
        m = np.kron(m, SIGMA[letter] if i == site else SIGMA["I"])
    return m


def _trace_out_site(mat: np.ndarray, n: int, q: int) -> np.ndarray:
    t = mat.reshape([2] * (2 * n))
    t = np.moveaxis(t, (q, n + q), (0, n))
    d = 1 << (n - 1)
    t = t.reshape(2, d, 2, d)
    return np.einsum("sasb->ab", t)
