"""Stabilizer codes, recovery channels, and the error-corrected causal
influence (ECI).

The recovery map is R[rho] = sum_s C_s Pi_s rho Pi_s C_s^dag with Pi_s the
syndrome projectors and C_s the decoder's corrections; the dilated variant R'
keeps the syndrome record in an ancilla register, and the measured variant
drops the off-diagonal syndrome coherences. ECIs are computed exactly by
Haar/Hilbert-Schmidt moment algebra on these channels and cross-checked in
the tests against Monte Carlo and the closed-form boxed values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from chronoscope.causal import CiValue, MomentCoefficients, ci_exact, ci_weight, haar_unitary, hs_observable, variance_from_nu
from chronoscope.hamlib import HamiltonianSpec, SiteChannelBasis, dense_evolver
from chronoscope.pauli import SIGMA, PauliString, PauliSum, pauli_basis_strings
from chronoscope.qcore import ChronoscopeError, StateVector, apply_site_matrix, schmidt_split

QEC_DENSE_CAP = 8


@dataclass(frozen=True)
class StabilizerCode:
    name: str
    n: int
    k: int
    generators: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]
    corrects_single_errors: bool = True
    block_sites: int | None = None  # sites per independent block (composite codes)
    block_gens: int | None = None   # generators per block
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def validate(self) -> None:
        for g1, g2 in itertools.combinations(self.generators, 2):
            if not g1.commutes_with(g2):
                raise ChronoscopeError(f"generators {g1} and {g2} anticommute")
        for lbl, ops in (("X", self.logical_x), ("Z", self.logical_z)):
            for op in ops:
                for g in self.generators:
                    if not op.commutes_with(g):
                        raise ChronoscopeError(f"logical {lbl} {op} anticommutes with {g}")
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                want = i != j
                if lx.commutes_with(lz) != want:
                    raise ChronoscopeError(f"logical pair ({i},{j}) has wrong commutation")

    # -- syndromes ---------------------------------------------------------

    def syndrome_of(self, p: PauliString) -> tuple[int, ...]:
        return tuple(0 if p.commutes_with(g) else 1 for g in self.generators)

    def syndrome_table(self) -> dict[tuple[int, ...], PauliString]:
        """Map syndrome -> correction, decoded over single-qubit errors.

        Letters are tried in Z, X, Y order so that codes blind to one error
        species (the X-basis repetition code) correct the species they can.
        """
        if "table" not in self._cache:
            table: dict[tuple[int, ...], PauliString] = {}
            identity = PauliString("I" * self.n)
            table[self.syndrome_of(identity)] = identity
            for letter in "ZXY":
                for site in range(self.n):
                    err = PauliString.from_ops(self.n, {site: letter})
                    table.setdefault(self.syndrome_of(err), err)
            if self.block_sites and self.block_gens and self.n > self.block_sites:
                table = self._product_table()
            self._cache["table"] = table
        return self._cache["table"]

    def _product_table(self) -> dict[tuple[int, ...], PauliString]:
        """Composite decode: each block corrects its own syndrome chunk."""
        bs, bg = self.block_sites, self.block_gens
        blocks = self.n // bs
        per_block: dict[tuple[int, ...], dict[int, str]] = {(0,) * bg: {}}
        for letter in "ZXY":
            for site in range(bs):
                err = PauliString.from_ops(self.n, {site: letter})
                chunk = self.syndrome_of(err)[:bg]
                per_block.setdefault(chunk, {site: letter})
        table: dict[tuple[int, ...], PauliString] = {}
        for combo in itertools.product(per_block.keys(), repeat=blocks):
            ops: dict[int, str] = {}
            for j, chunk in enumerate(combo):
                for site, letter in per_block[chunk].items():
                    ops[j * bs + site] = letter
            syndrome = sum(combo, ())
            table[syndrome] = PauliString.from_ops(self.n, ops)
        return table

    def all_syndromes(self) -> list[tuple[int, ...]]:
        return [s for s in itertools.product((0, 1), repeat=len(self.generators))]

    def correction_for(self, syndrome: tuple[int, ...]) -> PauliString:
        table = self.syndrome_table()
        if syndrome in table:
            return table[syndrome]
        raise ChronoscopeError(f"syndrome {syndrome} has no decoded correction")

    # -- codespace ---------------------------------------------------------

    def projector_apply(self, vec: np.ndarray, syndrome: tuple[int, ...] | None = None) -> np.ndarray:
        """Apply Pi_syndrome (default: the codespace projector) matrix-free."""
        syndrome = syndrome or (0,) * len(self.generators)
        out = np.array(vec, dtype=np.complex128)
        for g, s in zip(self.generators, syndrome):
            out = 0.5 * (out + (-1.0 if s else 1.0) * g.apply(out))
        return out

    def encoder(self) -> np.ndarray:
        """2^n x 2^k isometry with logical qubit 0 the most significant bit."""
        if "encoder" not in self._cache:
            cols = []
            for bits in range(1 << self.k):
                vec = None
                for seed_idx in range(1 << self.n):
                    cand = np.zeros(1 << self.n, dtype=np.complex128)
                    cand[seed_idx] = 1.0
                    cand = self.projector_apply(cand)
                    for j in range(self.k):
                        sign = -1.0 if (bits >> (self.k - 1 - j)) & 1 else 1.0
                        cand = 0.5 * (cand + sign * self.logical_z[j].apply(cand))
                    norm = np.linalg.norm(cand)
                    if norm > 1e-8:
                        vec = cand / norm
                        break
                if vec is None:
                    raise ChronoscopeError("failed to seed a codeword")
                cols.append(vec)
            # fix relative phases so that logical X acts with +1 amplitude
            enc = np.array(cols).T
            for bits in range(1, 1 << self.k):
                ref = enc[:, 0]
                op = None
                for j in range(self.k):
                    if (bits >> (self.k - 1 - j)) & 1:
                        op = self.logical_x[j] if op is None else op * self.logical_x[j]
                flipped = op.apply(ref)
                enc[:, bits] = flipped
            self._cache["encoder"] = enc
        return self._cache["encoder"]

    def logical_state(self, coeffs) -> StateVector:
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (1 << self.k,):
            raise ValueError("coefficient length must be 2^k")
        coeffs = coeffs / np.linalg.norm(coeffs)
        return StateVector(self.n, self.encoder() @ coeffs)

    def in_codespace(self, state: StateVector, atol: float = 1e-10) -> bool:
        proj = self.projector_apply(state.amplitudes)
        return bool(np.linalg.norm(proj - state.amplitudes) <= atol)

    def encoded_pauli(self, logical_letters: str) -> PauliString:
        """Physical representative of a logical Pauli string (one letter per logical qubit)."""
        if len(logical_letters) != self.k:
            raise ValueError("need one letter per logical qubit")
        out = PauliString("I" * self.n)
        for j, letter in enumerate(logical_letters):
            if letter == "I":
                continue
            if letter == "X":
                out = out * self.logical_x[j]
            elif letter == "Z":
                out = out * self.logical_z[j]
            elif letter == "Y":
                y_bar = self.logical_x[j] * self.logical_z[j]
                out = out * PauliString(y_bar.letters, y_bar.phase * 1j)
            else:
                raise ValueError(f"bad letter {letter}")
        return out

    @property
    def n_syndromes(self) -> int:
        return 1 << len(self.generators)


def repetition_code_x(n: int = 3) -> StabilizerCode:
    """1D X-basis repetition code: |0_L> = |+...+>, corrects single Z errors."""
    gens = tuple(PauliString.from_ops(n, {i: "X", i + 1: "X"}) for i in range(n - 1))
    logical_z = (PauliString.from_ops(n, {0: "X"}),)
    logical_x = (PauliString("Z" * n),)
    code = StabilizerCode(f"repetition-X({n})", n, 1, gens, logical_x, logical_z)
    code.validate()
    return code


_FIVE_QUBIT_GENS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")


def five_qubit_code(blocks: int = 1) -> StabilizerCode:
    """[[5k,k,3]] code: k independent blocks of the perfect five-qubit code.

    Logical X is X Y Y on block qubits (0,2,3); logical Z is Y Z Y on (0,1,2),
    a weight-3 normalizer representative equivalent to Z^{x5} modulo the
    stabilizer group.
    """
    n = 5 * blocks
    gens = []
    lx, lz = [], []
    for j in range(blocks):
        off = 5 * j
        for pattern in _FIVE_QUBIT_GENS:
            gens.append(PauliString.from_ops(n, {off + i: c for i, c in enumerate(pattern) if c != "I"}))
        lx.append(PauliString.from_ops(n, {off: "X", off + 2: "Y", off + 3: "Y"}))
        lz.append(PauliString.from_ops(n, {off: "Y", off + 1: "Z", off + 2: "Y"}))
    code = StabilizerCode(f"five-qubit-blocks({blocks})", n, blocks, tuple(gens),
                          tuple(lx), tuple(lz), block_sites=5, block_gens=4)
    code.validate()
    return code


def iceberg_code(k: int) -> StabilizerCode:
    """[[k+2, k, 2]] Iceberg code (k even): stabilized by X^n and Z^n."""
    if k % 2 != 0 or k < 2:
        raise ValueError("Iceberg code requires even k >= 2")
    n = k + 2
    h, v = k, k + 1
    gens = (PauliString("X" * n), PauliString("Z" * n))
    lx = tuple(PauliString.from_ops(n, {j: "X", h: "X"}) for j in range(k))
    lz = tuple(PauliString.from_ops(n, {j: "Z", v: "Z"}) for j in range(k))
    code = StabilizerCode(f"iceberg({k})", n, k, gens, lx, lz, corrects_single_errors=False)
    code.validate()
    return code


# -- recovery channels -----------------------------------------------------


@dataclass(frozen=True)
class RecoveryChannel:
    """Syndrome-projected correction map of a stabilizer code.

    variant: "bare" (R), "dilated" (R', syndrome kept coherently in an
    ancilla register), or "measured" (R' after ancilla measurement).
    """

    code: StabilizerCode
    variant: str = "bare"

    def __post_init__(self):
        if self.variant not in ("bare", "dilated", "measured"):
            raise ValueError(f"unknown variant {self.variant}")
        if not self.code.corrects_single_errors:
            raise ChronoscopeError(f"{self.code.name} is detect-only; no recovery channel")

    def kraus_dense(self) -> list[np.ndarray]:
        """K_s = C_s Pi_s as dense matrices (n <= QEC_DENSE_CAP)."""
        code = self.code
        if code.n > QEC_DENSE_CAP:
            raise ChronoscopeError("dense Kraus operators need a small code")
        eye = np.eye(1 << code.n, dtype=np.complex128)
        out = []
        for s in code.all_syndromes():
            proj = np.array([code.projector_apply(eye[:, i], s) for i in range(eye.shape[1])]).T
            corr = code.correction_for(s).to_matrix()
            out.append(corr @ proj)
        return out

    def apply_dense(self, rho: np.ndarray) -> np.ndarray:
        ks = self.kraus_dense()
        return sum(k @ rho @ k.conj().T for k in ks)


def recovery_adjoint(code: StabilizerCode, o_logical: PauliString,
                     form: str = "simplified") -> PauliSum:
    """Adjoint R^dag applied to a logical Pauli, as a Pauli sum.

    definitional: sum_s Pi_s C_s O C_s Pi_s; simplified: O (1 - 2 sum_anti Pi_s)
    over the syndromes whose correction anticommutes with O. Both agree on
    dense representations; the simplified form is cheaper.
    """
    for g in code.generators:
        if not o_logical.commutes_with(g):
            raise ChronoscopeError(f"{o_logical} is not in the logical Pauli group")
    o_sum = PauliSum.from_strings(code.n, [(1.0, o_logical)])
    if form == "simplified":
        acc = PauliSum(code.n, {"I" * code.n: 1.0})
        for s, corr in code.syndrome_table().items():
            if not corr.commutes_with(o_logical):
                acc = acc + _projector_sum(code, s).scaled(-2.0)
        return o_sum * acc
    if form == "definitional":
        total = PauliSum(code.n)
        for s in code.all_syndromes():
            corr = code.correction_for(s)
            c_sum = PauliSum.from_strings(code.n, [(1.0, corr)])
            p_sum = _projector_sum(code, s)
            total = total + p_sum * c_sum * o_sum * c_sum * p_sum
        return total
    raise ValueError(f"unknown form {form}")


def _projector_sum(code: StabilizerCode, syndrome: tuple[int, ...]) -> PauliSum:
    acc = PauliSum(code.n, {"I" * code.n: 1.0})
    for g, s in zip(code.generators, syndrome):
        sign = -1.0 if s else 1.0
        term = PauliSum(code.n, {"I" * code.n: 0.5}) + PauliSum.from_strings(code.n, [(0.5 * sign, g)])
        acc = acc * term
    return acc


# -- error-corrected causal influence ---------------------------------------


@dataclass(frozen=True)
class EciValue:
    value: float
    channel_pair: str
    measured: bool = False
    operator_norm: float | None = None  # tr(R^dag[O](t)^2)/2^n diagnostic

    def __post_init__(self):
        if self.value < -1e-12:
            raise ChronoscopeError(f"ECI {self.value} below -1e-12")


class _AdjointLogicalObservable:
    """R^dag[Enc sigma^mu Enc^dag] with optional Heisenberg evolution, as a matvec."""

    def __init__(self, code: StabilizerCode, sigma_mu: np.ndarray, u_t: np.ndarray | None):
        self.code = code
        enc = code.encoder()
        self.factors = []  # list of 2^n x D matrices F_s: Y = sum_s F_s sigma F_s^dag
        for s in code.all_syndromes():
            corr = code.correction_for(s)
            self.factors.append(_apply_string_columns(corr, enc))
        self.sigma = sigma_mu
        self.u_t = u_t

    def matvec(self, v: np.ndarray) -> np.ndarray:
        w = self.u_t @ v if self.u_t is not None else v
        out = np.zeros_like(w)
        for f in self.factors:
            out += f @ (self.sigma @ (f.conj().T @ w))
        if self.u_t is not None:
            out = self.u_t.conj().T @ out
        return out

    def logical_matrix(self) -> np.ndarray:
        """Enc^dag Y Enc, the D x D matrix seen by logical kicks."""
        enc = self.code.encoder()
        cols = np.array([self.matvec(enc[:, i]) for i in range(enc.shape[1])]).T
        return enc.conj().T @ cols


class _AdjointAncillaObservable:
    """R'^dag[1 (x) Sigma^mu_anc] (pre- or post-measurement) as a matvec."""

    def __init__(self, code: StabilizerCode, sigma_anc: np.ndarray, measured: bool,
                 u_t: np.ndarray | None):
        self.code = code
        self.measured = measured
        self.u_t = u_t
        syndromes = code.all_syndromes()
        self.corrections = [code.correction_for(s) for s in syndromes]
        self.syndromes = syndromes
        self.m = sigma_anc  # D_anc x D_anc in the syndrome basis
        self.index = {s: i for i, s in enumerate(syndromes)}

    def matvec(self, v: np.ndarray) -> np.ndarray:
        w = self.u_t @ v if self.u_t is not None else v
        code = self.code
        # z_s = Pi_0 E_s w (E_s = C_s, Hermitian)
        zs = [code.projector_apply(corr.apply(w)) for corr in self.corrections]
        out = np.zeros_like(w)
        for t_i, corr_t in enumerate(self.corrections):
            acc = np.zeros_like(w)
            for s_i in range(len(zs)):
                if self.measured and s_i != t_i:
                    continue
                coeff = self.m[t_i, s_i]
                if coeff != 0:
                    acc += coeff * zs[s_i]
            if np.any(acc):
                out += corr_t.apply(acc)
        if self.u_t is not None:
            out = self.u_t.conj().T @ out
        return out


def _apply_string_columns(p: PauliString, mat: np.ndarray) -> np.ndarray:
    ps = PauliSum.from_strings(int(np.log2(mat.shape[0])), [(1.0, p)])
    return np.array([ps.apply(mat[:, i]) for i in range(mat.shape[1])]).T


def _haar_variance_full(y_logical: np.ndarray, rho_logical: np.ndarray) -> float:
    """Var over Haar unitaries on the whole logical space of tr(V^dag Y V rho)."""
    d = y_logical.shape[0]
    tr_y = np.real(np.trace(y_logical))
    tr_y2 = np.real(np.trace(y_logical @ y_logical))
    tr_rho2 = np.real(np.trace(rho_logical @ rho_logical))
    second = (tr_y**2 * (d - tr_rho2) + tr_y2 * (d * tr_rho2 - 1.0)) / (d * (d**2 - 1.0))
    first = tr_y / d
    return float(second - first**2)


def _variance_physical_site(state: StateVector, j: int, matvec) -> float:
    """Haar variance for a kick on physical qubit j, observable given by matvec."""
    pair = schmidt_split(state, j)
    n = state.n_qubits
    base = np.empty((2, 2, 1 << n), dtype=np.complex128)
    for s in range(2):
        for b in range(2):
            full = np.zeros([2] * n, dtype=np.complex128)
            sl = [slice(None)] * n
            sl[j] = s
            full[tuple(sl)] = pair.complement_vectors[b].reshape([2] * (n - 1))
            base[s, b] = full.reshape(-1)
    moved = {(s, b): matvec(base[s, b]) for s in range(2) for b in range(2)}
    nu_by_beta = {}
    for beta in "XYZ":
        sig = SIGMA[beta]
        m = np.zeros((2, 2), dtype=np.complex128)
        for r in range(2):
            for c in range(2):
                acc = 0j
                for s in range(2):
                    for sp in range(2):
                        acc += sig[s, sp] * np.vdot(base[sp, r], moved[(s, c)])
                m[r, c] = 0.5 * acc
        nu_by_beta[beta] = m
    return variance_from_nu(pair.weights[0], pair.weights[1], nu_by_beta)


def _syndrome_pauli_basis(n_anc_qubits: int) -> list[np.ndarray]:
    """Nontrivial Pauli-string matrices on the ancilla register."""
    out = []
    for p in pauli_basis_strings(tuple(range(n_anc_qubits)), n_anc_qubits):
        out.append(p.to_matrix())
    return out


def eci_exact(code: StabilizerCode, state: StateVector, source, target,
              H: HamiltonianSpec | None = None, tau: float = 0.0,
              variant: str | None = None) -> EciValue:
    """Exact error-corrected causal influence via Haar/HS moment algebra.

    source: ("physical", j) or ("logical",); target: ("logical",),
    ("logical", (j, ...)) for a sub-register, or ("ancilla",). The state must
    lie in the codespace. H (physical form of the logical Hamiltonian) and
    signed tau evolve the system between kick and recovery.
    """
    if not code.in_codespace(state):
        raise ChronoscopeError("state is outside the codespace (beyond 1e-10)")
    if target[0] == "ancilla":
        variant = variant or "dilated"
        if variant == "bare":
            raise ValueError("ancilla target needs the dilated or measured channel")
    else:
        variant = variant or "bare"
    u_t = None
    if H is not None and tau != 0.0:
        if code.n > 10:
            raise ChronoscopeError("evolved ECI needs a dense evolution operator (n <= 10)")
        u_t = dense_evolver(H)(tau)

    observables: list = []
    if target[0] == "logical":
        target_js = tuple(range(code.k)) if len(target) == 1 else tuple(target[1])
        d_t = 1 << len(target_js)
        for letters in _logical_letter_strings(code.k, target_js):
            sigma = _logical_sigma_matrix(code.k, letters)
            observables.append(_AdjointLogicalObservable(code, sigma, u_t))
    elif target[0] == "ancilla":
        n_anc_qubits = len(code.generators)
        d_t = 1 << n_anc_qubits
        for sig in _syndrome_pauli_basis(n_anc_qubits):
            observables.append(
                _AdjointAncillaObservable(code, sig, variant == "measured", u_t)
            )
    else:
        raise ValueError(f"unknown target {target}")

    total = 0.0
    norm_diag = None
    for obs in observables:
        if source[0] == "physical":
            total += _variance_physical_site(state, source[1], obs.matvec)
        elif source[0] == "logical":
            y_log = obs.logical_matrix() if hasattr(obs, "logical_matrix") else _logical_matrix_generic(code, obs)
            rho_log = _logical_density(code, state)
            total += _haar_variance_full(y_log, rho_log)
        else:
            raise ValueError(f"unknown source {source}")
    if code.n <= QEC_DENSE_CAP and observables:
        norm_diag = _operator_norm_diag(code, observables[0])
    value = MomentCoefficients(d_t).pauli_weight() * total
    pair_label = f"{source[0]}->{target[0]}"
    return EciValue(max(value, 0.0), pair_label, variant == "measured", norm_diag)


def _logical_letter_strings(k: int, target_js: tuple[int, ...]) -> list[str]:
    out = []
    for combo in itertools.product("IXYZ", repeat=len(target_js)):
        if all(c == "I" for c in combo):
            continue
        letters = ["I"] * k
        for j, c in zip(target_js, combo):
            letters[j] = c
        out.append("".join(letters))
    return out


def _logical_sigma_matrix(k: int, letters: str) -> np.ndarray:
    return reduce(np.kron, [SIGMA[c] for c in letters], np.array([[1.0 + 0j]]))


def _logical_matrix_generic(code: StabilizerCode, obs) -> np.ndarray:
    enc = code.encoder()
    cols = np.array([obs.matvec(enc[:, i]) for i in range(enc.shape[1])]).T
    return enc.conj().T @ cols


def _logical_density(code: StabilizerCode, state: StateVector) -> np.ndarray:
    enc = code.encoder()
    c = enc.conj().T @ state.amplitudes
    return np.outer(c, c.conj())


def _operator_norm_diag(code: StabilizerCode, obs) -> float:
    dim = 1 << code.n
    eye = np.eye(dim, dtype=np.complex128)
    y = np.array([obs.matvec(eye[:, i]) for i in range(dim)]).T
    return float(np.real(np.trace(y @ y)) / dim)


# -- boxed closed forms ------------------------------------------------------


def boxed_ci_ll(D: int) -> float:
    return (D - 1) / (D**2 * (D**2 + 1))


def boxed_phys_anc(D_anc: int, measured: bool) -> float:
    base = 1.0 / (D_anc * (D_anc**2 + 1))
    return (0.25 if measured else 0.75) * base


def boxed_rep_phys_logical(z_l: float) -> float:
    return (1.0 - z_l**2) / 30.0


def boxed_rep_phys_anc(z_l: float, D_anc: int, measured: bool) -> float:
    if measured:
        return 1.0 / (6.0 * D_anc * (D_anc**2 + 1))
    return (1.0 + z_l**2 / 2.0) / (3.0 * D_anc * (D_anc**2 + 1))


def ci_phys_anc(code: StabilizerCode, state: StateVector, measured: bool,
                j: int = 0) -> EciValue:
    """Physical -> ancilla influence through the dilated (or measured) channel."""
    return eci_exact(code, state, ("physical", j), ("ancilla",),
                     variant="measured" if measured else "dilated")


def rep_code_ci(alpha: complex, beta: complex, j: int = 1) -> dict[str, EciValue]:
    """All boxed repetition-code influences for the logical state a|0_L>+b|1_L>."""
    code = repetition_code_x(3)
    state = code.logical_state([alpha, beta])
    return {
        "phys_logical": eci_exact(code, state, ("physical", j), ("logical",)),
        "phys_anc_pre": ci_phys_anc(code, state, measured=False, j=j),
        "phys_anc_post": ci_phys_anc(code, state, measured=True, j=j),
    }


# -- protected states of the five-qubit code ---------------------------------


@dataclass(frozen=True)
class ProtectedFamilyResult:
    name: str
    state: StateVector
    eci: float
    max_residual: float


def eci_physical_to_logical_site(code: StabilizerCode, state: StateVector,
                                 q: int, logical_j: int, H: HamiltonianSpec,
                                 t: float, tol: float = 1e-12) -> tuple[float, float]:
    """ECI of physical qubit q on logical qubit j under stabilizer-commuting H.

    For codespace states the recovery factors drop out of every matrix element
    the influence depends on, so this reduces to the plain channel machinery
    with logical Heisenberg observables; scales to many blocks. Returns
    (eci_value, max acausality-condition residual).
    """
    pair = schmidt_split(state, q)
    basis = SiteChannelBasis(H, q, t, pair.complement_vectors, tol=tol)
    p1, p2 = pair.weights
    total = 0.0
    max_resid = 0.0
    for alpha in "XYZ":
        letters = "".join(alpha if jj == logical_j else "I" for jj in range(code.k))
        op = code.encoded_pauli(letters)
        nu = basis.nu_elements_op(op.apply)
        total += variance_from_nu(p1, p2, nu)
        for beta in "XYZ":
            m = nu[beta]
            max_resid = max(max_resid, abs(p1 * m[0, 0] - p2 * m[1, 1]),
                            abs(m[0, 1]), abs(m[1, 0]))
    return ci_weight(2) * total, max_resid


def logical_ising_hamiltonian(code: StabilizerCode, h_z: float = 0.0) -> HamiltonianSpec:
    """H = sum_j Xbar_j Xbar_{j+1} (+ h_z sum_j Zbar_j) as physical Pauli terms."""
    terms = []
    for j in range(code.k - 1):
        s = code.logical_x[j] * code.logical_x[j + 1]
        terms.append((float(np.real(s.phase)), PauliString(s.letters)))
    if h_z != 0.0:
        for j in range(code.k):
            s = code.logical_z[j]
            terms.append((h_z * float(np.real(s.phase)), PauliString(s.letters)))
    return HamiltonianSpec(code.n, tuple(terms))


def protected_states_513(t: float, blocks: int = 2, seed: int = 5) -> list[ProtectedFamilyResult]:
    """The protected-state families of the five-qubit-code logical Ising chain.

    Families 1-3 live on two blocks (kick qubit in block 0, target logical
    qubit 1); the one-parameter family needs a third block since its defining
    cancellation involves the X of the block beyond the target.
    """
    if blocks not in (2, 3):
        raise ValueError("blocks must be 2 or 3")
    code = five_qubit_code(blocks)
    H = logical_ising_hamiltonian(code)
    rng = np.random.default_rng(seed)

    def rand_qubit():
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        return v / np.linalg.norm(v)

    families: list[tuple[str, np.ndarray]] = []
    zero = np.array([1.0, 0.0])
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    extra = [rand_qubit() for _ in range(blocks - 2)]

    def assemble(per_block):
        coeffs = reduce(np.kron, per_block)
        return coeffs / np.linalg.norm(coeffs)

    families.append(("z-eigenstate", assemble([zero, rand_qubit()] + extra)))
    families.append(("x-eigenstate", assemble([rand_qubit(), plus] + extra)))
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / np.sqrt(2)
    if blocks == 2:
        families.append(("bell", bell))
    else:
        families.append(("bell", np.kron(rand_qubit(), bell)))
        fam4 = np.zeros(4, dtype=complex)
        fam4[0] = np.cos(t + np.pi / 4)
        fam4[3] = 1j * np.cos(t - np.pi / 4)
        families.append(("one-parameter", np.kron(rand_qubit(), fam4)))

    out = []
    for name, coeffs in families:
        state = code.logical_state(coeffs)
        eci, resid = eci_physical_to_logical_site(code, state, q=0, logical_j=1, H=H, t=t)
        out.append(ProtectedFamilyResult(name, state, eci, resid))
    return out


def unprotected_control_state(t: float, blocks: int = 2, seed: int = 9) -> ProtectedFamilyResult:
    """A generic codespace state outside the protected families (nonzero ECI)."""
    code = five_qubit_code(blocks)
    H = logical_ising_hamiltonian(code)
    rng = np.random.default_rng(seed)
    block1 = np.array([0.8, 0.6 + 0.0j])
    block2 = np.array([np.cos(0.3), np.sin(0.3) + 0.0j])  # <Z_L> != 0, <Y_L> != 0 mix
    coeffs = np.kron(block1, block2)
    for _ in range(blocks - 2):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        coeffs = np.kron(coeffs, v / np.linalg.norm(v))
    state = code.logical_state(coeffs)
    eci, resid = eci_physical_to_logical_site(code, state, q=0, logical_j=1, H=H, t=t)
    return ProtectedFamilyResult("control", state, eci, resid)


# -- iceberg ------------------------------------------------------------------


def iceberg_self_influence(k: int, dt: float, with_field: bool, h_z: float = 0.5,
                           site: int = 0, basis_state: int = 0) -> CiValue:
    """Causal influence of a physical qubit on itself for the encoded Iceberg chain."""
    code = iceberg_code(k)
    state = code.logical_state(np.eye(1 << k)[basis_state])
    terms = [(1.0, PauliString.from_ops(code.n, {j: "X", j + 1: "X"})) for j in range(k - 1)]
    if with_field:
        v = k + 1
        for j in range(k):
            terms.append((h_z, PauliString.from_ops(code.n, {j: "Z", v: "Z"})))
    H = HamiltonianSpec(code.n, tuple(terms))
    return ci_exact(state, H, site, site, dt)


# -- Monte Carlo oracle -------------------------------------------------------


def eci_monte_carlo(code: StabilizerCode, state: StateVector, source, target,
                    variant: str, n_samples: int, seed: int,
                    H: HamiltonianSpec | None = None, tau: float = 0.0,
                    inner: int = 8) -> CiValue:
    """Direct sampling oracle for the ECI (dense channel, small codes)."""
    rng = np.random.default_rng(seed)
    n = code.n
    u_t = dense_evolver(H)(tau) if (H is not None and tau != 0.0) else None
    corrections = [code.correction_for(s) for s in code.all_syndromes()]
    if target[0] == "logical":
        target_js = tuple(range(code.k)) if len(target) == 1 else tuple(target[1])
        d_t = 1 << len(target_js)
        enc = code.encoder()
    else:
        d_t = code.n_syndromes
    if source[0] == "physical":
        d_s = 2
    else:
        d_s = 1 << code.k

    def response(psi_v: np.ndarray, o_mat: np.ndarray) -> float:
        w = u_t @ psi_v if u_t is not None else psi_v
        zs = [code.projector_apply(c.apply(w)) for c in corrections]  # Pi_0 E_s w
        if target[0] == "ancilla":
            m = 0.0 + 0j
            for t_i in range(len(zs)):
                rng_s = [t_i] if variant == "measured" else range(len(zs))
                for s_i in rng_s:
                    if o_mat[t_i, s_i] != 0:
                        # tr(K_s rho K_t^dag) = <K_t w|K_s w>, K_s = Pi_0 E_s -> corrected frame
                        m += o_mat[t_i, s_i] * np.vdot(zs[t_i], zs[s_i])
            return float(np.real(m))
        # logical target: R[rho] then measure Enc O Enc^dag; K_s psi = C_s Pi_s psi
        val = 0.0
        for s, corr in zip(code.all_syndromes(), corrections):
            ks_psi = corr.apply(code.projector_apply(w, s))
            c = enc.conj().T @ ks_psi
            if len(target) > 1:
                full = _embed_target(o_mat, target_js, code.k)
            else:
                full = o_mat
            val += float(np.real(c.conj() @ (full @ c)))
        return val

    n_outer = max(2, n_samples // inner)
    var_samples = np.empty(n_outer)
    for i in range(n_outer):
        o_mat = hs_observable(d_t, rng)
        fs = np.empty(inner)
        for jj in range(inner):
            v = haar_unitary(d_s, rng)
            if source[0] == "physical":
                psi_v = apply_site_matrix(state.amplitudes, v, source[1], n)
            else:
                enc_full = code.encoder()
                coeffs = enc_full.conj().T @ state.amplitudes
                psi_v = enc_full @ (v @ coeffs)
            fs[jj] = response(psi_v, o_mat)
        var_samples[i] = np.var(fs, ddof=1)
    value = float(np.mean(var_samples))
    n_batches = min(30, n_outer)
    means = np.array([np.mean(c) for c in np.array_split(var_samples, n_batches)])
    stderr = float(np.std(means, ddof=1) / np.sqrt(len(means)))
    return CiValue(max(value, 0.0), "monte-carlo", stderr)


def _embed_target(o_mat: np.ndarray, target_js: tuple[int, ...], k: int) -> np.ndarray:
    """O on the target logical qubits, identity elsewhere, logical order MSB-first."""
    order = list(target_js) + [j for j in range(k) if j not in target_js]
    m = np.kron(o_mat, np.eye(1 << (k - len(target_js))))
    inv = np.argsort(order)
    t = m.reshape([2] * (2 * k))
    t = t.transpose(list(inv) + [k + i for i in inv])
    return t.reshape(1 << k, 1 << k)
