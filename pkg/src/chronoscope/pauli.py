"""Pauli strings and weighted Pauli sums on a fixed qubit lattice.

Site 0 is the most significant bit of the amplitude index throughout the
package; a string is stored as one letter per site, e.g. "IXZY" on 4 sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from chronoscope.kernels import CompiledPauliSum

PHASES = (1 + 0j, -1 + 0j, 1j, -1j)

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-site products: (a, b) -> (phase, letter) with sigma_a sigma_b = phase * sigma_c
_MUL = {}
for _a in "IXYZ":
    _MUL[("I", _a)] = (1 + 0j, _a)
    _MUL[(_a, "I")] = (1 + 0j, _a)
    _MUL[(_a, _a)] = (1 + 0j, "I")
_MUL[("X", "Y")] = (1j, "Z")
_MUL[("Y", "X")] = (-1j, "Z")
_MUL[("Y", "Z")] = (1j, "X")
_MUL[("Z", "Y")] = (-1j, "X")
_MUL[("Z", "X")] = (1j, "Y")
_MUL[("X", "Z")] = (-1j, "Y")


@dataclass(frozen=True)
class PauliString:
    """A phase times a tensor product of single-site Paulis."""

    letters: str
    phase: complex = 1 + 0j

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        if self.phase not in PHASES:
            raise ValueError(f"phase must be a fourth root of unity, got {self.phase!r}")

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Mapping[int, str], phase: complex = 1 + 0j) -> "PauliString":
        letters = ["I"] * n_qubits
        for site, letter in ops.items():
            if not 0 <= site < n_qubits:
                raise ValueError(f"site {site} out of range for {n_qubits} qubits")
            letters[site] = letter
        return cls("".join(letters), phase)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if len(self.letters) != len(other.letters):
            raise ValueError("length mismatch")
        phase = self.phase * other.phase
        out = []
        for a, b in zip(self.letters, other.letters):
            p, c = _MUL[(a, b)]
            phase *= p
            out.append(c)
        return PauliString("".join(out), phase)

    def commutes_with(self, other: "PauliString") -> bool:
        anti = sum(
            1
            for a, b in zip(self.letters, other.letters)
            if a != "I" and b != "I" and a != b
        )
        return anti % 2 == 0

    def acts_trivially_on(self, sites: Iterable[int]) -> bool:
        return all(self.letters[s] == "I" for s in sites)

    def masks(self) -> tuple[int, int, int]:
        """(flip, pmask, n_y) bit masks; site s maps to bit n-1-s."""
        n = len(self.letters)
        flip = pmask = ny = 0
        for s, c in enumerate(self.letters):
            bit = 1 << (n - 1 - s)
            if c in "XY":
                flip |= bit
            if c in "ZY":
                pmask |= bit
            if c == "Y":
                ny += 1
        return flip, pmask, ny

    def kernel_weight(self) -> complex:
        """Phase passed to the statevector kernel (i^{#Y} folded in)."""
        _, _, ny = self.masks()
        return self.phase * (1j) ** ny

    def to_matrix(self) -> np.ndarray:
        m = np.array([[self.phase]], dtype=complex)
        for c in self.letters:
            m = np.kron(m, SIGMA[c])
        return m

    def apply(self, vec: np.ndarray) -> np.ndarray:
        compiled = getattr(self, "_compiled", None)
        if compiled is None:
            compiled = PauliSum.from_strings(self.n_qubits, [(1.0, self)]).compiled()
            object.__setattr__(self, "_compiled", compiled)
        return compiled.apply(vec)

    def __str__(self) -> str:
        pre = {1 + 0j: "+", -1 + 0j: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return pre + self.letters


class PauliSum:
    """A complex-weighted sum of Pauli strings on n_qubits sites.

    Phases of the member strings are folded into the coefficients, so the
    internal table maps bare letter strings to complex weights.
    """

    def __init__(self, n_qubits: int, table: Mapping[str, complex] | None = None):
        self.n_qubits = n_qubits
        self._table: dict[str, complex] = dict(table) if table else {}
        self._compiled: CompiledPauliSum | None = None

    @classmethod
    def from_strings(cls, n_qubits: int, terms: Iterable[tuple[complex, PauliString]]) -> "PauliSum":
        out = cls(n_qubits)
        for coeff, string in terms:
            if string.n_qubits != n_qubits:
                raise ValueError("string length mismatch")
            out._add_term(string.letters, coeff * string.phase)
        return out

    def _add_term(self, letters: str, coeff: complex) -> None:
        self._compiled = None
        new = self._table.get(letters, 0j) + coeff
        if new == 0:
            self._table.pop(letters, None)
        else:
            self._table[letters] = new

    def items(self) -> Iterator[tuple[str, complex]]:
        return iter(sorted(self._table.items()))

    def __len__(self) -> int:
        return len(self._table)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n_qubits, self._table)
        for letters, coeff in other._table.items():
            out._add_term(letters, coeff)
        return out

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: factor * v for k, v in self._table.items()})

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n_qubits)
        for la, ca in self._table.items():
            sa = PauliString(la)
            for lb, cb in other._table.items():
                prod = sa * PauliString(lb)
                out._add_term(prod.letters, ca * cb * prod.phase)
        return out

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: np.conj(v) for k, v in self._table.items()})

    def compiled(self) -> CompiledPauliSum:
        if self._compiled is None:
            terms = []
            for letters, coeff in self._table.items():
                s = PauliString(letters)
                flip, pmask, _ = s.masks()
                terms.append((coeff * s.kernel_weight(), flip, pmask))
            self._compiled = CompiledPauliSum(self.n_qubits, terms)
        return self._compiled

    def apply(self, vec: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return self.compiled().apply(vec, out)

    def expectation(self, vec: np.ndarray) -> complex:
        return self.compiled().expectation(vec)

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        m = np.zeros((dim, dim), dtype=complex)
        for letters, coeff in self._table.items():
            m += coeff * PauliString(letters).to_matrix()
        return m

    def restricted_to(self, sites: tuple[int, ...]) -> "PauliSum":
        """Sub-sum of strings whose support lies inside `sites` (identity dropped)."""
        keep = set(sites)
        out = PauliSum(self.n_qubits)
        for letters, coeff in self._table.items():
            sup = PauliString(letters).support
            if sup and set(sup) <= keep:
                out._add_term(letters, coeff)
        return out


def project_nontrivial(op: PauliSum, sites: Iterable[int]) -> PauliSum:
    """Drop every string acting as the identity on all of `sites` (the P_S projector)."""
    sites = tuple(sites)
    out = PauliSum(op.n_qubits)
    for letters, coeff in op._table.items():
        if not PauliString(letters).acts_trivially_on(sites):
            out._add_term(letters, coeff)
    return out


def pauli_basis_strings(sites: tuple[int, ...], n_qubits: int) -> list[PauliString]:
    """All 4^k - 1 nontrivial Pauli strings supported on `sites`."""
    out = []
    k = len(sites)
    for code in range(1, 4**k):
        ops = {}
        c = code
        for s in sites:
            letter = "IXYZ"[c % 4]
            c //= 4
            if letter != "I":
                ops[s] = letter
        out.append(PauliString.from_ops(n_qubits, ops))
    return out
