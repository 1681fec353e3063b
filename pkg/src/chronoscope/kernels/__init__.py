"""Kernel backend selection: compiled Cython core with pure-numpy fallback.

Set CHRONOSCOPE_PURE_PYTHON=1 to force the fallback (used by the benchmark
to compare both paths on the same machine).
"""

import os

import numpy as np

if os.environ.get("CHRONOSCOPE_PURE_PYTHON") == "1":
    from chronoscope.kernels.fallback import apply_terms

    BACKEND = "fallback"
else:
    try:
        from chronoscope.kernels._pauli_cy import apply_terms

        BACKEND = "compiled"
    except ImportError:
        from chronoscope.kernels.fallback import apply_terms

        BACKEND = "fallback"


def backend_name() -> str:
    return BACKEND


class CompiledPauliSum:
    """A Pauli-sum operator lowered to flip/phase masks for the kernel.

    Terms are (weight, flip_mask, phase_mask) with site 0 mapped to the most
    significant bit of the amplitude index; i^{#Y} is folded into the weight.
    """

    __slots__ = ("n_qubits", "dim", "flips", "pmasks", "weights")

    def __init__(self, n_qubits, terms):
        self.n_qubits = n_qubits
        self.dim = 1 << n_qubits
        nt = len(terms)
        self.flips = np.zeros(nt, dtype=np.int64)
        self.pmasks = np.zeros(nt, dtype=np.int64)
        self.weights = np.zeros(nt, dtype=np.complex128)
        for k, (weight, flip, pmask) in enumerate(terms):
            self.flips[k] = flip
            self.pmasks[k] = pmask
            self.weights[k] = weight

    def apply(self, vec, out=None):
        """Return (this operator) @ vec; `out` may be preallocated."""
        if out is None:
            out = np.zeros(self.dim, dtype=np.complex128)
        else:
            out[:] = 0.0
        apply_terms(np.ascontiguousarray(vec, dtype=np.complex128), out,
                    self.flips, self.pmasks, self.weights)
        return out

    def expectation(self, vec):
        return complex(np.vdot(vec, self.apply(vec)))
