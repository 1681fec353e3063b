import subprocess
import sys

import numpy as np

from chronoscope.kernels import CompiledPauliSum, backend_name
from chronoscope.kernels.fallback import apply_terms as fallback_apply
from chronoscope.pauli import PauliString, PauliSum


def test_backend_selected():
    assert backend_name() in ("compiled", "fallback")


def test_fallback_matches_active_backend(rng):
    n = 6
    dim = 1 << n
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    terms = []
    for _ in range(8):
        letters = "".join(rng.choice(list("IXYZ"), size=n))
        terms.append((complex(rng.normal(), rng.normal()), PauliString(letters)))
    ps = PauliSum.from_strings(n, terms)
    active = ps.apply(vec)
    compiled = ps.compiled()
    out = np.zeros(dim, dtype=np.complex128)
    fallback_apply(np.ascontiguousarray(vec, dtype=np.complex128), out,
                   compiled.flips, compiled.pmasks, compiled.weights)
    assert np.abs(active - out).max() < 1e-13
    dense = ps.to_matrix() @ vec
    assert np.abs(active - dense).max() < 1e-12


def test_pure_python_env_forces_fallback():
    code = (
        "import os; os.environ['CHRONOSCOPE_PURE_PYTHON']='1';"
        "from chronoscope.kernels import backend_name; print(backend_name())"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert out.stdout.strip() == "fallback"


def test_compiled_sum_empty_terms(rng):
    ps = CompiledPauliSum(3, [])
    vec = rng.normal(size=8) + 1j * rng.normal(size=8)
    assert np.abs(ps.apply(vec)).max() == 0.0
