import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronoscope.pauli import PauliString, PauliSum, pauli_basis_strings, project_nontrivial


def test_group_law_exhaustive_one_and_two_sites():
    for n in (1, 2):
        letters = ["".join(c) for c in itertools.product("IXYZ", repeat=n)]
        for la in letters:
            for lb in letters:
                a, b = PauliString(la), PauliString(lb)
                prod = a * b
                dense = a.to_matrix() @ b.to_matrix()
                assert np.allclose(prod.to_matrix(), dense, atol=0), (la, lb)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from("IXYZ"), min_size=3, max_size=5),
       st.lists(st.sampled_from("IXYZ"), min_size=3, max_size=5))
def test_group_law_random_strings(la, lb):
    n = min(len(la), len(lb))
    a = PauliString("".join(la[:n]))
    b = PauliString("".join(lb[:n]))
    assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix())


def test_masks_match_dense_application(rng):
    n = 4
    vec = rng.normal(size=16) + 1j * rng.normal(size=16)
    for _ in range(20):
        letters = "".join(rng.choice(list("IXYZ"), size=n))
        s = PauliString(letters)
        got = s.apply(vec)
        want = s.to_matrix() @ vec
        assert np.abs(got - want).max() < 1e-13


def test_phase_validation():
    with pytest.raises(ValueError):
        PauliString("XZ", phase=0.5)
    with pytest.raises(ValueError):
        PauliString("AB")


def test_commutes_with():
    assert not PauliString("X").commutes_with(PauliString("Z"))
    assert PauliString("XX").commutes_with(PauliString("ZZ"))
    assert PauliString("XZZXI").commutes_with(PauliString("IXZZX"))


def test_pauli_sum_algebra(rng):
    n = 3
    a = PauliSum.from_strings(n, [(0.5, PauliString("XIZ")), (1j, PauliString("YYI"))])
    b = PauliSum.from_strings(n, [(2.0, PauliString("ZZI"))])
    assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix())
    assert np.allclose((a + b).to_matrix(), a.to_matrix() + b.to_matrix())
    assert np.allclose(a.dagger().to_matrix(), a.to_matrix().conj().T)


def test_project_nontrivial_examples():
    # P_{1}(1 x X) -> 0
    op = PauliSum.from_strings(2, [(1.0, PauliString("IX"))])
    assert len(project_nontrivial(op, [0])) == 0
    # P_{0}(X x 1 + 1 x Z) -> X x 1
    op2 = PauliSum.from_strings(2, [(1.0, PauliString("XI")), (1.0, PauliString("IZ"))])
    kept = project_nontrivial(op2, [0])
    assert dict(kept.items()) == {"XI": 1.0 + 0j}


def test_project_nontrivial_idempotent(rng):
    n = 4
    for _ in range(10):
        terms = []
        for _ in range(6):
            letters = "".join(rng.choice(list("IXYZ"), size=n))
            terms.append((complex(rng.normal(), rng.normal()), PauliString(letters)))
        op = PauliSum.from_strings(n, terms)
        sites = tuple(rng.choice(n, size=2, replace=False))
        once = project_nontrivial(op, sites)
        twice = project_nontrivial(once, sites)
        assert dict(once.items()) == dict(twice.items())


def test_pauli_basis_strings_count():
    strings = pauli_basis_strings((0, 2), 3)
    assert len(strings) == 15
    assert all(s.n_qubits == 3 for s in strings)
