import itertools

import numpy as np
import pytest

from chronoscope.hamlib import HamiltonianSpec, build_ising
from chronoscope.pauli import PauliString
from chronoscope.qcore import ChronoscopeError, StateVector
from chronoscope.sdo import direct_two_time_correlator, sdo_build, sdo_correlator
from conftest import random_state


def test_direct_correlator_single_qubit_analytic():
    h = HamiltonianSpec(1, ((1.0, PauliString("X")),))
    zero = StateVector.computational(1, 0)
    for t in (0.0, 0.37, 1.1):
        c = direct_two_time_correlator(zero, h, PauliString("Z"), 0.0, PauliString("Z"), t)
        assert c == pytest.approx(np.cos(2 * t), abs=1e-12)
    # |+>, H=Z: Re <X(t)X(0)> = cos(2t)
    hz = HamiltonianSpec(1, ((1.0, PauliString("Z")),))
    plus = StateVector.from_amplitudes([1, 1], normalize=True)
    for t in (0.21, 0.9):
        c = direct_two_time_correlator(plus, hz, PauliString("X"), 0.0, PauliString("X"), t)
        assert c.real == pytest.approx(np.cos(2 * t), abs=1e-12)


def test_direct_equal_time_projector():
    h = build_ising(2, 1.0, 0.1, -0.2)
    st = StateVector.computational(2, 0)
    c = direct_two_time_correlator(st, h, PauliString.from_ops(2, {0: "Z"}), 0.3,
                                   PauliString.from_ops(2, {0: "Z"}), 0.3)
    assert c == pytest.approx(1.0, abs=1e-12)


def test_sdo_matches_direct_on_single_qubit_system():
    h = HamiltonianSpec(1, ((1.0, PauliString("X")),))
    zero = StateVector.computational(1, 0)
    t = 0.63
    sdo = sdo_build(zero, h, (0,), 0.0, (0,), t)
    assert sdo_correlator(sdo, "Z", "Z") == pytest.approx(np.cos(2 * t), abs=1e-12)
    assert sdo_correlator(sdo, "I", "I") == pytest.approx(1.0, abs=1e-12)


def test_sdo_product_state_z_moments():
    h = HamiltonianSpec(2, ())
    st = StateVector.computational(2, "00")
    sdo = sdo_build(st, h, (0,), 0.0, (1,), 0.0)
    assert sdo_correlator(sdo, "Z", "Z") == pytest.approx(1.0, abs=1e-13)
    assert sdo_correlator(sdo, "Z", "I") == pytest.approx(1.0, abs=1e-13)
    assert sdo_correlator(sdo, "X", "I") == pytest.approx(0.0, abs=1e-13)


def test_sdo_completeness_random_instances(rng):
    # every two-time Pauli correlator from one SDO matches the direct oracle
    checked = 0
    for trial in range(10):
        n = int(rng.choice([3, 4, 5, 6]))
        h = build_ising(n, 1.0, float(rng.uniform(-0.4, 0.4)), float(rng.uniform(-0.5, 0.5)))
        st = random_state(rng, n)
        na = int(rng.choice([1, 2]))
        nb = int(rng.choice([1, 2]))
        sites = rng.choice(n, size=na + nb, replace=False)
        a_sites = tuple(int(s) for s in sites[:na])
        b_sites = tuple(int(s) for s in sites[na:])
        t_a = float(rng.uniform(-0.4, 0.4))
        t_b = float(rng.uniform(-0.4, 0.4))
        sdo = sdo_build(st, h, a_sites, t_a, b_sites, t_b)
        mat = sdo.matrix
        assert abs(np.trace(mat) - 1.0) < 1e-10
        assert np.linalg.eigvalsh(mat).min() > -1e-11
        for oa in itertools.product("IXYZ", repeat=na):
            for ob in itertools.product("IXYZ", repeat=nb):
                got = sdo_correlator(sdo, "".join(oa), "".join(ob))
                pa = PauliString.from_ops(n, {s: c for s, c in zip(a_sites, oa) if c != "I"})
                pb = PauliString.from_ops(n, {s: c for s, c in zip(b_sites, ob) if c != "I"})
                want = direct_two_time_correlator(st, h, pa, t_a, pb, t_b)
                assert abs(got - want) < 1e-10, (trial, oa, ob)
                checked += 1
    assert checked >= 50


def test_sdo_hermiticity_pairing_symmetric_instance():
    # stationary state: correlator(O_A, O_B) = conj(correlator(O_B, O_A))
    n = 3
    h = build_ising(n, 1.0, 0.0, -0.5)
    evals, evecs = np.linalg.eigh(h.to_matrix())
    st = StateVector.from_amplitudes(evecs[:, 0])
    t = 0.4
    c_ab = direct_two_time_correlator(st, h, PauliString.from_ops(n, {0: "X"}), 0.0,
                                      PauliString.from_ops(n, {2: "Z"}), t)
    c_ba = direct_two_time_correlator(st, h, PauliString.from_ops(n, {2: "Z"}), t,
                                      PauliString.from_ops(n, {0: "X"}), 0.0)
    assert c_ab == pytest.approx(np.conj(c_ba), abs=1e-11)


def test_sdo_round_order_equivalence(rng):
    n = 4
    h = build_ising(n, 1.0, 0.2, -0.3)
    st = random_state(rng, n)
    s1 = sdo_build(st, h, (0, 2), 0.1, (3,), 0.4)
    s2 = sdo_build(st, h, (0, 2), 0.1, (3,), 0.4, interleaved=True)
    assert np.abs(s1.matrix - s2.matrix).max() == 0.0


def test_sdo_preconditions(rng):
    n = 4
    h = build_ising(n, 1.0, 0.2, -0.3)
    st = random_state(rng, n)
    with pytest.raises(ChronoscopeError):
        sdo_build(st, h, (1,), 0.0, (1,), 0.0)  # equal-time overlap
    with pytest.raises(ChronoscopeError):
        sdo_build(st, h, (0, 1, 2), 0.0, (3, 2), 0.5)  # 3 + 2 exceeds the budget
    with pytest.raises(ChronoscopeError):
        sdo_correlator(sdo_build(st, h, (0,), 0.0, (1,), 0.2), "Q", "Z")


def test_sdo_same_site_different_times_allowed(rng):
    n = 3
    h = build_ising(n, 1.0, 0.2, -0.3)
    st = random_state(rng, n)
    sdo = sdo_build(st, h, (1,), 0.0, (1,), 0.5)
    want = direct_two_time_correlator(st, h, PauliString.from_ops(n, {1: "X"}), 0.0,
                                      PauliString.from_ops(n, {1: "Y"}), 0.5)
    assert sdo_correlator(sdo, "X", "Y") == pytest.approx(want, abs=1e-11)
