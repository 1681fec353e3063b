import numpy as np
import pytest

from chronoscope.hamlib import (
    HamiltonianSpec,
    build_ising,
    build_pxp,
    dense_evolver,
    evolve,
    evolve_dense,
    heisenberg_site_decomposition,
)
from chronoscope.pauli import PauliString
from chronoscope.qcore import StateVector, pad_identity
from conftest import pauli_coefficients, random_state


def test_build_ising_structure():
    h = build_ising(2, 1.0, 0.0, 0.0)
    assert len(h.terms) == 1
    assert h.terms[0][1].letters == "XX"
    h3 = build_ising(3, 1.0, 0.01, -0.21)
    assert len(h3.terms) == 2 + 3 + 3
    with pytest.raises(ValueError):
        build_ising(1, 1.0, 0, 0)


def test_ising_two_site_spectrum():
    h = build_ising(2, 1.0, 0.0, 0.0)
    evals = np.sort(np.linalg.eigvalsh(h.to_matrix()))
    assert np.allclose(evals, [-1, -1, 1, 1])


def test_hamiltonian_validation():
    with pytest.raises(ValueError):
        HamiltonianSpec(2, ((1j, PauliString("XX")),))
    with pytest.raises(ValueError):
        HamiltonianSpec(2, ((1.0, PauliString("XXX")),))


def test_build_pxp_expansion():
    h = build_pxp(3)
    table = dict(h.to_pauli_sum().items())
    # bulk term (1+Z)X(1+Z)/4 contributes 4 strings at 1/4
    for letters in ("IXI", "ZXI", "IXZ", "ZXZ"):
        assert table[letters] == pytest.approx(0.25)
    with pytest.raises(ValueError):
        build_pxp(2)


def test_pxp_annihilates_fully_excited():
    h = build_pxp(5)
    ones = StateVector.computational(5, "11111")
    assert np.linalg.norm(h.apply(ones.amplitudes)) < 1e-14


def test_pxp_neel_revival():
    h = build_pxp(8)
    neel = StateVector.computational(8, "01010101")
    u = dense_evolver(h)
    fids = []
    for t in np.arange(3.5, 6.0, 0.05):
        amp = u(t) @ neel.amplitudes
        fids.append(abs(np.vdot(neel.amplitudes, amp)) ** 2)
    assert max(fids) > 0.7


def test_evolve_identity_and_tolerance_domain(rng):
    st = random_state(rng, 4)
    h = build_ising(4, 1.0, 0.1, -0.2)
    res = evolve(st, h, 0.0)
    assert np.array_equal(res.state.amplitudes, st.amplitudes)
    for bad in (1e-15, 1e-3):
        with pytest.raises(ValueError):
            evolve(st, h, 0.1, tol=bad)


def test_single_qubit_rotation_analytic():
    h = HamiltonianSpec(1, ((1.0, PauliString("Z")),))
    plus = StateVector.from_amplitudes([1, 1], normalize=True)
    t = 0.77
    res = evolve(plus, h, t, 1e-12)
    want = np.array([np.exp(-1j * t), np.exp(1j * t)]) / np.sqrt(2)
    assert np.abs(res.state.amplitudes - want).max() < 1e-12


def test_evolve_matches_dense_and_unitary(rng):
    for n in (3, 6, 8):
        st = random_state(rng, n)
        h = build_ising(n, 1.0, 0.01, -0.21)
        for t in (0.13, -2.7):
            tol = 1e-11
            res = evolve(st, h, t, tol)
            exact = evolve_dense(st, h, t)
            assert np.linalg.norm(res.state.amplitudes - exact.amplitudes) <= tol
            assert res.residual_estimate <= tol
            assert abs(res.state.norm - 1.0) < 1e-12
            back = evolve(res.state, h, -t, tol)
            assert np.linalg.norm(back.state.amplitudes - st.amplitudes) <= 2 * tol


def test_energy_conservation(rng):
    n = 6
    h = build_ising(n, 1.0, 0.3, -0.5)
    st = random_state(rng, n)
    e0 = h.expectation(st)
    for _ in range(1000):
        st = evolve(st, h, 0.01, 1e-12).state
    assert abs(h.expectation(st) - e0) < 1e-9


def test_heisenberg_matches_schrodinger(rng):
    n, tau = 5, 0.4
    h = build_ising(n, 1.0, 0.2, -0.3)
    st = random_state(rng, n)
    x, q = 2, 3
    for alpha in "XYZ":
        nus = heisenberg_site_decomposition(h, alpha, x, q, tau, dense=True)
        # rebuild sigma^alpha_x(tau) from the parts and take <.> in the t=0 state
        rest = tuple(i for i in range(n) if i != q)
        from chronoscope.qcore import DenseOperator

        full = pad_identity(DenseOperator(rest, nus["0"]), n)
        for beta in "XYZ":
            sig_q = PauliString.from_ops(n, {q: beta}).to_matrix()
            full = full + sig_q @ pad_identity(DenseOperator(rest, nus[beta]), n)
        heis = np.vdot(st.amplitudes, full @ st.amplitudes)
        evolved = evolve(st, h, tau, 1e-12).state
        schro = np.vdot(evolved.amplitudes,
                        PauliString.from_ops(n, {x: alpha}).apply(evolved.amplitudes))
        assert abs(heis - schro) < 1e-10


def test_heisenberg_decomposition_reconstructs_operator(rng):
    n, tau = 4, 0.3
    h = build_ising(n, 1.0, 0.05, -0.4)
    x, q = 1, 2
    u = dense_evolver(h)(tau)
    for alpha in "XYZ":
        nus = heisenberg_site_decomposition(h, alpha, x, q, tau, dense=True)
        rest = tuple(i for i in range(n) if i != q)
        from chronoscope.qcore import DenseOperator

        full = pad_identity(DenseOperator(rest, nus["0"]), n)
        for beta in "XYZ":
            sig_q = PauliString.from_ops(n, {q: beta}).to_matrix()
            full = full + sig_q @ pad_identity(DenseOperator(rest, nus[beta]), n)
        want = u.conj().T @ PauliString.from_ops(n, {x: alpha}).to_matrix() @ u
        assert np.abs(full - want).max() < 1e-10


def test_heisenberg_no_spreading_at_tau_zero():
    n = 4
    h = build_ising(n, 1.0, 0.0, 0.0)
    nus = heisenberg_site_decomposition(h, "Y", 1, 3, 0.0, dense=True)
    want = PauliString.from_ops(n - 1, {1: "Y"}).to_matrix()  # q^c sites (0,1,2)
    assert np.abs(nus["0"] - want).max() < 1e-14
    for beta in "XYZ":
        assert np.abs(nus[beta]).max() < 1e-14


def test_ising_nu_exact_forms():
    # nu^{YX} = -sin(2t)[cos(2t) Z_x + sin(2t) X_x' Y_x];
    # nu^{ZX} = +sin(2t)[cos(2t) Y_x - sin(2t) X_x' Z_x]
    n, tau = 5, 0.37
    q, x = 2, 3
    xp = 4
    h = build_ising(n, 1.0, 0.0, 0.0)
    rest = [i for i in range(n) if i != q]
    ix, ixp = rest.index(x), rest.index(xp)
    nc = n - 1

    def site(letter, pos):
        return PauliString.from_ops(nc, {pos: letter}).to_matrix()

    nus_y = heisenberg_site_decomposition(h, "Y", x, q, tau, dense=True)
    want_yx = -np.sin(2 * tau) * (np.cos(2 * tau) * site("Z", ix)
                                  + np.sin(2 * tau) * site("X", ixp) @ site("Y", ix))
    assert np.abs(nus_y["X"] - want_yx).max() < 1e-12
    nus_z = heisenberg_site_decomposition(h, "Z", x, q, tau, dense=True)
    want_zx = np.sin(2 * tau) * (np.cos(2 * tau) * site("Y", ix)
                                 - np.sin(2 * tau) * site("X", ixp) @ site("Z", ix))
    assert np.abs(nus_z["X"] - want_zx).max() < 1e-12


def _far_weight(h, n, x, tau):
    u = dense_evolver(h)(tau)
    heis = u.conj().T @ PauliString.from_ops(n, {x: "Y"}).to_matrix() @ u
    coeffs = pauli_coefficients(heis, n)
    total = 0.0
    it = np.nditer(coeffs, flags=["multi_index"])
    for val in it:
        support = [i for i, a in enumerate(it.multi_index) if a != 0]
        if any(abs(i - x) > 2 for i in support):
            total += abs(complex(val))
    return total


def test_locality_cone(rng):
    # weight of sigma^Y_x(tau) beyond distance 2 from x is O(tau^3):
    # sharp (ratio ~ 8) for a generic nearest-neighbor chain where each
    # commutator order can extend the front by one site
    n, x = 6, 1
    terms = []
    for j in range(n - 1):
        terms.append((1.0, PauliString.from_ops(n, {j: "X", j + 1: "X"})))
        terms.append((0.7, PauliString.from_ops(n, {j: "Z", j + 1: "Z"})))
    for j in range(n):
        terms.append((0.2, PauliString.from_ops(n, {j: "X"})))
    h = HamiltonianSpec(n, tuple(terms))
    ratio = _far_weight(h, n, x, 0.1) / _far_weight(h, n, x, 0.05)
    assert 6.0 < ratio < 11.0
    # the pure-X-coupling chain is suppressed even harder (letter rotation
    # costs an extra order per hop), still within the O(tau^3) envelope
    h_ising = build_ising(n, 1.0, 0.2, -0.3)
    ratio_ising = _far_weight(h_ising, n, x, 0.1) / _far_weight(h_ising, n, x, 0.05)
    assert ratio_ising > 7.0


def test_dense_mode_cap():
    h = build_ising(12, 1.0, 0.0, 0.0)
    with pytest.raises(Exception):
        heisenberg_site_decomposition(h, "Y", 1, 2, 0.1, dense=True, dense_site_cap=10)


def test_matrix_free_mode_matches_dense(rng):
    n, tau, x, q = 5, 0.35, 1, 3
    h = build_ising(n, 1.0, 0.2, -0.3)
    st = random_state(rng, n)
    from chronoscope.qcore import schmidt_split

    pair = schmidt_split(st, q)
    free = heisenberg_site_decomposition(h, "Z", x, q, tau,
                                         complement_vectors=pair.complement_vectors)
    dense = heisenberg_site_decomposition(h, "Z", x, q, tau, dense=True)
    phis = pair.complement_vectors
    for beta in ("0", "X", "Y", "Z"):
        want = np.array([[phis[a].conj() @ dense[beta] @ phis[b] for b in range(2)]
                         for a in range(2)])
        assert np.abs(free[beta] - want).max() < 1e-10
    with pytest.raises(ValueError):
        heisenberg_site_decomposition(h, "Z", x, q, tau)  # needs vectors or dense
    with pytest.raises(ValueError):
        heisenberg_site_decomposition(h, "Q", x, q, tau, dense=True)
