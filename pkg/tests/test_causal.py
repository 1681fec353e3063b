import numpy as np
import pytest

from chronoscope.causal import (
    CiValue,
    MomentCoefficients,
    ci_closed_form,
    ci_exact,
    ci_monte_carlo,
    ci_short_time_diff,
    ci_short_time_same,
    gamma,
    haar_unitary,
    hs_observable,
    spectral_overlap,
    theta,
)
from chronoscope.hamlib import HamiltonianSpec, build_ising, build_pxp
from chronoscope.pauli import SIGMA, PauliString
from chronoscope.qcore import DenseOperator, StateVector, partial_trace, purity
from conftest import random_state

TWO_QUBIT_H = HamiltonianSpec(2, ((1.0, PauliString("XZ")),))
TWO_QUBIT_STATE = StateVector.product([[1, 0], [1 / np.sqrt(2), 1j / np.sqrt(2)]])


def test_moment_coefficients_identities():
    for d in (2, 4, 16):
        m = MomentCoefficients(d)
        assert m.a * d**2 + m.b * d == pytest.approx(1.0, abs=1e-15)
        assert m.a * d + m.b * d**2 == pytest.approx(2 * d / (d**2 + 1), abs=1e-15)


def test_hs_measure_second_moments_match_monte_carlo(rng):
    # anti-drift guard: the derived weight E[c_mu c_nu] = a d_{mu0}d_{nu0} + (b/d) d_{mu nu}
    d = 2
    m = MomentCoefficients(d)
    n_samp = 40000
    sigmas = [SIGMA[c] for c in "IXYZ"]
    acc = np.zeros((4, 4))
    for _ in range(n_samp):
        o = hs_observable(d, rng)
        c = np.array([np.real(np.trace(s @ o)) / d for s in sigmas])
        acc += np.outer(c, c)
    acc /= n_samp
    want = np.zeros((4, 4))
    want[0, 0] = m.a + m.b / d
    for i in range(1, 4):
        want[i, i] = m.b / d
    assert np.abs(acc - want).max() < 6e-3  # ~5 sigma of the sampling noise


def test_haar_unitary_is_unitary(rng):
    for d in (2, 4):
        u = haar_unitary(d, rng)
        assert np.abs(u.conj().T @ u - np.eye(d)).max() < 1e-12


def test_two_qubit_example_exact():
    for t in np.linspace(0.0, np.pi, 25):
        v = ci_exact(TWO_QUBIT_STATE, TWO_QUBIT_H, 0, 1, float(t))
        assert v.value == pytest.approx(np.sin(2 * t) ** 2 / 60, abs=1e-12)
        assert v.method == "exact-closed-form"


def test_two_qubit_example_zero_for_z_basis_state():
    st = StateVector.product([[1, 0], [1, 0]])
    for t in (0.3, 0.9, 2.0):
        assert ci_exact(st, TWO_QUBIT_H, 0, 1, t).value < 1e-14


def test_same_site_constant():
    # t=0, A=B, pure product -> 1/20
    st = StateVector.product([[1, 0], [0.6, 0.8]])
    h = build_ising(2, 1.0, 0.0, 0.0)
    assert ci_exact(st, h, 0, 0, 0.0).value == pytest.approx(1 / 20, abs=1e-14)
    # maximally mixed reduced state -> 0
    bell = StateVector.from_amplitudes([1, 0, 0, 1], normalize=True)
    assert ci_exact(bell, h, 0, 0, 0.0).value == pytest.approx(0.0, abs=1e-14)


def test_equal_time_disjoint_is_exactly_zero(rng):
    h = build_ising(5, 1.0, 0.3, -0.2)
    for _ in range(5):
        st = random_state(rng, 5)
        a, b = rng.choice(5, size=2, replace=False)
        assert ci_exact(st, h, int(a), int(b), 0.0).value == 0.0


def test_no_coupling_means_no_influence(rng):
    # H acting trivially on A: sigma_B(t) never develops support on A
    n = 4
    terms = tuple((1.0, PauliString.from_ops(n, {j: "X", j + 1: "X"})) for j in (1, 2))
    h = HamiltonianSpec(n, terms)  # site 0 untouched
    st = random_state(rng, n)
    for t in (0.3, 1.1):
        assert ci_exact(st, h, 0, 2, t).value < 1e-25


def test_positivity_and_route_equivalence_random(rng):
    h_by_n = {n: build_ising(n, 1.0, 0.3, -0.5) for n in (4, 5, 6)}
    for _ in range(40):
        n = int(rng.choice([4, 5, 6]))
        st = random_state(rng, n)
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n))
        t = float(rng.uniform(-1.5, 1.5))
        v1 = ci_exact(st, h_by_n[n], a, b, t).value
        v2 = ci_closed_form(st, h_by_n[n], a, b, t)
        assert v1 >= -1e-12
        assert abs(v1 - v2) < 1e-9


def test_monte_carlo_converges_to_exact(rng):
    t = 0.7
    mc = ci_monte_carlo(TWO_QUBIT_STATE, TWO_QUBIT_H, (0,), (1,), t, n_samples=100000, seed=11)
    exact = np.sin(2 * t) ** 2 / 60
    assert abs(mc.value - exact) < 3 * mc.stderr
    assert mc.method == "monte-carlo"


def test_monte_carlo_zero_hamiltonian(rng):
    h0 = HamiltonianSpec(3, ())
    st = random_state(rng, 3)
    mc = ci_monte_carlo(st, h0, (0,), (2,), 0.5, n_samples=2000, seed=3)
    assert abs(mc.value) <= max(3 * mc.stderr, 1e-12)


def test_monte_carlo_fixed_observable_variance_zero(rng):
    st = random_state(rng, 3)
    h = build_ising(3, 1.0, 0.1, -0.2)
    mc = ci_monte_carlo(st, h, (0,), (2,), 0.4, n_samples=400, seed=5,
                        fixed_observable=np.eye(2) / 2)
    assert mc.value < 1e-30  # variance of a constant: zero at float precision


def test_monte_carlo_multi_site_regions(rng):
    st = random_state(rng, 4)
    h = build_ising(4, 1.0, 0.1, -0.2)
    mc = ci_monte_carlo(st, h, (0, 1), (2, 3), 0.0, n_samples=2000, seed=9)
    assert mc.value > 0  # overlapping-time joint regions see the kick immediately
    with pytest.raises(ValueError):
        ci_monte_carlo(st, h, (0,), (1,), 0.1, n_samples=50, seed=1)


def test_ci_exact_cross_check_path():
    v = ci_exact(TWO_QUBIT_STATE, TWO_QUBIT_H, 0, 1, 0.45, cross_check=True,
                 mc_samples=20000, seed=2)
    assert v.value == pytest.approx(np.sin(0.9) ** 2 / 60, abs=1e-10)


def test_civalue_positivity_guard():
    with pytest.raises(Exception):
        CiValue(-1e-6, "exact-closed-form")


# ---- Theta -----------------------------------------------------------------


def test_theta_bell_spectrum():
    bell = StateVector.from_amplitudes([1, 0, 0, 1], normalize=True)
    th = theta(bell, 0)
    assert sorted(th.eigenvalues) == pytest.approx(sorted([1 / 3, 1 / 3, 1 / 3, 0.0]))
    assert th.min_eigenvalue() > -1e-12


def test_theta_matrix_spectrum_matches_table(rng):
    for _ in range(25):
        n = int(rng.choice([4, 5, 6]))
        st = random_state(rng, n)
        a = int(rng.integers(0, n))
        th = theta(st, a)
        got = np.sort(np.linalg.eigvalsh(th.matrix))
        want = np.sort(np.array(th.eigenvalues))
        assert np.abs(got - want).max() < 1e-9
        # trace identities: full trace is the eigenvalue sum; the off-diagonal
        # (entanglement) sector carries d(1-||rho_A||_F^2)/3
        p = purity(partial_trace(st, (a,)))
        d = 1 << n
        assert th.offdiag_trace == pytest.approx(d * (1 - p) / 3, abs=1e-9)
        assert th.trace == pytest.approx(np.sum(got), abs=1e-9)
        assert th.min_eigenvalue() > -1e-12


def test_theta_product_state_quadratic_form(rng):
    # (xi|Theta|xi) = |tr(rho_{A^c} xi)|^2 / 3 for product states
    n = 4
    single = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(n)]
    st = StateVector.product(single)
    th = theta(st, 0)
    rho_c = partial_trace(st, tuple(range(1, n))).matrix
    for _ in range(5):
        xi = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        xi = xi + xi.conj().T
        got = th.quadratic_form(xi)
        want = abs(np.trace(rho_c @ xi)) ** 2 / 3
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_theta_unentangled_offdiagonal_channels_closed():
    st = StateVector.product([[1, 0], [0.6, 0.8], [1, 1]])
    th = theta(st, 0)
    assert th.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)  # d p1 p2 / 3 = 0


# ---- gamma -----------------------------------------------------------------


def test_gamma_two_qubit_rank_one_on_grid():
    x_b = DenseOperator((1,), SIGMA["X"])
    for t in np.linspace(0, np.pi, 40):
        g = gamma(TWO_QUBIT_H, x_b, 0, float(t))
        u_x = g.dense_components[0]
        want = -np.sin(2 * t) * SIGMA["Y"]
        assert np.abs(u_x - want).max() < 1e-12
        assert np.abs(g.dense_components[1]).max() < 1e-12
        assert np.abs(g.dense_components[2]).max() < 1e-12
        if abs(np.sin(2 * t)) > 1e-8:
            assert g.rank == 1


def test_gamma_zero_cases():
    # t=0 and A != B: P_A kills 1 x O_B
    g0 = gamma(TWO_QUBIT_H, DenseOperator((1,), SIGMA["X"]), 0, 0.0)
    assert g0.rank == 0
    # O_B commuting with H: gamma = 0 for all t
    gz = gamma(TWO_QUBIT_H, DenseOperator((1,), SIGMA["Z"]), 0, 0.9)
    assert gz.rank == 0


def test_spectral_overlap_routes(rng):
    # orthogonal supports -> 0; null-vector alignment -> 0; reproduces ci_exact
    st = TWO_QUBIT_STATE
    th = theta(st, 0)
    for t in (0.3, 0.8):
        total = 0.0
        for letter in "XYZ":
            g = gamma(TWO_QUBIT_H, DenseOperator((1,), SIGMA[letter]), 0, t)
            total += spectral_overlap(th, g)
        want = np.sin(2 * t) ** 2 / 60 * 20  # ci = total / 20
        assert total == pytest.approx(want, abs=1e-10)


def test_spectral_overlap_null_direction():
    bell = StateVector.from_amplitudes([1, 0, 0, 1], normalize=True)
    th = theta(bell, 0)
    p1, p2 = th.weights
    phi = th.complement_vectors
    null_op = p2 * np.outer(phi[0], phi[0].conj()) + p1 * np.outer(phi[1], phi[1].conj())
    assert th.quadratic_form(null_op) == pytest.approx(0.0, abs=1e-12)


# ---- short time ------------------------------------------------------------


def test_short_time_same_constant_terms():
    st = StateVector.product([[1, 0], [0.6, 0.8]])
    h = build_ising(2, 1.0, 0.0, 0.0)
    assert ci_short_time_same(st, h, 0, 0.0).value == pytest.approx(1 / 20)
    bell = StateVector.from_amplitudes([1, 0, 0, 1], normalize=True)
    assert ci_short_time_same(bell, h, 0, 0.0).value == pytest.approx(0.0, abs=1e-14)


def test_short_time_same_richardson(rng):
    n = 5
    h = build_ising(n, 1.0, 0.4, -0.3)
    st = random_state(rng, n)
    diffs = []
    for dt in (0.04, 0.02, 0.01):
        ex = ci_exact(st, h, 2, 2, dt).value
        sh = ci_short_time_same(st, h, 2, dt).value
        diffs.append(abs(ex - sh))
    assert diffs[0] / diffs[1] > 3.5  # at least O(dt^2) convergence of the remainder
    assert diffs[1] / diffs[2] > 3.5


def test_short_time_diff_richardson_and_limit(rng):
    n = 5
    h = build_ising(n, 1.0, 0.4, -0.3)
    st = random_state(rng, n)
    diffs, ratios = [], []
    for dt in (0.04, 0.02, 0.01):
        ex = ci_exact(st, h, 2, 3, dt).value
        sh = ci_short_time_diff(st, h, 2, 3, dt).value
        diffs.append(abs(ex - sh))
        ratios.append(sh / ex)
    assert diffs[0] / diffs[1] > 3.5
    assert abs(ratios[-1] - 1.0) < 0.02  # ratio -> 1


def test_short_time_diff_general_form_with_three_site_terms(rng):
    h = build_pxp(5)
    st = random_state(rng, 5)
    diffs = []
    for dt in (0.04, 0.02):
        ex = ci_exact(st, h, 1, 2, dt).value
        sh = ci_short_time_diff(st, h, 1, 2, dt).value
        diffs.append(abs(ex - sh))
    assert diffs[0] / diffs[1] > 3.5


def test_short_time_diff_two_qubit_leading_term():
    # bracket equals J^2: CI ~ dt^2 J^2 / 15, the series head of sin^2(2J dt)/60
    j = 1.3
    h = HamiltonianSpec(2, ((j, PauliString("XZ")),))
    for dt in (0.05, 0.02):
        sh = ci_short_time_diff(TWO_QUBIT_STATE, h, 0, 1, dt).value
        assert sh == pytest.approx(dt**2 * j**2 / 15, rel=1e-10)


def test_short_time_diff_commuting_case_zero(rng):
    # no A<->A^c coupling: the expansion vanishes identically
    n = 4
    terms = tuple((1.0, PauliString.from_ops(n, {j: "X", j + 1: "X"})) for j in (1, 2))
    h = HamiltonianSpec(n, terms)
    st = random_state(rng, n)
    assert ci_short_time_diff(st, h, 0, 1, 0.1).value == 0.0
    with pytest.raises(ValueError):
        ci_short_time_diff(st, h, 2, 2, 0.1)
