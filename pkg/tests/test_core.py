import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapsim.core import (
    BELL_ORDER,
    BellOutcome,
    DensityMatrix,
    StateError,
    StateVector,
    bell_basis,
    bell_state,
    density_from_pure,
    inverse_permutation,
    joint_state,
    kron,
    partial_trace,
    pauli,
    permute_qubits,
    singlet,
    spin_operator,
    tensor,
)

from conftest import random_state, states

R2 = 1 / math.sqrt(2)


# -- brute-force oracles, written against bit strings rather than reshapes --


def permute_bruteforce(amps: np.ndarray, perm: tuple[int, ...]) -> np.ndarray:
    n = len(perm)
    out = np.zeros_like(amps)
    for idx in range(1 << n):
        old_bits = format(idx, f"0{n}b")
        new_bits = "".join(old_bits[q - 1] for q in perm)
        out[int(new_bits, 2)] = amps[idx]
    return out


def partial_trace_bruteforce(rho: np.ndarray, keep: tuple[int, ...], n: int) -> np.ndarray:
    traced = [q for q in range(1, n + 1) if q not in keep]
    d = 1 << len(keep)
    out = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            ib = format(i, f"0{len(keep)}b")
            jb = format(j, f"0{len(keep)}b")
            for t in range(1 << len(traced)):
                tb = format(t, f"0{len(traced)}b")
                row = ["0"] * n
                col = ["0"] * n
                for pos, q in enumerate(keep):
                    row[q - 1] = ib[pos]
                    col[q - 1] = jb[pos]
                for pos, q in enumerate(traced):
                    row[q - 1] = col[q - 1] = tb[pos]
                out[i, j] += rho[int("".join(row), 2), int("".join(col), 2)]
    return out


# -- tensor / kron --


def test_tensor_basis_states():
    s = tensor(StateVector.basis("0"), StateVector.basis("1"))
    np.testing.assert_array_equal(s.amplitudes, [0, 1, 0, 0])


def test_tensor_of_singlets_matches_joint_amplitudes():
    s = tensor(singlet(), singlet())
    expected = np.zeros(16)
    expected[[0b0101, 0b0110, 0b1001, 0b1010]] = [0.5, -0.5, -0.5, 0.5]
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)


def test_product_state_round_trip(rng):
    psi = random_state(rng, 2)
    rho = density_from_pure(tensor(psi, StateVector.basis("0")))
    reduced = partial_trace(rho, (1, 2), 3)
    np.testing.assert_allclose(reduced.matrix, density_from_pure(psi).matrix, atol=1e-12)


def test_kron_identity():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_zz_eigenbasis():
    zz = kron(pauli("z"), pauli("z"))
    np.testing.assert_array_equal(zz @ StateVector.basis("00").amplitudes, [1, 0, 0, 0])
    np.testing.assert_array_equal(zz @ StateVector.basis("01").amplitudes, [0, -1, 0, 0])


def test_singlet_zz_expectation():
    zz = np.diag([1.0, -1.0, -1.0, 1.0])
    v = np.array([0, R2, -R2, 0])
    assert v @ zz @ v == pytest.approx(-1.0, abs=1e-15)
    psi = singlet().amplitudes
    assert np.vdot(psi, kron(pauli("z"), pauli("z")) @ psi).real == pytest.approx(-1.0, abs=1e-12)


def test_kron_tensor_consistency(rng):
    for _ in range(50):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u = random_state(rng, 1)
        v = random_state(rng, 2)
        lhs = kron(a, b) @ tensor(u, v).amplitudes
        rhs = np.kron(a @ u.amplitudes, b @ v.amplitudes)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


# -- named states --


def test_singlet_amplitudes():
    np.testing.assert_allclose(singlet().amplitudes, [0, R2, -R2, 0], atol=1e-15)
    assert np.linalg.norm(singlet().amplitudes) == pytest.approx(1.0, abs=1e-15)


def test_bell_states_match_definitions():
    written = {
        BellOutcome.PSI_PLUS: [0, R2, R2, 0],
        BellOutcome.PSI_MINUS: [0, R2, -R2, 0],
        BellOutcome.PHI_PLUS: [R2, 0, 0, R2],
        BellOutcome.PHI_MINUS: [R2, 0, 0, -R2],
    }
    for label, vec in written.items():
        np.testing.assert_allclose(bell_state(label).amplitudes, vec, atol=1e-15)
    np.testing.assert_array_equal(bell_state(BellOutcome.PSI_MINUS).amplitudes, singlet().amplitudes)


def test_bell_gram_and_completeness():
    mat = np.column_stack([b.amplitudes for b in bell_basis()])
    np.testing.assert_allclose(mat.conj().T @ mat, np.eye(4), atol=1e-15)
    proj = sum(np.outer(b.amplitudes, b.amplitudes.conj()) for b in bell_basis())
    np.testing.assert_allclose(proj, np.eye(4), atol=1e-15)


def test_singlet_orthogonal_to_phi_plus():
    assert abs(np.vdot(singlet().amplitudes, bell_state("phi+").amplitudes)) < 1e-15


@pytest.mark.parametrize("text,label", [("psi+", BellOutcome.PSI_PLUS), ("PhiMinus", BellOutcome.PHI_MINUS),
                                        ("psi_minus", BellOutcome.PSI_MINUS), ("phi+", BellOutcome.PHI_PLUS)])
def test_bell_label_parsing(text, label):
    assert BellOutcome.parse(text) is label


def test_bell_label_parsing_rejects():
    with pytest.raises(ValueError):
        BellOutcome.parse("chi+")


def test_joint_state_amplitudes():
    s = joint_state()
    assert s.num_qubits == 4
    assert s.amplitude("0101") == pytest.approx(0.5)
    assert s.amplitude("0110") == pytest.approx(-0.5)
    assert s.amplitude("1001") == pytest.approx(-0.5)
    assert s.amplitude("1010") == pytest.approx(0.5)
    assert s.amplitude("1111") == 0
    others = [i for i in range(16) if i not in (0b0101, 0b0110, 0b1001, 0b1010)]
    assert np.all(s.amplitudes[others] == 0)


def test_joint_state_regroupings():
    regrouped = permute_qubits(joint_state(), (1, 4, 2, 3)).amplitudes

    def ket(bits):
        return StateVector.basis(bits).amplitudes

    computational = 0.5 * (
        np.kron(ket("01"), ket("10")) - np.kron(ket("00"), ket("11"))
        - np.kron(ket("11"), ket("00")) + np.kron(ket("10"), ket("01"))
    )
    np.testing.assert_allclose(regrouped, computational, atol=1e-12)

    def bb(label):
        b = bell_state(label).amplitudes
        return np.kron(b, b)

    bell = 0.5 * (bb("psi+") - bb("psi-") - bb("phi+") + bb("phi-"))
    np.testing.assert_allclose(regrouped, bell, atol=1e-12)


# -- Pauli / spin --


def test_pauli_actions():
    zero, one = StateVector.basis("0").amplitudes, StateVector.basis("1").amplitudes
    np.testing.assert_array_equal(pauli("z") @ zero, zero)
    np.testing.assert_array_equal(pauli("x") @ zero, one)
    np.testing.assert_array_equal(pauli("y") @ pauli("y"), np.eye(2))


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_pauli_hermitian_unitary_traceless(axis):
    p = pauli(axis)
    np.testing.assert_array_equal(p, p.conj().T)
    np.testing.assert_array_equal(p @ p.conj().T, np.eye(2))
    assert np.trace(p) == 0


def test_spin_operator_axes():
    np.testing.assert_array_equal(spin_operator((0, 0, 1)), pauli("z"))
    np.testing.assert_array_equal(spin_operator((1, 0, 0)), pauli("x"))


def test_spin_operator_eigenvalues_diagonal_direction():
    # 2x2 eigensolve by hand: n.sigma = [[c, c], [c, -c]] with c = 1/sqrt2 -> lambda^2 = 2c^2 = 1
    op = spin_operator((R2, 0, R2))
    np.testing.assert_allclose(np.linalg.eigvalsh(op), [-1, 1], atol=1e-12)


def test_spin_operator_rejects_non_unit():
    with pytest.raises(StateError):
        spin_operator((1, 1, 0))


# -- permutations --


def test_identity_permutation(rng):
    s = random_state(rng, 3)
    np.testing.assert_array_equal(permute_qubits(s, (1, 2, 3)).amplitudes, s.amplitudes)


def test_permute_round_trip(rng):
    s = random_state(rng, 4)
    perm = (3, 1, 4, 2)
    back = permute_qubits(permute_qubits(s, perm), inverse_permutation(perm))
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)


@pytest.mark.parametrize("perm", [(2, 1), (1, 3, 2), (3, 1, 2), (4, 3, 2, 1), (1, 4, 2, 3)])
def test_permute_matches_bruteforce(perm, rng):
    s = random_state(rng, len(perm))
    np.testing.assert_allclose(permute_qubits(s, perm).amplitudes, permute_bruteforce(s.amplitudes, perm))


@pytest.mark.parametrize("bad", [(1, 2), (1, 1, 2, 3), (0, 1, 2, 3), (1, 2, 3, 5)])
def test_permute_rejects_invalid(bad):
    with pytest.raises(StateError):
        permute_qubits(joint_state(), bad)


@settings(max_examples=60, deadline=None)
@given(states(4), st.permutations([1, 2, 3, 4]), st.permutations([1, 2, 3, 4]))
def test_permutation_composition(s, p, q):
    composed = tuple(p[k - 1] for k in q)
    lhs = permute_qubits(permute_qubits(s, p), q).amplitudes
    np.testing.assert_allclose(lhs, permute_qubits(s, composed).amplitudes, atol=1e-15)
    assert np.linalg.norm(lhs) == pytest.approx(1.0, abs=1e-12)


# -- density matrices and partial trace --


def test_density_of_zero():
    np.testing.assert_array_equal(density_from_pure(StateVector.basis("0")).matrix, np.diag([1, 0]))


def test_density_of_singlet():
    rho = density_from_pure(singlet()).matrix
    expected = np.zeros((4, 4))
    expected[1, 1] = expected[2, 2] = 0.5
    expected[1, 2] = expected[2, 1] = -0.5
    np.testing.assert_allclose(rho, expected, atol=1e-15)
    assert np.trace(rho) == pytest.approx(1.0)


def test_density_validation():
    with pytest.raises(StateError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(StateError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(StateError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_state_validation():
    with pytest.raises(StateError):
        StateVector(np.array([1.0, 1.0]))
    with pytest.raises(StateError):
        StateVector(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(StateError):
        StateVector(np.array([np.nan, 1.0]))


def test_state_is_immutable():
    s = singlet()
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0


def test_partial_trace_of_joint_state():
    rho = partial_trace(density_from_pure(joint_state()), (1, 4), 4)
    np.testing.assert_allclose(rho.matrix, np.eye(4) / 4, atol=1e-12)


def test_partial_trace_of_singlet():
    rho = partial_trace(density_from_pure(singlet()), (1,), 2)
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product_state(rng):
    psi, phi = random_state(rng, 1), random_state(rng, 2)
    rho = partial_trace(density_from_pure(tensor(psi, phi)), (1,), 3)
    np.testing.assert_allclose(rho.matrix, density_from_pure(psi).matrix, atol=1e-12)


@pytest.mark.parametrize("keep", [(1,), (3,), (4, 1), (1, 4), (2, 3), (3, 1, 4), (2, 4, 1, 3)])
def test_partial_trace_matches_bruteforce(keep, rng):
    s = random_state(rng, 4)
    rho = density_from_pure(s).matrix
    np.testing.assert_allclose(
        partial_trace(rho, keep, 4).matrix, partial_trace_bruteforce(rho, keep, 4), atol=1e-13
    )


@pytest.mark.parametrize("bad", [(), (0,), (5,), (1, 1)])
def test_partial_trace_rejects_bad_subsystem(bad):
    with pytest.raises(StateError):
        partial_trace(density_from_pure(joint_state()), bad, 4)


@settings(max_examples=80, deadline=None)
@given(states(3), st.sampled_from([(1,), (2,), (3,), (1, 2), (3, 1), (2, 3)]))
def test_partial_trace_invariants(s, keep):
    # DensityMatrix construction enforces Hermitian / trace / PSD; re-check explicitly.
    reduced = partial_trace(density_from_pure(s), keep, 3).matrix
    assert np.trace(reduced).real == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(reduced, reduced.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(reduced).min() >= -1e-10


def test_bell_order_is_complete():
    assert set(BELL_ORDER) == set(BellOutcome)
