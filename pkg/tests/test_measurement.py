import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapsim.core import (
    BELL_ORDER,
    BellOutcome,
    StateError,
    StateVector,
    bell_basis,
    bell_state,
    computational_basis,
    joint_state,
    singlet,
    tensor,
)
from swapsim.measurement import (
    ImpossibleOutcomeError,
    born_probabilities,
    measure,
    measure_bell,
    measure_spin,
    relative_state,
    spin_basis,
)
from swapsim.rng import RngStream, rng_derive

from conftest import random_state, random_unit, states

R2 = 1 / math.sqrt(2)


# -- Born probabilities --


def test_born_probabilities_plus_state():
    plus = StateVector(np.array([R2, R2]))
    np.testing.assert_allclose(born_probabilities(plus, (1,), computational_basis(1)), [0.5, 0.5], atol=1e-15)


def test_born_probabilities_bell_basis_on_bell_state():
    probs = born_probabilities(bell_state("phi-"), (1, 2), bell_basis())
    np.testing.assert_allclose(probs, [0, 0, 0, 1], atol=1e-15)


def test_born_probabilities_joint_state_pair23():
    np.testing.assert_allclose(born_probabilities(joint_state(), (2, 3), bell_basis()), [0.25] * 4, atol=1e-15)
    np.testing.assert_allclose(
        born_probabilities(joint_state(), (2, 3), computational_basis(2)), [0.25] * 4, atol=1e-15
    )


def test_born_probabilities_rejects_incomplete_basis():
    with pytest.raises(StateError):
        born_probabilities(joint_state(), (2, 3), bell_basis()[:3])


def test_born_probabilities_rejects_non_orthogonal_basis():
    basis = [StateVector.basis("0"), StateVector(np.array([R2, R2]))]
    with pytest.raises(StateError):
        born_probabilities(singlet(), (1,), basis)


@settings(max_examples=100, deadline=None)
@given(states(4), st.sampled_from([(1,), (4,), (2, 3), (1, 4), (3, 1)]))
def test_law_of_total_probability(s, qubits):
    basis = computational_basis(len(qubits))
    probs = born_probabilities(s, qubits, basis)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(probs >= -1e-15)
    if len(qubits) == 2:
        assert born_probabilities(s, qubits, bell_basis()).sum() == pytest.approx(1.0, abs=1e-12)


# -- sampling --


def test_measure_deterministic_outcome():
    s = StateVector.basis("10")
    result, nxt = measure(s, (1,), computational_basis(1), rng_derive(1, 0))
    assert result.outcome == 1
    assert result.probability == pytest.approx(1.0)
    np.testing.assert_array_equal(result.post_state.amplitudes, s.amplitudes)
    assert nxt.counter == 1


def test_measure_uses_labels():
    result, _ = measure(StateVector.basis("1"), (1,), computational_basis(1), rng_derive(1, 0), labels=("up", "down"))
    assert result.outcome == "down"


def test_measure_post_state_is_in_outcome_subspace(rng):
    s = random_state(rng, 3)
    stream = rng_derive(7, 3)
    for _ in range(50):
        result, stream = measure(s, (2,), computational_basis(1), stream)
        k = result.outcome
        probs = born_probabilities(result.post_state, (2,), computational_basis(1))
        assert probs[k] == pytest.approx(1.0, abs=1e-12)


def test_post_state_consistency_with_relative_state(rng):
    s = random_state(rng, 4)
    stream = rng_derive(11, 0)
    for _ in range(40):
        result, stream = measure_bell(s, (2, 3), stream)
        label = result.outcome
        rel = relative_state(s, (2, 3), bell_state(label))
        rebuilt = relative_state(result.post_state, (2, 3), bell_state(label))
        assert abs(np.vdot(rel.amplitudes, rebuilt.amplitudes)) == pytest.approx(1.0, abs=1e-12)


def test_sampling_never_returns_zero_probability_outcomes():
    # outcomes |00> and |11> on (2,3) of the joint state are possible, Bell
    # outcome psi+ on (1,2) of a product |01>|01> is not
    s = tensor(StateVector.basis("01"), StateVector.basis("01"))
    stream = rng_derive(3, 1)
    for _ in range(200):
        result, stream = measure_bell(s, (1, 2), stream)
        assert result.probability > 1e-12
        assert result.outcome in (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS)


def test_measure_bell_frequencies():
    n = 100_000
    counts = {label: 0 for label in BELL_ORDER}
    s = joint_state()
    for trial in range(n):
        result, _ = measure_bell(s, (2, 3), rng_derive(2024, trial))
        counts[result.outcome] += 1
    for label in BELL_ORDER:
        assert abs(counts[label] / n - 0.25) < 0.006, (label, counts[label])


def test_measure_bell_post_state_on_joint():
    s = joint_state()
    stream = rng_derive(5, 0)
    for _ in range(20):
        result, stream = measure_bell(s, (2, 3), stream)
        assert result.probability == pytest.approx(0.25, abs=1e-12)
        partner = relative_state(result.post_state, (2, 3), bell_state(result.outcome))
        assert abs(np.vdot(partner.amplitudes, bell_state(result.outcome).amplitudes)) == pytest.approx(1.0)


def test_measure_bell_rejects_wrong_arity():
    with pytest.raises(StateError):
        measure_bell(joint_state(), (1, 2, 3), rng_derive(1, 0))


# -- spin --


def test_spin_basis_eigenvectors(rng):
    from swapsim.core import spin_operator

    for _ in range(50):
        n = tuple(random_unit(rng))
        up, down = spin_basis(n)
        op = spin_operator(n)
        np.testing.assert_allclose(op @ up.amplitudes, up.amplitudes, atol=1e-12)
        np.testing.assert_allclose(op @ down.amplitudes, -down.amplitudes, atol=1e-12)


def test_spin_basis_poles():
    up, down = spin_basis((0, 0, -1))
    assert abs(up.amplitudes[1]) == pytest.approx(1.0)
    assert abs(down.amplitudes[0]) == pytest.approx(1.0)


@pytest.mark.parametrize("theta_deg", [0.0, 30.0, 90.0, 120.0, 180.0])
def test_spin_outcome_probability_on_singlet(theta_deg):
    # P(+1 on qubit 1 along z, +1 on qubit 2 along n) = (1/2) sin^2(theta/2)
    t = math.radians(theta_deg)
    n = (math.sin(t), 0.0, math.cos(t))
    outcome = tensor(spin_basis((0, 0, 1))[0], spin_basis(n)[0])
    p = abs(np.vdot(outcome.amplitudes, singlet().amplitudes)) ** 2
    assert p == pytest.approx(0.5 * math.sin(t / 2) ** 2, abs=1e-12)


def test_measure_spin_labels_and_frequency():
    plus_x = StateVector(np.array([R2, R2]))
    stream = rng_derive(99, 0)
    ups = 0
    n = 20_000
    for _ in range(n):
        result, stream = measure_spin(plus_x, 1, (0, 0, 1), stream)
        assert result.outcome in (1, -1)
        ups += result.outcome == 1
    assert abs(ups / n - 0.5) < 4 * math.sqrt(0.25 / n)
    result, _ = measure_spin(plus_x, 1, (1, 0, 0), stream)
    assert result.outcome == 1


def test_measure_spin_rejects_non_unit():
    with pytest.raises(StateError):
        measure_spin(singlet(), 1, (0, 0, 2), rng_derive(1, 0))


# -- relative states --


def test_relative_state_after_00():
    rel = relative_state(joint_state(), (2, 3), StateVector.basis("00"))
    assert abs(np.vdot(rel.amplitudes, StateVector.basis("11").amplitudes)) == pytest.approx(1.0)


def test_relative_state_qubit1_zero():
    rel = relative_state(joint_state(), (1,), StateVector.basis("0"))
    expected = np.zeros(8)
    expected[0b101], expected[0b110] = R2, -R2
    np.testing.assert_allclose(rel.amplitudes, expected, atol=1e-15)


def test_relative_state_impossible_outcome():
    with pytest.raises(ImpossibleOutcomeError):
        relative_state(joint_state(), (1, 2), StateVector.basis("00"))


def test_relative_state_rejects_full_register():
    with pytest.raises(StateError):
        relative_state(singlet(), (1, 2), singlet())


# -- random streams --


def test_rng_determinism():
    a, _ = rng_derive(42, 7).uniforms(100)
    b, _ = rng_derive(42, 7).uniforms(100)
    assert a == b


def test_rng_streams_differ():
    a, _ = rng_derive(42, 7).raw(8)
    b, _ = rng_derive(42, 8).raw(8)
    c, _ = rng_derive(43, 7).raw(8)
    assert a != b and a != c


def test_rng_chunking_invariance():
    whole, _ = rng_derive(1, 2).raw(37)
    stream = rng_derive(1, 2)
    parts = []
    for size in (1, 5, 3, 11, 17):
        chunk, stream = stream.raw(size)
        parts.extend(chunk)
    assert parts == whole
    assert stream == RngStream(1, 2, 37)
    tail, _ = RngStream(1, 2, 20).raw(17)
    assert tail == whole[20:]


def test_rng_matches_continuous_philox():
    words, _ = rng_derive(123, 456).raw(12)
    ref = np.random.Philox(key=np.array([123, 456], dtype=np.uint64)).random_raw(12).tolist()
    assert words == ref


def test_rng_uniform_chi_square():
    values, _ = rng_derive(2026, 0).uniforms(160_000)
    counts = np.bincount((np.array(values) * 16).astype(int), minlength=16)
    expected = len(values) / 16
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # 15 degrees of freedom; the 0.999 quantile is about 37.7
    assert chi2 < 37.7
    assert min(values) >= 0.0 and max(values) < 1.0


def test_rng_uniform_mean():
    values, _ = rng_derive(77, 1).uniforms(1_000_000)
    assert abs(np.mean(values) - 0.5) < 0.002


def test_rng_rejects_negative_count():
    with pytest.raises(ValueError):
        rng_derive(1, 1).raw(-1)
