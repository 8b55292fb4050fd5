"""Exact algebraic checks of the swapping state, run by ``swapsim verify``.

Every check reports a residual (or a signed quantity for the PPT checks)
together with the tolerance it is held to.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import TSIRELSON, ChshSettings, chsh_exact, correlator_exact, fidelity_pure, ppt_check, xz_direction
from .core import (
    BELL_ORDER,
    BellOutcome,
    DensityMatrix,
    StateVector,
    bell_basis,
    bell_state,
    computational_basis,
    density_from_pure,
    joint_state,
    partial_trace,
    permute_qubits,
    singlet,
)
from .measurement import born_probabilities, relative_state
from .protocol import conditional_mixture

EXACT_TOL = 1e-12
PSD_FLOOR = -1e-10


@dataclass(frozen=True)
class Check:
    name: str
    claim: str
    value: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _residual(name: str, claim: str, value: float, tol: float = EXACT_TOL) -> Check:
    return Check(name, claim, float(value), tol, bool(value <= tol))


def expected_joint_amplitudes() -> np.ndarray:
    amps = np.zeros(16, dtype=complex)
    for bits, sign in (("0101", 1), ("0110", -1), ("1001", -1), ("1010", 1)):
        amps[int(bits, 2)] = 0.5 * sign
    return amps


def _ket(bits: str) -> np.ndarray:
    return StateVector.basis(bits).amplitudes


def computational_regrouping() -> np.ndarray:
    """1/2 [|01>|10> - |00>|11> - |11>|00> + |10>|01>] in register order (1,4,2,3)."""
    terms = (("01", "10", 1), ("00", "11", -1), ("11", "00", -1), ("10", "01", 1))
    return 0.5 * sum(sign * np.kron(_ket(a), _ket(b)) for a, b, sign in terms)


def bell_regrouping() -> np.ndarray:
    """1/2 [Psi+ Psi+ - Psi- Psi- - Phi+ Phi+ + Phi- Phi-] in register order (1,4,2,3)."""
    signs = {
        BellOutcome.PSI_PLUS: 1,
        BellOutcome.PSI_MINUS: -1,
        BellOutcome.PHI_PLUS: -1,
        BellOutcome.PHI_MINUS: 1,
    }
    total = np.zeros(16, dtype=complex)
    for label, sign in signs.items():
        b = bell_state(label).amplitudes
        total += sign * np.kron(b, b)
    return 0.5 * total


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def run_checks(joint: StateVector | None = None) -> list[Check]:
    """All exact checks against ``joint`` (the two-singlet state by default)."""
    psi = joint_state() if joint is None else joint
    mixed = DensityMatrix.maximally_mixed(2).matrix
    checks = []

    checks.append(
        _residual(
            "joint_state_amplitudes",
            "|Psi>_1234 = 1/2 [|0101> - |0110> - |1001> + |1010>]",
            _max_abs(psi.amplitudes, expected_joint_amplitudes()),
        )
    )
    regrouped = permute_qubits(psi, (1, 4, 2, 3)).amplitudes
    checks.append(
        _residual(
            "regrouping_computational",
            "|Psi>_1234 regrouped over pairs (1,4),(2,3) in the computational basis, signs (+,-,-,+)",
            _max_abs(regrouped, computational_regrouping()),
        )
    )
    checks.append(
        _residual(
            "regrouping_bell",
            "|Psi>_1234 = 1/2 [Psi+ Psi+ - Psi- Psi- - Phi+ Phi+ + Phi- Phi-] over (1,4),(2,3)",
            _max_abs(regrouped, bell_regrouping()),
        )
    )

    rho14 = partial_trace(density_from_pure(psi), (1, 4), 4)
    checks.append(
        _residual(
            "reduced_pair14_maximally_mixed",
            "rho_14 = tr_23 |Psi><Psi| = I/4",
            _max_abs(rho14.matrix, mixed),
        )
    )
    lowest, separable = ppt_check(rho14)
    checks.append(
        Check(
            "reduced_pair14_separable",
            "rho_14 has a positive partial transpose (separable)",
            lowest,
            PSD_FLOOR,
            bool(separable),
        )
    )
    checks.append(
        _residual(
            "bell_conditioned_mixture",
            "sum_k p_k |rel_k><rel_k| over Bell outcomes on (2,3) = I/4",
            _max_abs(conditional_mixture(bell_basis(), psi).matrix, mixed),
        )
    )
    checks.append(
        _residual(
            "zz_conditioned_mixture",
            "sum_k p_k |rel_k><rel_k| over computational outcomes on (2,3) = I/4",
            _max_abs(conditional_mixture(computational_basis(2), psi).matrix, mixed),
        )
    )

    rel = relative_state(psi, (2, 3), StateVector.basis("00"))
    checks.append(
        _residual(
            "relative_state_after_00",
            "outcome |00>_23 leaves |11>_14",
            1.0 - fidelity_pure(rel, StateVector.basis("11")),
        )
    )
    probs = born_probabilities(relative_state(psi, (1,), StateVector.basis("0")), (1, 2, 3), computational_basis(3))
    target = np.zeros(8)
    target[0b101] = target[0b110] = 0.5
    checks.append(
        _residual(
            "qubit1_zero_support",
            "outcome |0>_1 leaves (2,3,4) in |101> or |110> with probability 1/2 each",
            _max_abs(probs, target),
        )
    )

    bell_probs = born_probabilities(psi, (2, 3), bell_basis())
    checks.append(
        _residual(
            "bell_outcome_probabilities",
            "each Bell outcome on (2,3) has probability 1/4",
            _max_abs(bell_probs, np.full(4, 0.25)),
        )
    )
    partner_dev = 0.0
    for label in BELL_ORDER:
        partner = relative_state(psi, (2, 3), bell_state(label))
        partner_dev = max(partner_dev, 1.0 - fidelity_pure(partner, bell_state(label)))
    checks.append(
        _residual(
            "bell_relative_states",
            "Bell outcome k on (2,3) leaves (1,4) in the same Bell state k",
            partner_dev,
        )
    )

    singlet_rho = density_from_pure(singlet())
    lowest_singlet, separable_singlet = ppt_check(singlet_rho)
    checks.append(
        Check(
            "singlet_ppt_entangled",
            "partial transpose of the singlet has eigenvalue -1/2 (entangled)",
            abs(lowest_singlet + 0.5),
            EXACT_TOL,
            bool(abs(lowest_singlet + 0.5) <= EXACT_TOL and not separable_singlet),
        )
    )
    corr_dev = 0.0
    for deg in (0.0, 45.0, 90.0, 135.0, 180.0):
        e = correlator_exact(singlet_rho, xz_direction(0.0), xz_direction(deg))
        corr_dev = max(corr_dev, abs(e + math.cos(math.radians(deg))))
    checks.append(
        _residual(
            "singlet_correlator",
            "singlet correlator E(theta) = -cos(theta)",
            corr_dev,
        )
    )
    s_val = chsh_exact(singlet_rho, ChshSettings.default())
    checks.append(
        _residual(
            "singlet_chsh_tsirelson",
            "singlet at angles a=0, a'=90, b=45, b'=135 degrees gives |S| = 2 sqrt(2)",
            abs(abs(s_val) - TSIRELSON),
        )
    )
    return checks


def corrupted_joint_state() -> StateVector:
    """The joint state with the sign of the |0110> amplitude flipped (fault injection)."""
    amps = joint_state().amplitudes.copy()
    amps[0b0110] *= -1
    return StateVector(amps)
