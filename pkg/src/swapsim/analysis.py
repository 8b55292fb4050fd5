"""Correlators, the CHSH statistic, PPT separability and state fidelity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import DensityMatrix, StateError, StateVector, check_unit, spin_operator
from .linalg import hermitian_eigenvalues, jacobi_eigh

__all__ = [
    "ChshEstimate",
    "ChshSettings",
    "SEPARABLE_FLOOR",
    "chsh_estimate",
    "chsh_exact",
    "chsh_max",
    "correlator_exact",
    "fidelity_pure",
    "hermitian_eigenvalues",
    "jacobi_eigh",
    "partial_transpose",
    "ppt_check",
]

SEPARABLE_FLOOR = -1e-10
TSIRELSON = 2.0 * math.sqrt(2.0)


def xz_direction(angle_deg: float) -> tuple[float, float, float]:
    """Unit vector in the x-z plane at the given polar angle from +z."""
    t = math.radians(angle_deg)
    return (math.sin(t), 0.0, math.cos(t))


@dataclass(frozen=True)
class ChshSettings:
    """Spin directions a, a' for qubit 1 and b, b' for qubit 4.

    Setting pairs are numbered 1..4 as (a,b), (a,b'), (a',b), (a',b').
    """

    a: tuple[float, float, float]
    a_prime: tuple[float, float, float]
    b: tuple[float, float, float]
    b_prime: tuple[float, float, float]

    def __post_init__(self) -> None:
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, tuple(float(x) for x in check_unit(getattr(self, name))))

    @classmethod
    def from_angles(cls, a: float, a_prime: float, b: float, b_prime: float) -> "ChshSettings":
        """Directions in the x-z plane from polar angles in degrees."""
        return cls(xz_direction(a), xz_direction(a_prime), xz_direction(b), xz_direction(b_prime))

    @classmethod
    def default(cls) -> "ChshSettings":
        return cls.from_angles(0.0, 90.0, 45.0, 135.0)

    def to_dict(self) -> dict[str, list[float]]:
        return {"a": list(self.a), "a_prime": list(self.a_prime), "b": list(self.b), "b_prime": list(self.b_prime)}

    def pairs(self) -> dict[int, tuple[tuple[float, float, float], tuple[float, float, float]]]:
        return {
            1: (self.a, self.b),
            2: (self.a, self.b_prime),
            3: (self.a_prime, self.b),
            4: (self.a_prime, self.b_prime),
        }


# S = E1 - E2 + E3 + E4 over the numbered setting pairs
CHSH_SIGNS = {1: 1.0, 2: -1.0, 3: 1.0, 4: 1.0}


def _two_qubit(rho: DensityMatrix) -> np.ndarray:
    if not isinstance(rho, DensityMatrix):
        raise StateError("expected a DensityMatrix")
    if rho.num_qubits != 2:
        raise StateError(f"expected a two-qubit density matrix, got {rho.num_qubits} qubits")
    return rho.matrix


def correlator_exact(rho: DensityMatrix, dir1: Sequence[float], dir2: Sequence[float]) -> float:
    """tr(rho (n1 . sigma) (x) (n2 . sigma))."""
    m = _two_qubit(rho)
    obs = np.kron(spin_operator(dir1), spin_operator(dir2))
    return float(np.trace(m @ obs).real)


def chsh_exact(rho: DensityMatrix, settings: ChshSettings) -> float:
    return sum(CHSH_SIGNS[k] * correlator_exact(rho, d1, d2) for k, (d1, d2) in settings.pairs().items())


def chsh_max(rho: DensityMatrix) -> float:
    """Largest CHSH value over all settings: 2 sqrt(t1 + t2), with t1, t2 the two
    largest eigenvalues of T^T T for the correlation matrix T_ij = tr(rho s_i (x) s_j)."""
    _two_qubit(rho)
    axes = [tuple(v) for v in np.eye(3)]
    t = np.array([[correlator_exact(rho, u, v) for v in axes] for u in axes])
    w = hermitian_eigenvalues(t.T @ t)
    return 2.0 * math.sqrt(max(w[-1] + w[-2], 0.0))


@dataclass(frozen=True)
class ChshEstimate:
    correlators: tuple[float, float, float, float]
    counts: tuple[int, int, int, int]
    std_errors: tuple[float, float, float, float]
    s_value: float
    s_std_error: float

    def to_dict(self) -> dict:
        return {
            "correlators": list(self.correlators),
            "counts": list(self.counts),
            "std_errors": list(self.std_errors),
            "s_value": self.s_value,
            "s_std_error": self.s_std_error,
        }


class EmptyBucketError(ValueError):
    pass


def chsh_estimate(records: Iterable[tuple[int, int, int]]) -> ChshEstimate:
    """Estimate the four correlators from ``(setting_pair, outcome1, outcome4)`` triples."""
    sums = {k: 0 for k in CHSH_SIGNS}
    counts = {k: 0 for k in CHSH_SIGNS}
    for pair, o1, o4 in records:
        if pair not in counts:
            raise ValueError(f"setting pair {pair!r} is not one of 1..4")
        if o1 not in (1, -1) or o4 not in (1, -1):
            raise ValueError(f"outcomes must be +1 or -1, got ({o1!r}, {o4!r})")
        sums[pair] += o1 * o4
        counts[pair] += 1
    empty = [k for k, c in counts.items() if c == 0]
    if empty:
        raise EmptyBucketError(f"no records for setting pair(s) {empty}")
    e = {k: sums[k] / counts[k] for k in counts}
    se = {k: math.sqrt(max(1.0 - e[k] ** 2, 0.0) / counts[k]) for k in counts}
    s_value = sum(CHSH_SIGNS[k] * e[k] for k in counts)
    s_se = math.sqrt(sum(x * x for x in se.values()))
    order = (1, 2, 3, 4)
    return ChshEstimate(
        correlators=tuple(e[k] for k in order),
        counts=tuple(counts[k] for k in order),
        std_errors=tuple(se[k] for k in order),
        s_value=s_value,
        s_std_error=s_se,
    )


def partial_transpose(rho: DensityMatrix | np.ndarray, qubit: int = 2) -> np.ndarray:
    """Partial transpose of a two-qubit matrix over qubit 1 or 2."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise StateError(f"expected a 4x4 matrix, got shape {m.shape}")
    t = m.reshape(2, 2, 2, 2)  # (r1, r2, c1, c2)
    if qubit == 2:
        t = t.transpose(0, 3, 2, 1)
    elif qubit == 1:
        t = t.transpose(2, 1, 0, 3)
    else:
        raise StateError(f"qubit must be 1 or 2, got {qubit}")
    return t.reshape(4, 4)


def ppt_check(rho: DensityMatrix) -> tuple[float, bool]:
    """(min eigenvalue of the partial transpose, separable?) -- exact for two qubits."""
    _two_qubit(rho)
    lowest = hermitian_eigenvalues(partial_transpose(rho))[0]
    return lowest, lowest >= SEPARABLE_FLOOR


def fidelity_pure(s: StateVector, t: StateVector) -> float:
    if s.num_qubits != t.num_qubits:
        raise StateError(f"dimension mismatch: {s.num_qubits} vs {t.num_qubits} qubits")
    return min(1.0, abs(complex(np.vdot(s.amplitudes, t.amplitudes))) ** 2)
