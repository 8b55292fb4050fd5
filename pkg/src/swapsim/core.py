"""Dense state vectors, operators, density matrices and subsystem algebra.

Register convention: qubits are labelled 1..n and qubit 1 is the most
significant bit of the basis index, so the ket |0101> of a four-qubit
register is amplitude index 5.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .linalg import EigenError, check_hermitian, hermitian_eigenvalues

NORM_TOL = 1e-12
TRACE_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_FLOOR = -1e-10
UNIT_TOL = 1e-9
MAX_QUBITS = 10

_SQRT2_INV = 1.0 / math.sqrt(2.0)


class StateError(ValueError):
    """Invalid state, operator, density matrix or subsystem selection."""


class BellOutcome(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"

    @classmethod
    def parse(cls, text: str) -> "BellOutcome":
        key = text.strip().lower().replace("_", "").replace("plus", "+").replace("minus", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown Bell label {text!r}; expected one of psi+, psi-, phi+, phi-")

    def __str__(self) -> str:
        return self.value


# Measurement order of the Bell basis everywhere in the package.
BELL_ORDER = (
    BellOutcome.PSI_PLUS,
    BellOutcome.PSI_MINUS,
    BellOutcome.PHI_PLUS,
    BellOutcome.PHI_MINUS,
)


def _num_qubits_for(length: int) -> int:
    n = length.bit_length() - 1
    if length < 2 or (1 << n) != length:
        raise StateError(f"length {length} is not a power of two >= 2")
    if n > MAX_QUBITS:
        raise StateError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over an ordered qubit register."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _num_qubits_for(amps.size)
        if not np.all(np.isfinite(amps)):
            raise StateError("state has non-finite amplitudes")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (sum |a|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex] | np.ndarray) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(amps))
        if norm == 0.0 or not math.isfinite(norm):
            raise StateError("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """Computational basis state from a bit string such as ``"0101"``."""
        if not bits or set(bits) - {"0", "1"}:
            raise StateError(f"invalid bit string {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def amplitude(self, bits: str) -> complex:
        if len(bits) != self.num_qubits:
            raise StateError(f"bit string {bits!r} does not match {self.num_qubits} qubits")
        return complex(self.amplitudes[int(bits, 2)])

    def __neg__(self) -> "StateVector":
        return StateVector(-self.amplitudes)

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over n qubits."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError(f"density matrix must be square, got shape {m.shape}")
        _num_qubits_for(m.shape[0])
        try:
            check_hermitian(m, HERMITIAN_TOL)
        except EigenError as exc:
            raise StateError(str(exc)) from None
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace is {tr!r}, expected 1")
        lowest = hermitian_eigenvalues(m)[0]
        if lowest < PSD_FLOOR:
            raise StateError(f"matrix is not positive semidefinite (min eigenvalue {lowest:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def _trusted(cls, m: np.ndarray) -> "DensityMatrix":
        # for matrices that are valid by construction (pure-state projectors, partial traces of valid states)
        out = object.__new__(cls)
        m = np.array(m, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(out, "matrix", m)
        return out

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 1 << num_qubits
        return cls(np.eye(d, dtype=complex) / d)

    @classmethod
    def mixture(cls, weights: Sequence[float], states: Sequence["DensityMatrix"]) -> "DensityMatrix":
        total = sum(w * s.matrix for w, s in zip(weights, states, strict=True))
        return cls(total)


def check_subsystem(qubits: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    """Validate a list of distinct 1-based qubit labels against a register size."""
    qs = tuple(int(q) for q in qubits)
    if not qs:
        raise StateError("subsystem must name at least one qubit")
    if len(set(qs)) != len(qs):
        raise StateError(f"subsystem {qs} has repeated qubits")
    bad = [q for q in qs if not 1 <= q <= num_qubits]
    if bad:
        raise StateError(f"qubits {bad} are outside 1..{num_qubits}")
    return qs


def complement(qubits: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    chosen = set(qubits)
    return tuple(q for q in range(1, num_qubits + 1) if q not in chosen)


def _check_operator(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"operator must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise StateError("operator has non-finite entries")
    return m


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """|a> (x) |b>, with the qubits of ``a`` first in the register."""
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(_check_operator(a), _check_operator(b))


def singlet() -> StateVector:
    return bell_state(BellOutcome.PSI_MINUS)


_BELL_AMPLITUDES = {
    BellOutcome.PSI_PLUS: (0.0, _SQRT2_INV, _SQRT2_INV, 0.0),
    BellOutcome.PSI_MINUS: (0.0, _SQRT2_INV, -_SQRT2_INV, 0.0),
    BellOutcome.PHI_PLUS: (_SQRT2_INV, 0.0, 0.0, _SQRT2_INV),
    BellOutcome.PHI_MINUS: (_SQRT2_INV, 0.0, 0.0, -_SQRT2_INV),
}


def bell_state(label: BellOutcome | str) -> StateVector:
    if not isinstance(label, BellOutcome):
        label = BellOutcome.parse(label)
    return StateVector(np.array(_BELL_AMPLITUDES[label], dtype=complex))


def bell_basis() -> list[StateVector]:
    return [bell_state(label) for label in BELL_ORDER]


def computational_basis(num_qubits: int) -> list[StateVector]:
    return [StateVector.basis(format(i, f"0{num_qubits}b")) for i in range(1 << num_qubits)]


@lru_cache(maxsize=1)
def joint_state() -> StateVector:
    """Two singlets on pairs (1,2) and (3,4), register order (1,2,3,4)."""
    return tensor(singlet(), singlet())


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis.lower()].copy()
    except KeyError:
        raise StateError(f"unknown Pauli axis {axis!r}") from None


def check_unit(direction: Sequence[float]) -> np.ndarray:
    n = np.asarray(direction, dtype=float).reshape(-1)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise StateError(f"direction must be a finite 3-vector, got {direction!r}")
    if abs(float(np.linalg.norm(n)) - 1.0) > UNIT_TOL:
        raise StateError(f"direction {tuple(n)} is not a unit vector")
    return n


def spin_operator(direction: Sequence[float]) -> np.ndarray:
    """n . sigma for a unit direction n."""
    nx, ny, nz = check_unit(direction)
    return nx * _PAULI["x"] + ny * _PAULI["y"] + nz * _PAULI["z"]


def _check_permutation(perm: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    p = check_subsystem(perm, num_qubits)
    if len(p) != num_qubits:
        raise StateError(f"{p} is not a permutation of 1..{num_qubits}")
    return p


def permute_qubits(s: StateVector, perm: Sequence[int]) -> StateVector:
    """Reorder the register so that original qubit ``perm[k]`` sits at position k+1."""
    n = s.num_qubits
    p = _check_permutation(perm, n)
    t = s.amplitudes.reshape((2,) * n).transpose([q - 1 for q in p])
    return StateVector(t.reshape(-1))


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for pos, q in enumerate(perm, start=1):
        inv[q - 1] = pos
    return tuple(inv)


def density_from_pure(s: StateVector) -> DensityMatrix:
    return DensityMatrix._trusted(np.outer(s.amplitudes, s.amplitudes.conj()))


def partial_trace(
    rho: DensityMatrix | np.ndarray, keep: Sequence[int], total_qubits: int
) -> DensityMatrix:
    """Reduced density matrix over ``keep`` (in the given order)."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (1 << total_qubits, 1 << total_qubits):
        raise StateError(f"matrix shape {m.shape} does not match {total_qubits} qubits")
    kept = check_subsystem(keep, total_qubits)
    traced = complement(kept, total_qubits)
    n = total_qubits
    t = m.reshape((2,) * (2 * n))
    # rows: axes 0..n-1, columns: axes n..2n-1
    row_labels = list(range(n))
    col_labels = list(range(n, 2 * n))
    for q in traced:
        col_labels[q - 1] = row_labels[q - 1]
    out = [row_labels[q - 1] for q in kept] + [col_labels[q - 1] for q in kept]
    reduced = np.einsum(t, row_labels + col_labels, out)
    d = 1 << len(kept)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix._trusted(reduced.reshape(d, d))
    return DensityMatrix(reduced.reshape(d, d))
