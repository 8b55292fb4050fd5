"""Projective measurements, Born probabilities and relative states."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Sequence

import numpy as np

from .core import (
    BELL_ORDER,
    BellOutcome,
    StateError,
    StateVector,
    bell_basis,
    check_subsystem,
    check_unit,
    complement,
    computational_basis,
    inverse_permutation,
)
from .rng import RngStream, rng_derive

__all__ = [
    "BellOutcome",
    "ImpossibleOutcomeError",
    "MeasurementResult",
    "RngStream",
    "ZERO_PROB",
    "born_probabilities",
    "measure",
    "measure_bell",
    "measure_spin",
    "relative_state",
    "rng_derive",
    "spin_basis",
]

ZERO_PROB = 1e-12
ORTHONORMAL_TOL = 1e-10


class ImpossibleOutcomeError(StateError):
    """Conditioning on an outcome whose Born probability is (numerically) zero."""


@dataclass(frozen=True)
class MeasurementResult:
    outcome: Hashable
    probability: float
    post_state: StateVector


def basis_matrix(basis: Sequence[StateVector], k: int) -> np.ndarray:
    """Columns are the basis vectors; checks orthonormality and completeness."""
    dim = 1 << k
    if len(basis) != dim:
        raise StateError(f"basis has {len(basis)} elements, a complete basis on {k} qubits needs {dim}")
    for b in basis:
        if b.num_qubits != k:
            raise StateError(f"basis element has {b.num_qubits} qubits, expected {k}")
    mat = np.column_stack([b.amplitudes for b in basis])
    gram = mat.conj().T @ mat
    dev = float(np.max(np.abs(gram - np.eye(dim))))
    if dev > ORTHONORMAL_TOL:
        raise StateError(f"basis is not orthonormal (max |Gram - I| = {dev:.3e})")
    return mat


@lru_cache(maxsize=256)
def _layout(measured: tuple[int, ...], n: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """(rest, axes bringing ``measured`` to the front, axes undoing that)."""
    rest = complement(measured, n)
    order = measured + rest
    return rest, tuple(q - 1 for q in order), tuple(q - 1 for q in inverse_permutation(order))


def _front_loaded(amps: np.ndarray, n: int, measured: tuple[int, ...]) -> np.ndarray:
    _, axes, _ = _layout(measured, n)
    return amps.reshape((2,) * n).transpose(axes).reshape(1 << len(measured), -1)


def _sample(probs: list[float], u: float) -> int:
    p = [x if x > ZERO_PROB else 0.0 for x in probs]
    target = u * sum(p)
    acc = 0.0
    last = 0
    for k, x in enumerate(p):
        if x == 0.0:
            continue
        acc += x
        last = k
        if target < acc:
            return k
    # only reached through rounding at the top of the range
    return last


def collapse(
    amps: np.ndarray, n: int, measured: tuple[int, ...], basis_adj: np.ndarray, u: float, project: bool = True
) -> tuple[int, float, np.ndarray | None]:
    """Sample an outcome with uniform ``u`` and project; no validation.

    ``basis_adj`` is the adjoint of the basis matrix (rows are bra vectors).
    Returns ``(index, probability, post-measurement amplitudes)``; the
    amplitudes are ``None`` when ``project`` is false.
    """
    coeffs = basis_adj @ _front_loaded(amps, n, measured)
    probs = (coeffs.real**2 + coeffs.imag**2).sum(axis=1).tolist()
    k = _sample(probs, u)
    pk = probs[k]
    if not project:
        return k, pk, None
    projected = np.outer(basis_adj[k].conj(), coeffs[k] / math.sqrt(pk))
    _, _, inverse = _layout(measured, n)
    return k, pk, projected.reshape((2,) * n).transpose(inverse).reshape(-1)


def born_probabilities(s: StateVector, qubits: Sequence[int], basis: Sequence[StateVector]) -> np.ndarray:
    """Probability of each basis element when measuring ``qubits`` of ``s``."""
    measured = check_subsystem(qubits, s.num_qubits)
    bmat = basis_matrix(basis, len(measured))
    coeffs = bmat.conj().T @ _front_loaded(s.amplitudes, s.num_qubits, measured)
    return np.sum(np.abs(coeffs) ** 2, axis=1)


def measure(
    s: StateVector,
    qubits: Sequence[int],
    basis: Sequence[StateVector],
    rng: RngStream,
    labels: Sequence[Hashable] | None = None,
) -> tuple[MeasurementResult, RngStream]:
    """Sample one outcome of a projective measurement and collapse the state.

    The outcome label is ``labels[k]`` if given, else the index ``k``. The
    post-measurement state covers the full register in its original order.
    Returns the result and the advanced stream.
    """
    measured = check_subsystem(qubits, s.num_qubits)
    bmat = basis_matrix(basis, len(measured))
    u, rng = rng.uniform()
    k, pk, post = collapse(s.amplitudes, s.num_qubits, measured, bmat.conj().T, u)
    label = labels[k] if labels is not None else k
    return MeasurementResult(label, pk, StateVector(post)), rng


@lru_cache(maxsize=1)
def bell_adjoint() -> np.ndarray:
    return basis_matrix(bell_basis(), 2).conj().T


@lru_cache(maxsize=1)
def computational_adjoint() -> np.ndarray:
    return basis_matrix(computational_basis(2), 2).conj().T


def measure_bell(s: StateVector, pair: Sequence[int], rng: RngStream) -> tuple[MeasurementResult, RngStream]:
    if len(pair) != 2:
        raise StateError(f"a Bell measurement needs exactly two qubits, got {tuple(pair)}")
    measured = check_subsystem(pair, s.num_qubits)
    u, rng = rng.uniform()
    k, pk, post = collapse(s.amplitudes, s.num_qubits, measured, bell_adjoint(), u)
    return MeasurementResult(BELL_ORDER[k], pk, StateVector(post)), rng


def spin_basis(direction: Sequence[float]) -> list[StateVector]:
    """Eigenvectors of n . sigma for eigenvalues +1 and -1, in that order."""
    nx, ny, nz = check_unit(direction)
    theta = math.acos(max(-1.0, min(1.0, nz)))
    phi = math.atan2(ny, nx)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    up = np.array([c, e * s], dtype=complex)
    down = np.array([-e.conjugate() * s, c], dtype=complex)
    return [StateVector(up), StateVector(down)]


SPIN_LABELS = (1, -1)


@lru_cache(maxsize=512)
def spin_adjoint(direction: tuple[float, float, float]) -> np.ndarray:
    return basis_matrix(spin_basis(direction), 1).conj().T


@lru_cache(maxsize=512)
def spin_pair_adjoint(dir1: tuple[float, float, float], dir2: tuple[float, float, float]) -> np.ndarray:
    """Adjoint of the product eigenbasis of (n1 . sigma) (x) (n2 . sigma).

    Row order is (+,+), (+,-), (-,+), (-,-).
    """
    return np.kron(spin_adjoint(dir1), spin_adjoint(dir2))


def measure_spin(
    s: StateVector, qubit: int, direction: Sequence[float], rng: RngStream
) -> tuple[MeasurementResult, RngStream]:
    """Measure n . sigma on one qubit; the outcome label is the eigenvalue +1 or -1."""
    measured = check_subsystem((qubit,), s.num_qubits)
    adj = spin_adjoint(tuple(float(x) for x in check_unit(direction)))
    u, rng = rng.uniform()
    k, pk, post = collapse(s.amplitudes, s.num_qubits, measured, adj, u)
    return MeasurementResult(SPIN_LABELS[k], pk, StateVector(post)), rng


def relative_state(s: StateVector, measured: Sequence[int], outcome: StateVector) -> StateVector:
    """Normalized state of the unmeasured qubits (ascending order) given ``outcome`` on ``measured``."""
    qs = check_subsystem(measured, s.num_qubits)
    if len(qs) == s.num_qubits:
        raise StateError("relative state needs at least one unmeasured qubit")
    if outcome.num_qubits != len(qs):
        raise StateError(f"outcome has {outcome.num_qubits} qubits, measured subsystem has {len(qs)}")
    c = outcome.amplitudes.conj() @ _front_loaded(s.amplitudes, s.num_qubits, qs)
    p = float(np.vdot(c, c).real)
    if p <= ZERO_PROB:
        raise ImpossibleOutcomeError(
            f"outcome on qubits {qs} has probability {p:.3e}; the conditional state is undefined"
        )
    return StateVector(c / math.sqrt(p))
