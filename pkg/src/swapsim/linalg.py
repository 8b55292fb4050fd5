"""Cyclic Jacobi eigensolver for small dense Hermitian matrices.

Each rotation first removes the phase of the pivot element with a diagonal
unitary, then applies a real Givens rotation that annihilates it. Sweeps run
over all (p, q) pairs in row order until the off-diagonal Frobenius norm drops
below ``offdiag_tol`` (scaled by the matrix norm when that exceeds one).
"""
from __future__ import annotations

import cmath
import math

import numpy as np

HERMITIAN_TOL = 1e-10
MAX_DIM = 16


class EigenError(ValueError):
    """Raised for non-Hermitian input or a failed convergence/residual check."""


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise EigenError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise EigenError("matrix has non-finite entries")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise EigenError(f"matrix is not Hermitian (max |M - M^dag| = {dev:.3e})")
    return m


def jacobi_eigh(
    m: np.ndarray, offdiag_tol: float = 1e-13, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix.

    Returns ``(eigenvalues, vectors)`` with eigenvalues ascending and the
    matching eigenvectors as the columns of ``vectors``.
    """
    a = check_hermitian(m).copy()
    n = a.shape[0]
    if n > MAX_DIM:
        raise EigenError(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    # symmetrize exactly so the rotations see a truly Hermitian matrix
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    target = offdiag_tol * scale

    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = complex(a[p, q])
                r = abs(apq)
                if r == 0.0:
                    continue
                # atan2-based phase stays unit-modulus even for subnormal pivots
                phase_c = cmath.exp(-1j * cmath.phase(apq))
                theta = 0.5 * math.atan2(2.0 * r, a[q, q].real - a[p, p].real)
                c = math.cos(theta)
                s = math.sin(theta)
                # G = diag(1, phase_c) @ [[c, s], [-s, c]]
                g10 = -s * phase_c
                g11 = c * phase_c
                for mat in (a, v):
                    colp = mat[:, p].copy()
                    colq = mat[:, q]
                    mat[:, p] = c * colp + g10 * colq
                    mat[:, q] = s * colp + g11 * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp + g10.conjugate() * rowq
                a[q, :] = s * rowp + g11.conjugate() * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        if _offdiag_norm(a) > target:
            raise EigenError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(m: np.ndarray, tol: float = 1e-10) -> list[float]:
    """Ascending eigenvalues of a Hermitian matrix (dimension at most 16).

    Every returned pair is checked for ``||M v - lam v|| <= tol * ||M||``;
    an :class:`EigenError` is raised otherwise.
    """
    m = check_hermitian(m)
    w, v = jacobi_eigh(m)
    norm = max(float(np.linalg.norm(m, 2)) if m.size else 0.0, np.finfo(float).tiny)
    residuals = np.linalg.norm(m @ v - v * w, axis=0)
    if residuals.size and float(np.max(residuals)) > tol * norm:
        raise EigenError(f"eigenpair residual {float(np.max(residuals)):.3e} exceeds {tol * norm:.3e}")
    return [float(x) for x in w]
