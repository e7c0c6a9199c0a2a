"""Cyclic Jacobi eigendecomposition for complex Hermitian matrices."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonHermitian

HERMITIAN_TOL = 1e-12
OFF_DIAGONAL_TOL = 1e-12
MAX_SWEEPS = 100


def check_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    if np.abs(H - H.conj().T).max(initial=0.0) > tol * scale:
        raise NonHermitian("matrix is not Hermitian")
    return H


def off_diagonal_mass(A: np.ndarray) -> float:
    off = A[~np.eye(A.shape[0], dtype=bool)]
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(H, tol: float = OFF_DIAGONAL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors (columns) of a Hermitian matrix.

    Each rotation first removes the phase of the pivot entry, then applies a
    real Givens rotation that annihilates it.
    """
    A = check_hermitian(H).copy()
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(MAX_SWEEPS):
        if off_diagonal_mass(A) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2 * mag)
                if abs(tau) > 1e100:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1 + tau * tau))
                c = 1 / np.sqrt(1 + t * t)
                s = t * c
                J = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ J
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(A).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def eigvalsh(H) -> np.ndarray:
    return jacobi_eigh(H)[0]
