"""Small dense linear-algebra helpers: Cholesky solves and a cyclic Jacobi eigensolver."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import EigenFailure, NotPositiveDefinite

JACOBI_RTOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def cholesky(a: np.ndarray, what: str = "matrix"):
    """Return a ``cho_factor`` pair, raising NotPositiveDefinite on failure."""
    try:
        return cho_factor(a, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{what} is not positive definite") from exc


def chol_solve(a: np.ndarray, b: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a``."""
    return cho_solve(cholesky(a, what), b)


def chol_logdet(factor) -> float:
    c, _ = factor
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def jacobi_eigh(a, rtol: float = JACOBI_RTOL, max_sweeps: int = JACOBI_MAX_SWEEPS,
                vectors: bool = False):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all off-diagonal pairs in row order until the Frobenius norm of
    the off-diagonal part drops below ``rtol * ||a||_F``.

    Returns
    -------
    w : ndarray
        Eigenvalues sorted in descending order.
    v : ndarray, optional
        Matching orthonormal eigenvectors as columns (only if ``vectors``).
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    threshold = rtol * scale

    def off_norm():
        return float(np.linalg.norm(a - np.diag(np.diag(a))))

    for _ in range(max_sweeps + 1):
        if scale == 0.0 or off_norm() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                if vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
    else:
        raise EigenFailure(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]
