"""Dense least squares via column-pivoted QR, minimum-norm when rank deficient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

RANK_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when array shapes do not agree."""


@dataclass(frozen=True)
class LsFit:
    coefficients: np.ndarray
    rss: float
    rank: int


def as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-d design, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix has non-finite entries")
    return X


def _check(X, y):
    X = as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
    if X.shape[0] < 1:
        raise DimensionError("need at least one row")
    return X, y


def least_squares(X, y) -> LsFit:
    """Minimise ||y - X b||^2.

    Rank is decided on the pivoted-QR diagonal with relative threshold
    ``RANK_TOL``.  When ``rank < p`` the minimum-norm minimiser is returned
    (complete orthogonal decomposition of the leading ``rank`` rows of R).
    """
    X, y = _check(X, y)
    n, p = X.shape
    if p == 0:
        return LsFit(np.zeros(0), float(y @ y), 0)
    Q, R, perm = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_TOL * diag[0])) if diag[0] > 0 else 0
    z = np.zeros(p)
    if rank > 0:
        c = Q[:, :rank].T @ y
        if rank == p:
            z = sla.solve_triangular(R[:p, :p], c)
        else:
            # R[:rank] = S' Z'  with Z (p x rank) orthonormal
            Z, S = np.linalg.qr(R[:rank, :].T)
            w = sla.solve_triangular(S, c, trans="T")
            z = Z @ w
    beta = np.empty(p)
    beta[perm] = z
    r = y - X @ beta
    return LsFit(beta, float(r @ r), rank)


def residuals(X, y, beta) -> np.ndarray:
    X, y = _check(X, y)
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape[0] != X.shape[1]:
        raise DimensionError(f"beta has length {beta.shape[0]}, X has {X.shape[1]} columns")
    return y - X @ beta


def rss(X, y, beta) -> float:
    r = residuals(X, y, beta)
    return float(r @ r)


def numerical_rank(X, tol: float = RANK_TOL) -> int:
    """Rank from singular values above ``tol`` times the largest."""
    s = np.linalg.svd(as_matrix(X), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))
