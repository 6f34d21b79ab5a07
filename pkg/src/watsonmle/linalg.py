"""Scatter matrices and a Jacobi eigensolver for small dense symmetric matrices."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

__all__ = ["EigDecomposition", "JacobiConvergenceError", "scatter", "sym_eig", "unit_rows"]


class JacobiConvergenceError(ArithmeticError):
    def __init__(self, message, off_norm):
        super().__init__(message)
        self.off_norm = off_norm


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenpairs sorted by decreasing eigenvalue.

    ``vectors[:, i]`` is the unit eigenvector for ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def unit_rows(X, atol=1e-8):
    """Validate that ``X`` is a 2-D array of unit-norm rows and return it as float."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains non-finite values")
    bad = np.flatnonzero(np.abs(np.linalg.norm(X, axis=1) - 1.0) > atol)
    if bad.size:
        raise ValueError(f"rows are not unit norm: indices {bad[:20].tolist()}")
    return X


def scatter(X, weights=None):
    """Weighted scatter matrix sum_i w_i x_i x_i^T / sum_i w_i.

    Parameters
    ----------
    X : (n, p) array of unit rows
    weights : (n,) array of nonnegative weights, optional

    Raises
    ------
    ValueError
        If the weights sum to zero (an empty cluster).
    """
    X = unit_rows(X)
    if weights is None:
        return X.T @ X / X.shape[0]
    w = np.asarray(weights, dtype=float)
    if w.shape != (X.shape[0],) or np.any(w < 0):
        raise ValueError("weights must be a nonnegative vector with one entry per row")
    total = w.sum()
    if not total > 0:
        raise ValueError("weights sum to zero (empty cluster)")
    S = (X * w[:, None]).T @ X / total
    return 0.5 * (S + S.T)


@functools.lru_cache(maxsize=64)
def _round_robin(p):
    """Pairings for a parallel Jacobi sweep: p-1 rounds (p even) of p/2
    disjoint index pairs covering every pair exactly once."""
    m = p + (p % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(i, j), max(i, j)) for i, j in pairs if i < p and j < p]
        rounds.append((np.array([i for i, _ in pairs]), np.array([j for _, j in pairs])))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return rounds


def _off_norm(A):
    return np.linalg.norm(A - np.diag(np.diag(A)))


def _jacobi(A, tol, max_sweeps):
    p = A.shape[0]
    A = A.copy()
    V = np.eye(p)
    scale = np.linalg.norm(A)
    if p == 1 or scale == 0:
        return A, V, 0.0
    rounds = _round_robin(p)
    off = _off_norm(A)
    for _ in range(max_sweeps):
        if off <= tol * scale:
            return A, V, off
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            A, V = _sweep(A, V, rounds)
        off = _off_norm(A)
    if off <= tol * scale:
        return A, V, off
    raise JacobiConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})", off
    )


def _sweep(A, V, rounds):
    p = A.shape[0]
    for I, J in rounds:
        theta = (A[J, J] - A[I, I]) / (2.0 * A[I, J])
        # hypot avoids overflow for huge theta, where t ~ 1/(2 theta)
        t = np.copysign(1.0, theta) / (np.abs(theta) + np.hypot(theta, 1.0))
        # a_pq == 0 gives theta = +-inf (t = 0) or nan
        t[np.isnan(t)] = 0.0
        cs = 1.0 / np.sqrt(t * t + 1.0)
        sn = t * cs
        # one dense product per round beats fancy-indexed row and column
        # updates at the p this is used for (measured up to p = 100)
        R = np.eye(p)
        R[I, I] = cs
        R[J, J] = cs
        R[I, J] = sn
        R[J, I] = -sn
        A = R.T @ A @ R
        A[I, J] = 0.0
        A[J, I] = 0.0
        V = V @ R
    return A, V


def sym_eig(S, tol=1e-12, max_sweeps=60):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * ||S||_F``.  Each eigenvector is sign-normalised so that its
    largest-magnitude entry is positive, which makes the output
    deterministic (axial data do not distinguish v from -v).
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.allclose(S, S.T, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise ValueError("matrix is not symmetric")
    A, V, _ = _jacobi(0.5 * (S + S.T), tol, max_sweeps)
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    V = V[:, order]
    # re-orthonormalise away the rounding accumulated over many rotations
    V, _ = np.linalg.qr(V)
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return EigDecomposition(values=values, vectors=V * signs + 0.0)
