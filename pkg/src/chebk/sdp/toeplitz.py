"""Structured kernels for symmetric Toeplitz blocks.

A Toeplitz block is ``Toep(v) = sum_k v_k T_k`` with ``T_0 = I`` and
``T_k = S_k + S_k^T`` (``S_k`` has ones on the k-th superdiagonal).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz


def toep(v) -> np.ndarray:
    """Symmetric Toeplitz matrix with first row v."""
    return toeplitz(np.asarray(v, dtype=float))


def diagonal_sums(Z: np.ndarray) -> np.ndarray:
    """t_k = <T_k, Z> for k = 0..n-1 (Z symmetric)."""
    n = Z.shape[0]
    out = np.empty(n)
    out[0] = np.trace(Z)
    for k in range(1, n):
        out[k] = np.trace(Z, k) + np.trace(Z, -k)
    return out


def autocorrelation(theta: np.ndarray) -> np.ndarray:
    """corr[u, v] = sum_{i,m} theta[i+u, m+v] theta[i, m], indices mod 2n."""
    n = theta.shape[0]
    size = (2 * n, 2 * n)
    F = np.fft.rfft2(theta, s=size)
    return np.fft.irfft2(F * np.conj(F), s=size)


def schur_matrix(theta: np.ndarray) -> np.ndarray:
    """Matrix with entries <T_k, theta T_l theta>, k, l = 0..n-1.

    Uses tr(S_a theta S_b theta) = corr(a, -b), so the whole matrix costs one
    2-D FFT autocorrelation instead of n^2 dense trace products.
    """
    n = theta.shape[0]
    C = autocorrelation(theta)
    k = np.arange(n)
    pos = C[np.ix_(k, k)]            # corr(k, l)
    neg = C[np.ix_(k, (-k) % (2 * n))]  # corr(k, -l)
    out = 2.0 * (pos + neg)
    out[0, :] *= 0.5
    out[:, 0] *= 0.5
    return out


def schur_matrix_direct(theta: np.ndarray) -> np.ndarray:
    """Reference O(n^5) evaluation of :func:`schur_matrix` (tests only)."""
    n = theta.shape[0]
    basis = [toep(np.eye(n)[k]) for k in range(n)]
    prods = [theta @ B @ theta for B in basis]
    return np.array([[np.sum(Bk * P) for P in prods] for Bk in basis])
