"""Logarithmic capacity estimates from monic extremal polynomials.

Both the Chebyshev numbers t_N and the L2 norms of the monic orthogonal
polynomials behave like cap(K)^N, so their N-th roots estimate the capacity.
The two are tied together by

    (N+1)^-1 * min_l (b_l - a_l)^(1/2) * t_N  <=  ||P_N||_L2  <=  (sum_l (b_l - a_l))^(1/2) * t_N,

which is checked by :func:`sandwich`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as npcheb

from . import chebyshev as cb
from .chebyshev import ChebPoly
from .errors import GramSingular
from .first_kind import _from_normalized, solve_first_kind
from .intervals import IntervalUnion, normalize, validate

MAX_DEGREE = 60
WARN_DEGREE = 30


@dataclass
class CapacityEstimate:
    N: int
    method: str  # "sup_norm" | "l2_norm"
    raw_value: float
    estimate: float
    bounds: tuple | None = None


def t_integrals(K: IntervalUnion, m_max: int) -> np.ndarray:
    """Exact integrals of T_0..T_m_max over K."""
    out = np.zeros(m_max + 1)
    for m in range(m_max + 1):
        anti = npcheb.chebint(np.eye(m + 1)[m])
        out[m] = sum(npcheb.chebval(b, anti) - npcheb.chebval(a, anti) for a, b in K)
    return out


def gram_matrix(K: IntervalUnion, N: int) -> np.ndarray:
    """G_ij = integral over K of T_i T_j, via T_i T_j = (T_{i+j} + T_{|i-j|}) / 2."""
    I = t_integrals(K, 2 * N)
    i = np.arange(N + 1)
    return 0.5 * (I[i[:, None] + i[None, :]] + I[np.abs(i[:, None] - i[None, :])])


def l2_monic_min(K, N: int):
    """Monic degree-N polynomial of least L2(K) norm, and that norm."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if N > MAX_DEGREE:
        raise ValueError(f"degree capped at {MAX_DEGREE}")
    if N > WARN_DEGREE:
        warnings.warn("Gram matrices beyond degree 30 are poorly conditioned")
    K = K if isinstance(K, IntervalUnion) else validate(K)
    Kn, f = normalize(K)
    G = gram_matrix(Kn, N)
    lead = cb.monic_leading(N)
    try:
        cf = sla.cho_factor(G[:N, :N], lower=True)
    except (np.linalg.LinAlgError, sla.LinAlgError):
        raise GramSingular("Gram matrix is not positive definite") from None
    q = sla.cho_solve(cf, -lead * G[:N, N])
    p = np.append(q, lead)
    sq = float(p @ G @ p)
    if not np.isfinite(sq) or sq < 0:
        raise GramSingular("negative residual norm from the normal equations")
    P = _from_normalized(ChebPoly(p), f, N)
    # ||P||_raw^2 = s^-(2N+1) ||Pn||^2 with s the normalizing scale
    l2 = np.sqrt(sq) / f.scale ** (N + 0.5)
    return P, float(l2)


def capacity_estimate(K, N: int, method: str = "l2_norm", **kw) -> CapacityEstimate:
    """raw^(1/N) for raw = t_N (sup_norm) or the minimal monic L2 norm (l2_norm)."""
    K = K if isinstance(K, IntervalUnion) else validate(K)
    if method == "sup_norm":
        raw = solve_first_kind(K, None, N, **kw).t_value
    elif method == "l2_norm":
        raw = l2_monic_min(K, N)[1]
    else:
        raise ValueError(f"unknown method {method!r}")
    return CapacityEstimate(N=N, method=method, raw_value=float(raw), estimate=float(raw ** (1.0 / N)))


def sandwich(K, N: int, t_value: float | None = None, **kw) -> dict:
    """Evaluate both sides of the L2 versus sup-norm inequality chain."""
    K = K if isinstance(K, IntervalUnion) else validate(K)
    if t_value is None:
        t_value = solve_first_kind(K, None, N, **kw).t_value
    l2 = l2_monic_min(K, N)[1]
    lower = np.sqrt(min(K.lengths)) * t_value / (N + 1)
    upper = np.sqrt(K.total_length) * t_value
    return {"lower": float(lower), "l2": float(l2), "upper": float(upper), "t_value": float(t_value)}
