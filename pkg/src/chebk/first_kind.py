"""Weighted minimax (first-kind) Chebyshev polynomials on interval unions.

The minimax problem min_c { c : c*sigma +- omega*P >= 0 on every interval }
is turned into a semidefinite program by certifying each polynomial
inequality on [a, b] with a pair of Hermitian PSD matrices (Q, R) whose
diagonal sums reproduce the Chebyshev coefficients of the polynomial.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import chebyshev as cb
from .chebyshev import ChebPoly, RationalWeight
from .errors import AllPatternsInfeasible, SolverFailure
from .intervals import AffineMap, IntervalUnion, normalize, validate
from .sdp import ConicProblem, Status, solve

log = logging.getLogger(__name__)

EQUI_RTOL = 1e-6
EQUI_SEP = 1e-7
TIE_TOL = 1e-9
GAP_ROOT_TOL = 1e-9
# the relaxed sign constraint can leave a double root in a gap, which the
# eigenvalue solver splits into a pair with imaginary part ~ sqrt(eps)
GAP_ROOT_IMAG = 1e-6


@dataclass
class FirstKindResult:
    poly: ChebPoly
    t_value: float
    equioscillation: list
    N: int
    K: IntervalUnion
    weight: RationalWeight
    residuals: dict = field(default_factory=dict)
    pattern: tuple | None = None
    verified: bool | None = None
    pattern_values: list = field(default_factory=list)

    @property
    def normalized(self) -> ChebPoly:
        return self.poly / self.t_value

    @property
    def alternation_count(self) -> int:
        return len(self.equioscillation)

    def gap_roots(self):
        """Real roots lying strictly inside an open gap of K."""
        return _gap_roots(self.poly, self.K)


def alpha_beta(a: float, b: float):
    """Constants of the interval [a, b] in the nonnegativity certificate."""
    if not (-1.0 <= a < b <= 1.0):
        raise ValueError(f"[{a}, {b}] must satisfy -1 <= a < b <= 1")
    ta, tb = np.arccos(a), np.arccos(b)
    alpha = 0.5 * np.exp(0.5j * (ta + tb))
    beta = float(np.cos(0.5 * ta - 0.5 * tb))
    return complex(alpha), beta


def nonneg_block(problem: ConicProblem, interval, lin, const):
    """Certify C >= 0 on ``interval`` where C has T-coefficients lin @ x + const.

    ``lin`` is an (M+1) x n_free matrix acting on the free variables of
    ``problem``. Adds the blocks Q ((M+1)^2) and R (M^2) and returns their ids.
    """
    a, b = interval
    lin = np.atleast_2d(np.asarray(lin, dtype=float))
    const = np.asarray(const, dtype=float)
    M = lin.shape[0] - 1
    if M < 1:
        # a constant: pad so that R exists and the same template applies
        lin = np.vstack([lin, np.zeros((1, lin.shape[1]))])
        const = np.concatenate([const, [0.0]])
        M = 1
    alpha, beta = alpha_beta(a, b)
    q = problem.add_block(M + 1, complex=True)
    r = problem.add_block(M, complex=True)
    for m in range(M + 1):
        AQ = np.eye(M + 1, k=m)
        AR = alpha * np.eye(M, k=m - 1) - beta * np.eye(M, k=m) + np.conj(alpha) * np.eye(M, k=m + 1)
        half = 1.0 if m == 0 else 0.5
        free = {k: -half * v for k, v in enumerate(lin[m]) if v != 0}
        problem.add_complex_constraint(free, {q: AQ, r: AR}, half * const[m],
                                       drop_imaginary=(m == 0))
    return q, r


def _setup(K, w):
    K = K if isinstance(K, IntervalUnion) else validate(K)
    w = RationalWeight.unit() if w is None else w
    w.validate_on(K)
    return K, w


def _to_normalized(K, w, use_normalize):
    if not use_normalize:
        lo, hi = K.hull
        if lo < -1.0 or hi > 1.0:
            raise ValueError("without normalization K must lie inside [-1, 1]")
        return K, w, AffineMap(1.0, 0.0)
    Kn, f = normalize(K)
    if f.is_identity:
        return Kn, w, f
    return Kn, w.composed(1.0 / f.scale, -f.shift / f.scale), f


def _from_normalized(P: ChebPoly, f: AffineMap, N: int) -> ChebPoly:
    """Monic raw polynomial from the monic normalized one."""
    if f.is_identity:
        return P
    raw = cb.compose_affine(P, f.scale, f.shift).coeffs / f.scale ** N
    c = np.zeros(N + 1)
    c[: len(raw)] = raw[: N + 1]
    c[N] = cb.monic_leading(N)
    return ChebPoly(c)


def _build(K: IntervalUnion, w: RationalWeight, N: int, pattern=()):
    """The minimax SDP with p_N = 1 (the problem is homogeneous in (c, p))."""
    sigma = w.sigma.coeffs
    W = cb.mult_matrix(w.omega, N)
    M = max(len(sigma) - 1, W.shape[0] - 1)
    prob = ConicProblem()
    prob.add_free(N + 1)              # c, p_0 .. p_{N-1}
    sig = np.zeros(M + 1)
    sig[: len(sigma)] = sigma
    Wp = np.zeros((M + 1, N + 1))
    Wp[: W.shape[0]] = W
    for a, b in K:
        for sign in (1.0, -1.0):
            lin = np.zeros((M + 1, N + 1))
            lin[:, 0] = sig
            lin[:, 1:] = sign * Wp[:, :N]
            nonneg_block(prob, (a, b), lin, sign * Wp[:, N])
    for eps, (b0, a1) in zip(pattern, K.gaps()):
        lin = np.zeros((N + 1, N + 1))
        lin[:N, 1:] = eps * np.eye(N)
        const = np.zeros(N + 1)
        const[N] = eps
        nonneg_block(prob, (b0, a1), lin, const)
    prob.set_objective({0: 1.0})
    return prob


def equioscillation(P: ChebPoly, w: RationalWeight, K: IntervalUnion, c: float,
                    rtol: float = EQUI_RTOL, sep: float = EQUI_SEP) -> list:
    """Alternating extremal points (x, sign) of omega P / sigma on K."""
    pts = np.concatenate([cb.stationary_points(P, w, iv) for iv in K])
    pts = np.unique(pts)
    vals = cb.evaluate(cb.multiply(w.omega, P), pts) / cb.evaluate(w.sigma, pts)
    keep = np.abs(vals) >= c * (1.0 - rtol)
    cand = []
    for x, v in zip(pts[keep], vals[keep]):
        if cand and x - cand[-1][0] <= sep:
            if abs(v) > abs(cand[-1][1]):
                cand[-1] = (x, v)
            continue
        cand.append((x, v))
    out = []
    for x, v in cand:
        s = 1 if v > 0 else -1
        if out and out[-1][1] == s:
            if abs(v) > abs(out[-1][2]):
                out[-1] = (x, s, v)
            continue
        out.append((x, s, v))
    return [(float(x), s) for x, s, _ in out]


def _solve_normalized(Kn, wn, N, pattern, tol, max_iter, backend):
    prob = _build(Kn, wn, N, pattern)
    sol = solve(prob, tol=tol, max_iter=max_iter, backend=backend)
    return prob, sol


def _residuals(sol) -> dict:
    return {
        "primal": float(sol.primal_residual),
        "dual": float(sol.dual_residual),
        "gap": float(sol.gap),
        "min_eigenvalue": float(sol.min_eigenvalue),
        "iterations": int(sol.iterations),
    }


def _poly_from(sol, N):
    scale = cb.monic_leading(N)
    p = np.append(sol.free_values[1:], 1.0) * scale
    p[N] = scale
    return ChebPoly(p), float(sol.free_values[0]) * scale


def _finish(Kn, wn, f, K, w, N, P, c_norm, sol):
    P_raw = _from_normalized(P, f, N)
    if f.is_identity:
        t_value = c_norm
    else:
        t_value = c_norm / f.scale ** N
    # the certified value is the solver's c; the attained sup norm is the
    # best available estimate of the same quantity and is reported alongside
    attained = max(cb.sup_norm_weighted(P_raw, w, iv)[0] for iv in K)
    res = _residuals(sol)
    res["attained_sup_norm"] = attained
    eq = equioscillation(P_raw, w, K, attained)
    return FirstKindResult(poly=P_raw, t_value=float(t_value), equioscillation=eq, N=N,
                           K=K, weight=w, residuals=res)


def solve_first_kind(K, w: RationalWeight | None = None, N: int = 1, tol: float = 1e-8,
                     max_iter: int = 200, backend=None, normalize: bool = True) -> FirstKindResult:
    """Monic degree-N polynomial minimizing max over K of |P / w|."""
    if N < 1:
        raise ValueError("N must be at least 1")
    K, w = _setup(K, w)
    Kn, wn, f = _to_normalized(K, w, normalize)
    _, sol = _solve_normalized(Kn, wn, N, (), tol, max_iter, backend)
    if sol.status != Status.OPTIMAL:
        raise SolverFailure(f"minimax SDP ended with status {sol.status.value}", sol)
    P, c = _poly_from(sol, N)
    return _finish(Kn, wn, f, K, w, N, P, c, sol)


def gray_patterns(count: int):
    """All sign vectors of length ``count`` in Gray-code order, starting at all +1."""
    out = []
    for i in range(2 ** count):
        g = i ^ (i >> 1)
        out.append(tuple(-1 if (g >> k) & 1 else 1 for k in range(count)))
    return out


def _gap_roots(P: ChebPoly, K: IntervalUnion, tol: float = GAP_ROOT_TOL,
               imag_tol: float = GAP_ROOT_IMAG):
    if P.degree < 1:
        return []
    r = cb.roots(P, imag_tol=imag_tol)
    r = r[np.abs(r.imag) <= imag_tol].real
    return [float(x) for x in r for b0, a1 in K.gaps() if b0 + tol < x < a1 - tol]


def solve_first_kind_restricted(K, w: RationalWeight | None = None, N: int = 1,
                                tol: float = 1e-8, max_iter: int = 200, backend=None,
                                normalize: bool = True) -> FirstKindResult:
    """Minimax polynomial whose sign is constant on every gap of K.

    All 2^(L-1) sign patterns are solved; the smallest optimum wins (ties go
    to the pattern met first in Gray-code order). ``verified`` tells whether
    the winner actually has no root inside an open gap.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    K, w = _setup(K, w)
    Kn, wn, f = _to_normalized(K, w, normalize)
    best = None
    record = []
    for pattern in gray_patterns(K.L - 1):
        _, sol = _solve_normalized(Kn, wn, N, pattern, tol, max_iter, backend)
        if sol.status != Status.OPTIMAL:
            record.append((pattern, sol.status.value, None))
            log.debug("pattern %s: %s", pattern, sol.status.value)
            continue
        P, c = _poly_from(sol, N)
        record.append((pattern, "optimal", c))
        if best is None or c < best[2] - TIE_TOL:
            best = (pattern, sol, c, P)
    if best is None:
        if all(s == "infeasible" for _, s, _ in record):
            raise AllPatternsInfeasible("no gap sign pattern admits a feasible polynomial")
        raise SolverFailure("no gap sign pattern was solved to optimality")
    if any(s == "numerical_failure" for _, s, _ in record):
        warnings.warn("some sign patterns failed numerically and were skipped")
    pattern, sol, c, P = best
    res = _finish(Kn, wn, f, K, w, N, P, c, sol)
    scale = 1.0 if f.is_identity else f.scale ** N
    res.pattern = pattern
    res.pattern_values = [(p, s, None if v is None else v / scale) for p, s, v in record]
    res.verified = not res.gap_roots()
    if not res.verified:
        warnings.warn("restricted minimizer has a root inside a gap of K")
    return res
