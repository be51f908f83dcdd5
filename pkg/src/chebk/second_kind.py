"""Ersatz second-kind Chebyshev polynomials (minimal weighted L1 norm).

The L1 norm of P / w on each interval is written as the total mass of two
nonnegative measures on [0, pi] whose difference is fixed by P. Replacing the
measures by their first d+1 cosine moments (constrained by Toeplitz
positivity) gives a computable lower bound, the ersatz norm, which increases
to the L1 norm as d grows. Minimizing it over monic P gives a polynomial
together with a certified relative error delta.
"""

from __future__ import annotations

import hashlib
import logging
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import chebyshev as cb
from . import serialization as ser
from .chebyshev import ChebPoly, RationalWeight
from .errors import QuadratureNonConvergence, SolverFailure, WeightVanishes
from .first_kind import _from_normalized
from .intervals import IntervalUnion, normalize, validate
from .sdp import LMIProblem, Status, solve

log = logging.getLogger(__name__)

J_ATOL = 1e-11
INSIDE_TOL = 1e-7


def default_degree(N: int) -> int:
    return max(4 * N, 40)


@dataclass
class SecondKindResult:
    poly: ChebPoly
    ersatz_value: float
    l1_value: float
    delta: float
    d: int
    N: int
    K: IntervalUnion
    moment_vectors: list
    roots_report: dict
    residuals: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    target_reached: bool | None = None
    # the L1 minimizer need not be unique; nothing here certifies uniqueness
    uniqueness_certified: bool = False


# ---------------------------------------------------------------------------
# J matrices


def j_closed_form(d: int, N: int) -> np.ndarray:
    """J for w = 1: int_0^pi cos(k t) sin((n+1) t) dt."""
    k = np.arange(d + 1)[:, None]
    n = np.arange(N + 1)[None, :]
    same = (k + n) % 2 == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 2.0 * (n + 1) / ((n + 1) ** 2 - k ** 2)
    return np.where(same, val, 0.0)


def _j_panels(inv_w, d, N, panels, order=32):
    x, wts = cb.gauss_legendre(order)
    edges = np.linspace(0.0, np.pi, panels + 1)
    h = 0.5 * np.diff(edges)
    theta = (0.5 * (edges[:-1] + edges[1:])[:, None] + h[:, None] * x[None, :]).ravel()
    qw = (h[:, None] * wts[None, :]).ravel()
    f = qw * inv_w(np.cos(theta))
    C = np.cos(np.outer(theta, np.arange(d + 1)))
    S = np.sin(np.outer(theta, np.arange(1, N + 2)))
    return C.T @ (f[:, None] * S)


def j_quadrature(inv_w, d: int, N: int, atol: float = J_ATOL, max_panels: int = 1 << 14):
    """J for a general weight: Gauss-Legendre panels in theta with panel doubling.

    ``inv_w`` evaluates 1/w_l on [-1, 1]. Starts with at least 4(d+N+2)
    nodes and doubles until two successive results agree to ``atol``.
    """
    order = 32
    panels = max(1, -(-4 * (d + N + 2) // order))
    prev = _j_panels(inv_w, d, N, panels, order)
    while panels < max_panels:
        panels *= 2
        cur = _j_panels(inv_w, d, N, panels, order)
        if np.max(np.abs(cur - prev)) <= atol:
            return cur
        prev = cur
    raise QuadratureNonConvergence("J-matrix quadrature did not converge")


def _cache_path(key):
    root = os.environ.get("CHEBK_CACHE_DIR")
    if not root:
        return None
    digest = hashlib.sha256(ser.dumps(key).encode()).hexdigest()[:32]
    return os.path.join(root, f"J-{digest}.json")


def build_J(interval, d: int, N: int, w=None) -> np.ndarray:
    """(d+1) x (N+1) moment matrix of [a, b] for the weight w transplanted to [-1, 1]."""
    a, b = interval
    if w is None:
        return j_closed_form(d, N)
    if isinstance(w, RationalWeight) and w.sigma.degree == 0 and w.omega.degree == 0:
        return j_closed_form(d, N) * (w.omega.coeffs[0] / w.sigma.coeffs[0])

    half, mid = 0.5 * (b - a), 0.5 * (a + b)

    def inv_w(x):
        v = np.asarray(w(half * x + mid), dtype=float)
        if np.any(~(v > 0)):
            raise WeightVanishes(f"weight is not positive on [{a}, {b}]")
        return 1.0 / v

    key = None
    if isinstance(w, RationalWeight):
        key = {"a": a, "b": b, "d": d, "N": N, "weight": w.fingerprint()}
    path = _cache_path(key) if key else None
    if path and os.path.exists(path):
        doc = ser.load(path)
        if doc.get("key") == ser.loads(ser.dumps(key)):
            return np.array([[ser.to_float(v) for v in row] for row in doc["J"]])
    J = j_quadrature(inv_w, d, N)
    if path:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + ".tmp"
        ser.dump({"key": key, "J": J.tolist()}, tmp)
        os.replace(tmp, path)
    return J


def moment_maps(K: IntervalUnion, w, d: int, N: int) -> list:
    """Per interval, the matrix J^l W^l sending T-coefficients of P to y+ - y-."""
    return [build_J((a, b), d, N, w) @ cb.second_kind_matrix((a, b), N) for a, b in K]


# ---------------------------------------------------------------------------
# ersatz norm


def _check_d(d, N):
    if d < N:
        raise ValueError(f"moment degree d={d} must be at least N={N}")


def ersatz_norm(P: ChebPoly, K, w=None, d: int | None = None, tol: float = 1e-9,
                max_iter: int = 200, backend=None):
    """Truncated-moment lower bound of the L1 norm of P / w on K.

    Returns (value, [(y_plus, y_minus) per interval]).
    """
    K = K if isinstance(K, IntervalUnion) else validate(K)
    P = P.to_T()
    N = P.degree
    d = default_degree(max(N, 1)) if d is None else d
    _check_d(d, N)
    if P.is_zero:
        z = np.zeros(d + 1)
        return 0.0, [(z.copy(), z.copy()) for _ in K]
    scale = float(np.max(np.abs(P.coeffs)))
    p = P.coeffs / scale
    maps = moment_maps(K, w, d, N)
    L, n1 = K.L, d + 1
    prob = LMIProblem(L * n1)
    c = np.zeros(L * n1)
    const = 0.0
    for l, ((a, b), Ml) in enumerate(zip(K, maps)):
        sel = np.zeros((n1, L * n1))
        sel[:, l * n1:(l + 1) * n1] = np.eye(n1)
        v = Ml @ p
        prob.add_toeplitz(sel)
        prob.add_toeplitz(sel, -v)
        c[l * n1] += b - a
        const -= 0.5 * (b - a) * v[0]
    prob.set_objective(c)
    sol = solve(prob, tol=tol, max_iter=max_iter, backend=backend)
    if sol.status != Status.OPTIMAL:
        raise SolverFailure(f"ersatz norm SDP ended with status {sol.status.value}", sol)
    x = sol.free_values
    moments = []
    for l, Ml in enumerate(maps):
        yp = x[l * n1:(l + 1) * n1] * scale
        moments.append((yp, yp - Ml @ P.coeffs))
    return float((sol.objective_value + const) * scale), moments


# ---------------------------------------------------------------------------
# minimization


def check_roots(poly: ChebPoly, K, imag_tol: float = 1e-8, inside_tol: float = INSIDE_TOL) -> dict:
    """Real roots of ``poly`` with their separation and membership in K."""
    K = K if isinstance(K, IntervalUnion) else validate(K)
    if poly.degree < 1:
        return {"degree": poly.degree, "real_roots": [], "real_root_count": 0,
                "min_separation": None, "inside": [], "all_simple_real_inside": poly.degree == 0}
    r = cb.roots(poly, imag_tol=imag_tol)
    real = np.sort(r[np.abs(r.imag) <= imag_tol].real)
    sep = float(np.min(np.diff(real))) if real.size > 1 else None
    inside = [bool(K.contains(float(x), inside_tol)) for x in real]
    simple = sep is None or sep > 1e-6
    return {
        "degree": poly.degree,
        "real_roots": [float(x) for x in real],
        "real_root_count": int(real.size),
        "min_separation": sep,
        "inside": inside,
        "all_simple_real_inside": bool(real.size == poly.degree and simple and all(inside)),
    }


def _weight_or_unit(w):
    return None if (isinstance(w, RationalWeight) and w.is_unit) else w


def solve_second_kind(K, w=None, N: int = 1, d: int | None = None, tol: float = 1e-9,
                      max_iter: int = 200, backend=None) -> SecondKindResult:
    """Monic degree-N polynomial minimizing the ersatz norm of order d."""
    if N < 1:
        raise ValueError("N must be at least 1")
    K = K if isinstance(K, IntervalUnion) else validate(K)
    if isinstance(w, RationalWeight):
        w.validate_on(K)
    d = default_degree(N) if d is None else d
    _check_d(d, N)
    Kn, f = normalize(K)
    s = f.scale
    wn = _weight_or_unit(w)
    if wn is not None and not f.is_identity:
        if isinstance(wn, RationalWeight):
            wn = wn.composed(1.0 / s, -f.shift / s)
        else:
            wraw = wn
            wn = lambda u: wraw(f.inverse(u))  # noqa: E731
    maps = moment_maps(Kn, wn, d, N)

    # variables: y^{l,+} for each interval, then p_0 .. p_{N-1}; p_N = 1
    L, n1 = Kn.L, d + 1
    ny = L * n1
    prob = LMIProblem(ny + N)
    c = np.zeros(ny + N)
    const = 0.0
    for l, ((a, b), Ml) in enumerate(zip(Kn, maps)):
        sel = np.zeros((n1, ny + N))
        sel[:, l * n1:(l + 1) * n1] = np.eye(n1)
        minus = sel.copy()
        minus[:, ny:] = -Ml[:, :N]
        prob.add_toeplitz(sel)
        prob.add_toeplitz(minus, -Ml[:, N])
        # (b-a)/2 (y0+ + y0-) with y0- = y0+ - (M p)_0
        c[l * n1] += b - a
        c[ny:] -= 0.5 * (b - a) * Ml[0, :N]
        const -= 0.5 * (b - a) * Ml[0, N]
    prob.set_objective(c)
    sol = solve(prob, tol=tol, max_iter=max_iter, backend=backend)
    if sol.status != Status.OPTIMAL:
        raise SolverFailure(f"second-kind SDP ended with status {sol.status.value}", sol)

    lead = cb.monic_leading(N)
    x = sol.free_values
    p = np.append(x[ny:], 1.0) * lead
    p[N] = lead
    Pn = ChebPoly(p)
    # undo the normalization: raw P(x) = s^-N Pn(s x + shift), masses scale by s^-(N+1)
    P = _from_normalized(Pn, f, N)
    back = lead / s ** N
    ersatz = (sol.objective_value + const) * lead / s ** (N + 1)
    moments = []
    for l, Ml in enumerate(maps):
        yp = x[l * n1:(l + 1) * n1]
        ym = yp - Ml @ np.append(x[ny:], 1.0)
        moments.append((yp * back, ym * back))
    l1 = cb.l1_norm_weighted(P, w, K)
    delta = 1.0 - ersatz / l1 if l1 > 0 else 0.0
    residuals = {
        "primal": float(sol.primal_residual),
        "dual": float(sol.dual_residual),
        "gap": float(sol.gap),
        "min_eigenvalue": float(sol.min_eigenvalue),
        "iterations": int(sol.iterations),
    }
    return SecondKindResult(poly=P, ersatz_value=float(ersatz), l1_value=float(l1),
                            delta=float(delta), d=d, N=N, K=K, moment_vectors=moments,
                            roots_report=check_roots(P, K), residuals=residuals)


def auto_degree(K, w=None, N: int = 1, delta_target: float = 1e-3, d0: int | None = None,
                d_max: int = 200, tol: float = 1e-9, max_iter: int = 200,
                backend=None) -> SecondKindResult:
    """Double d from d0 until delta <= delta_target; the last step is capped at d_max."""
    if delta_target <= 0:
        raise ValueError("delta_target must be positive")
    d = default_degree(N) if d0 is None else d0
    _check_d(d, N)
    history = []
    while True:
        res = solve_second_kind(K, w, N, d, tol=tol, max_iter=max_iter, backend=backend)
        history.append((d, res.delta))
        log.info("d=%d delta=%.3e", d, res.delta)
        if res.delta <= delta_target or d >= d_max:
            break
        d = min(2 * d, d_max)
    res.history = history
    res.target_reached = res.delta <= delta_target
    if not res.target_reached:
        warnings.warn(f"delta {res.delta:.3e} above target {delta_target:.1e} at d={d}")
    return res
