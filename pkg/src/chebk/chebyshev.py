"""Polynomials in Chebyshev bases.

Everything internal works with coefficient vectors in the Chebyshev basis of
the first kind (T) or second kind (U); the monomial basis only appears at the
I/O boundary. Arithmetic that numpy already gets right (products, colleague
matrix roots, derivatives, antiderivatives, monomial conversion) is delegated
to :mod:`numpy.polynomial.chebyshev`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import QuadratureNonConvergence, WeightInvalid, WeightVanishes, ZeroPolynomial
from .intervals import IntervalUnion

ROOT_IMAG_TOL = 1e-10


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float)).copy()
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class ChebPoly:
    """A polynomial sum_n coeffs[n] * B_n with B = T or U."""

    coeffs: np.ndarray
    basis: str = "T"

    def __post_init__(self):
        if self.basis not in ("T", "U"):
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def basis_poly(cls, n: int, basis: str = "T") -> "ChebPoly":
        c = np.zeros(n + 1)
        c[n] = 1.0
        return cls(c, basis)

    @classmethod
    def constant(cls, value: float, basis: str = "T") -> "ChebPoly":
        return cls([value], basis)

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports 0."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        return (isinstance(other, ChebPoly) and self.basis == other.basis
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.basis, self.coeffs.tobytes()))

    def __repr__(self):
        return f"ChebPoly({self.coeffs.tolist()}, basis={self.basis!r})"

    def __add__(self, other: "ChebPoly") -> "ChebPoly":
        _same_basis(self, other)
        return ChebPoly(_padded_sum(self.coeffs, other.coeffs), self.basis)

    def __sub__(self, other: "ChebPoly") -> "ChebPoly":
        _same_basis(self, other)
        return ChebPoly(_padded_sum(self.coeffs, -other.coeffs), self.basis)

    def __neg__(self):
        return ChebPoly(-self.coeffs, self.basis)

    def __mul__(self, other):
        if isinstance(other, ChebPoly):
            return multiply(self, other)
        return ChebPoly(self.coeffs * float(other), self.basis)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "ChebPoly":
        return ChebPoly(self.coeffs / float(scalar), self.basis)

    def padded(self, length: int) -> np.ndarray:
        """Coefficient vector zero-padded to ``length`` entries."""
        out = np.zeros(length)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def to_T(self) -> "ChebPoly":
        return self if self.basis == "T" else u_to_t(self)

    def to_U(self) -> "ChebPoly":
        return self if self.basis == "U" else t_to_u(self)

    def derivative(self) -> "ChebPoly":
        return ChebPoly(npcheb.chebder(self.to_T().coeffs), "T")

    def leading_monomial_coefficient(self) -> float:
        """Coefficient of x**degree."""
        n = self.degree
        if self.basis == "T":
            return self.coeffs[n] * (1.0 if n == 0 else 2.0 ** (n - 1))
        return self.coeffs[n] * 2.0 ** n


def _same_basis(p: ChebPoly, q: ChebPoly) -> None:
    if p.basis != q.basis:
        raise ValueError("polynomials are expressed in different bases")


def _padded_sum(a, b):
    out = np.zeros(max(len(a), len(b)))
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def monic_leading(N: int, basis: str = "T") -> float:
    """Leading coefficient of the monic degree-N polynomial in the given basis."""
    if basis == "U":
        return 2.0 ** (-N)
    return 1.0 if N == 0 else 2.0 ** (1 - N)


# ---------------------------------------------------------------------------
# evaluation


def clenshaw(coeffs, x, basis: str = "T"):
    """Clenshaw recurrence for T- or U-series; x may be an array."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    two_x = 2.0 * x
    for ck in c[:0:-1]:
        b1, b2 = ck + two_x * b1 - b2, b1
    if basis == "T":
        return c[0] + x * b1 - b2
    return c[0] + two_x * b1 - b2


def evaluate(P: ChebPoly, x):
    """Value of P at x (scalar or array); |x| > 1 is allowed."""
    out = clenshaw(P.coeffs, x, P.basis)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# algebra


def multiply(P: ChebPoly, Q: ChebPoly) -> ChebPoly:
    """Product of two T-series."""
    return ChebPoly(npcheb.chebmul(P.to_T().coeffs, Q.to_T().coeffs), "T")


def mult_matrix(omega: ChebPoly, N: int) -> np.ndarray:
    """Matrix of p -> T-coefficients of omega * P for deg P <= N.

    Shape (deg omega + N + 1, N + 1); built from T_m T_n = (T_{m+n} + T_{|m-n|})/2.
    """
    w = omega.to_T().coeffs
    if not np.any(w):
        raise ZeroPolynomial("multiplier polynomial is zero")
    M = len(w) - 1 + N
    out = np.zeros((M + 1, N + 1))
    for n in range(N + 1):
        for m, wm in enumerate(w):
            out[m + n, n] += 0.5 * wm
            out[abs(m - n), n] += 0.5 * wm
    return out


@lru_cache(maxsize=64)
def _lobatto_interp_matrix(n: int) -> np.ndarray:
    """Values at cos(pi j / n), j = 0..n  ->  T-coefficients (exact for deg <= n)."""
    j = np.arange(n + 1)
    C = np.cos(np.pi * np.outer(j, j) / n)
    C[:, 0] *= 0.5
    C[:, -1] *= 0.5
    C *= 2.0 / n
    C[0] *= 0.5
    C[-1] *= 0.5
    C.setflags(write=False)
    return C


def lobatto_points(n: int) -> np.ndarray:
    """Chebyshev extremum points cos(pi j / n), j = 0..n, symmetrized."""
    if n == 0:
        return np.zeros(1)
    return np.sin(np.pi * np.arange(n, -n - 1, -2) / (2 * n))


def interpolate_values(values) -> np.ndarray:
    """T-coefficients of the interpolant of values given at lobatto_points(n)."""
    v = np.asarray(values, dtype=float)
    n = len(v) - 1
    if n == 0:
        return v.copy()
    return _lobatto_interp_matrix(n) @ v


def compose_affine(P: ChebPoly, scale: float, shift: float) -> ChebPoly:
    """T-coefficients of x -> P(scale * x + shift), same degree as P.

    Computed by sampling at deg P + 1 Chebyshev extremum points and
    interpolating, which is exact for polynomials up to rounding.
    """
    P = P.to_T()
    n = P.degree
    if n == 0:
        return P
    x = lobatto_points(n)
    c = interpolate_values(evaluate(P, scale * x + shift))
    out = np.zeros(n + 1)
    out[: len(c)] = c[: n + 1]
    return ChebPoly(out, "T")


def transplant(P: ChebPoly, a: float, b: float) -> ChebPoly:
    """P restricted to [a, b] and carried over to [-1, 1]."""
    if not a < b:
        raise ValueError("transplant needs a < b")
    return compose_affine(P, 0.5 * (b - a), 0.5 * (a + b))


def t_to_u(P: ChebPoly) -> ChebPoly:
    """Re-expand a T-series in the U basis.

    Uses T_0 = U_0, T_1 = U_1 / 2 and T_n = (U_n - U_{n-2}) / 2.
    """
    if P.basis == "U":
        return P
    t = P.coeffs
    u = np.zeros(len(t))
    u[0] = t[0]
    if len(t) > 1:
        u[1:] += 0.5 * t[1:]
        u[:-2] -= 0.5 * t[2:]
    return ChebPoly(u, "U")


def u_to_t(P: ChebPoly) -> ChebPoly:
    """Inverse of :func:`t_to_u` (U_n = 2 sum_{k = n, n-2, ...} T_k, halved at k = 0)."""
    if P.basis == "T":
        return P
    u = P.coeffs
    n = len(u) - 1
    t = np.zeros(n + 1)
    # back-substitution through the bidiagonal relation of t_to_u
    for k in range(n, -1, -1):
        acc = u[k] + (0.5 * t[k + 2] if k + 2 <= n else 0.0)
        t[k] = acc if k == 0 else 2.0 * acc
    return ChebPoly(t, "T")


def t_to_u_matrix(n: int) -> np.ndarray:
    """(n+1)x(n+1) matrix of :func:`t_to_u`."""
    out = np.eye(n + 1)
    out[1:, 1:] *= 0.5
    for k in range(2, n + 1):
        out[k - 2, k] = -0.5
    return out


def second_kind_matrix(interval: Sequence[float], N: int) -> np.ndarray:
    """Matrix taking T-coefficients of P to U-coefficients of P transplanted from [a, b]."""
    a, b = interval
    if not a < b:
        raise ValueError("second_kind_matrix needs a < b")
    out = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        out[:, n] = transplant(ChebPoly.basis_poly(n), a, b).padded(N + 1)
    return t_to_u_matrix(N) @ out


# ---------------------------------------------------------------------------
# roots


def roots(P: ChebPoly, imag_tol: float = ROOT_IMAG_TOL) -> np.ndarray:
    """All deg P roots (colleague matrix eigenvalues), sorted by real part.

    Roots whose imaginary part is at most ``imag_tol`` in magnitude are
    returned as exactly real.
    """
    c = P.to_T().coeffs
    if not np.any(c):
        raise ZeroPolynomial("the zero polynomial has no finite root set")
    if len(c) == 1:
        raise ValueError("roots() needs degree >= 1")
    r = npcheb.chebroots(c).astype(complex)
    r = np.where(np.abs(r.imag) <= imag_tol, r.real + 0j, r)
    return r[np.lexsort((r.imag, r.real))]


def real_roots(P: ChebPoly, lo: float = -np.inf, hi: float = np.inf,
               imag_tol: float = ROOT_IMAG_TOL) -> np.ndarray:
    """Real roots of P in [lo, hi]; empty for constants."""
    if P.degree < 1:
        return np.zeros(0)
    r = roots(P, imag_tol)
    r = r[np.abs(r.imag) <= imag_tol].real
    return np.sort(r[(r >= lo) & (r <= hi)])


def _newton_polish(P: ChebPoly, dP: ChebPoly, x: np.ndarray, steps: int = 3) -> np.ndarray:
    x = np.array(x, dtype=float)
    for _ in range(steps):
        d = evaluate(dP, x)
        ok = d != 0
        step = np.zeros_like(x)
        step[ok] = evaluate(P, x[ok]) / d[ok]
        x = x - step
    return x


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True, eq=False)
class RationalWeight:
    """w = sigma / omega with sigma, omega positive on the set of interest."""

    sigma: ChebPoly
    omega: ChebPoly

    def __post_init__(self):
        object.__setattr__(self, "sigma", self.sigma.to_T())
        object.__setattr__(self, "omega", self.omega.to_T())
        if self.sigma.is_zero or self.omega.is_zero:
            raise WeightInvalid("weight numerator and denominator must be nonzero")

    @classmethod
    def unit(cls) -> "RationalWeight":
        return cls(ChebPoly([1.0]), ChebPoly([1.0]))

    @classmethod
    def from_monomial(cls, sigma, omega) -> "RationalWeight":
        return cls(monomial_to_cheb(sigma), monomial_to_cheb(omega))

    @property
    def is_unit(self) -> bool:
        return (self.sigma.degree == 0 and self.omega.degree == 0
                and self.sigma.coeffs[0] == self.omega.coeffs[0])

    def __call__(self, x):
        return evaluate(self.sigma, x) / evaluate(self.omega, x)

    def inverse(self, x):
        return evaluate(self.omega, x) / evaluate(self.sigma, x)

    def composed(self, scale: float, shift: float) -> "RationalWeight":
        """The weight x -> w(scale * x + shift)."""
        return RationalWeight(compose_affine(self.sigma, scale, shift),
                              compose_affine(self.omega, scale, shift))

    def validate_on(self, K: IntervalUnion) -> "RationalWeight":
        """Raise :class:`WeightInvalid` unless sigma and omega are positive on K."""
        for name, poly in (("sigma", self.sigma), ("omega", self.omega)):
            for a, b in K:
                if not positive_on(poly, a, b):
                    raise WeightInvalid(f"{name} is not positive on [{a}, {b}]")
        return self

    def fingerprint(self) -> list:
        return [[repr(float(v)) for v in self.sigma.coeffs],
                [repr(float(v)) for v in self.omega.coeffs]]


def positive_on(P: ChebPoly, a: float, b: float, samples: int = 65) -> bool:
    """Rootfinding plus sign sampling check that P > 0 on [a, b]."""
    xs = np.linspace(a, b, samples)
    if np.any(evaluate(P, xs) <= 0):
        return False
    if P.degree >= 1 and real_roots(P, a, b, imag_tol=1e-8).size:
        return False
    return True


def as_weight_function(w) -> Callable:
    """Normalize ``None`` / RationalWeight / callable to a callable weight."""
    if w is None:
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    return w


# ---------------------------------------------------------------------------
# norms


def sup_norm_weighted(P: ChebPoly, w: Optional[RationalWeight], interval) -> tuple[float, float]:
    """max over [a, b] of |omega P / sigma|, with the maximizer.

    Candidates are the endpoints and the real stationary points of
    omega P / sigma, i.e. roots of (omega P)' sigma - (omega P) sigma'.
    """
    a, b = interval
    w = RationalWeight.unit() if w is None else w
    if not positive_on(w.sigma, a, b):
        raise WeightVanishes(f"sigma vanishes or is negative on [{a}, {b}]")
    q = multiply(w.omega, P.to_T())
    s = w.sigma
    D = multiply(q.derivative(), s) - multiply(q, s.derivative())
    cands = [a, b]
    if not D.is_zero and D.degree >= 1:
        r = roots(D)
        near = r[np.abs(r.imag) <= 1e-6 * max(1.0, b - a)].real
        near = near[(near >= a - 1e-9) & (near <= b + 1e-9)]
        if near.size:
            polished = _newton_polish(D, D.derivative(), near)
            polished = np.where(np.isfinite(polished), polished, near)
            cands.extend(np.clip(near, a, b))
            cands.extend(np.clip(polished, a, b))
    cands = np.asarray(cands)
    vals = np.abs(evaluate(q, cands) / evaluate(s, cands))
    i = int(np.argmax(vals))
    return float(vals[i]), float(cands[i])


def stationary_points(P: ChebPoly, w: Optional[RationalWeight], interval) -> np.ndarray:
    """Endpoints plus interior stationary points of omega P / sigma on [a, b], sorted."""
    a, b = interval
    w = RationalWeight.unit() if w is None else w
    q = multiply(w.omega, P.to_T())
    s = w.sigma
    D = multiply(q.derivative(), s) - multiply(q, s.derivative())
    pts = [a, b]
    if not D.is_zero and D.degree >= 1:
        r = roots(D)
        near = r[np.abs(r.imag) <= 1e-6 * max(1.0, b - a)].real
        near = near[(near > a) & (near < b)]
        if near.size:
            pol = _newton_polish(D, D.derivative(), near)
            ok = np.isfinite(pol) & (pol > a) & (pol < b)
            near = np.where(ok, pol, near)
            pts.extend(near)
    return np.unique(np.asarray(pts, dtype=float))


@lru_cache(maxsize=8)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, wts = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    wts.setflags(write=False)
    return x, wts


def _gl(f, a, b, order):
    x, wts = gauss_legendre(order)
    h = 0.5 * (b - a)
    vals = f(h * x + 0.5 * (a + b))
    return h * np.tensordot(wts, vals, axes=(0, 0))


def integrate_adaptive(f, a: float, b: float, order: int = 64, rtol: float = 1e-10,
                       atol: float = 1e-15, max_depth: int = 30):
    """Gauss-Legendre integral of a smooth (possibly vector-valued) f on [a, b].

    The fixed-order rule is compared with the same rule on both halves; on
    disagreement the interval is bisected recursively.
    """
    whole = _gl(f, a, b, order)
    return _refine(f, a, b, whole, order, rtol, atol, max_depth)


def _refine(f, a, b, whole, order, rtol, atol, depth):
    m = 0.5 * (a + b)
    left = _gl(f, a, m, order)
    right = _gl(f, m, b, order)
    halves = left + right
    err = np.max(np.abs(halves - whole))
    if err <= max(atol, rtol * np.max(np.abs(halves))):
        return halves
    if depth == 0:
        raise QuadratureNonConvergence(f"no convergence on [{a}, {b}]")
    return (_refine(f, a, m, left, order, rtol, atol, depth - 1)
            + _refine(f, m, b, right, order, rtol, atol, depth - 1))


def _pieces(P: ChebPoly, a: float, b: float) -> list[float]:
    br = [a]
    if not P.is_zero and P.degree >= 1:
        r = roots(P)
        near = r[np.abs(r.imag) <= 1e-8].real
        br.extend(sorted(x for x in near if a < x < b))
    br.append(b)
    return br


def integrate_on_pieces(f, P: ChebPoly, K: IntervalUnion, **kw):
    """Integral of f over K, split at the real roots of P inside each interval."""
    total = 0.0
    for a, b in K:
        br = _pieces(P, a, b)
        for lo, hi in zip(br, br[1:]):
            if hi > lo:
                total = total + integrate_adaptive(f, lo, hi, **kw)
    return total


def _checked_weight(w):
    wf = as_weight_function(w)

    def inv(x):
        v = np.asarray(wf(x), dtype=float)
        if np.any(~(v > 0)):
            raise WeightVanishes("weight is not positive on the integration set")
        return 1.0 / v

    return inv


def l1_norm_weighted(P: ChebPoly, w, K: IntervalUnion) -> float:
    """sum over the intervals of K of the integral of |P| / w."""
    if P.is_zero:
        return 0.0
    inv = _checked_weight(w)
    return float(integrate_on_pieces(lambda x: np.abs(evaluate(P, x)) * inv(x), P, K))


def sign_moments(P: ChebPoly, w, K: IntervalUnion, count: int) -> np.ndarray:
    """Integrals over K of sgn(P) T_j / w for j = 0..count-1."""
    inv = _checked_weight(w)
    eye = np.eye(count)

    def f(x):
        T = np.stack([clenshaw(eye[j], x) for j in range(count)], axis=-1)
        return (np.sign(evaluate(P, x)) * inv(x))[:, None] * T

    return np.asarray(integrate_on_pieces(f, P, K))


# ---------------------------------------------------------------------------
# monomial basis (I/O only)


def monomial_to_cheb(mono) -> ChebPoly:
    """T-series of sum_k mono[k] x**k."""
    return ChebPoly(npcheb.poly2cheb(np.asarray(mono, dtype=float)), "T")


def cheb_to_monomial(P: ChebPoly) -> np.ndarray:
    """Monomial coefficients (increasing powers) of P."""
    return _trim(npcheb.cheb2poly(P.to_T().coeffs)).copy()
