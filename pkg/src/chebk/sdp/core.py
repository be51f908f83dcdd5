"""Primal-dual interior-point method for small dense semidefinite programs.

The core problem is

    minimize    c'x
    subject to  A x = b
                G_j(x) + s_j = h_j,   s_j PSD   (j = 1..nblocks)

with dual

    maximize    -b'y - sum_j <h_j, z_j>
    subject to  A'y + sum_j G_j'(z_j) + c = 0,   z_j PSD.

It is solved through a homogeneous self-dual embedding (extra scalars tau,
kappa) so that infeasible and unbounded instances terminate with a
certificate instead of diverging. Search directions use Nesterov-Todd
scaling and a Mehrotra predictor-corrector; each Newton system is reduced to
the dense Schur complement ``H = G' (W'W)^{-1} G`` and factored directly.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import toeplitz as tp

log = logging.getLogger(__name__)

STEP = 0.99
EXPON = 3


class DenseBlock:
    """G(x) = sum_k x[idx[k]] mats[k] with dense symmetric coefficient matrices."""

    def __init__(self, idx, mats, h):
        self.idx = np.asarray(idx, dtype=int)
        self.mats = np.asarray(mats, dtype=float).reshape(len(self.idx), *np.shape(h))
        self.h = np.asarray(h, dtype=float)
        self.dim = self.h.shape[0]

    def apply(self, x):
        if not len(self.idx):
            return np.zeros_like(self.h)
        return np.tensordot(x[self.idx], self.mats, axes=(0, 0))

    def adjoint(self, Z, out):
        if len(self.idx):
            np.add.at(out, self.idx, np.einsum("kij,ij->k", self.mats, Z))

    def schur(self, theta, H):
        if not len(self.idx):
            return
        T = theta @ self.mats @ theta
        sub = np.einsum("kij,lij->kl", self.mats, T)
        H[np.ix_(self.idx, self.idx)] += sub


class ToeplitzBlock:
    """G(x) = Toep(B x[idx]), B of shape (dim, len(idx))."""

    def __init__(self, idx, B, h):
        self.idx = np.asarray(idx, dtype=int)
        self.B = np.asarray(B, dtype=float)
        self.h = np.asarray(h, dtype=float)
        self.dim = self.h.shape[0]
        if self.B.shape != (self.dim, len(self.idx)):
            raise ValueError("Toeplitz coefficient matrix has the wrong shape")

    def apply(self, x):
        return tp.toep(self.B @ x[self.idx])

    def adjoint(self, Z, out):
        np.add.at(out, self.idx, self.B.T @ tp.diagonal_sums(Z))

    def schur(self, theta, H):
        sub = self.B.T @ tp.schur_matrix(theta) @ self.B
        H[np.ix_(self.idx, self.idx)] += sub


@dataclass
class CoreProblem:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    blocks: list

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.n = len(self.c)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.A = np.asarray(self.A, dtype=float).reshape(len(self.b), self.n)

    def G(self, x):
        return [blk.apply(x) for blk in self.blocks]

    def Gt(self, Z):
        out = np.zeros(self.n)
        for blk, Zj in zip(self.blocks, Z):
            blk.adjoint(Zj, out)
        return out

    @property
    def degree(self) -> int:
        return sum(blk.dim for blk in self.blocks)


@dataclass
class CoreResult:
    status: str  # optimal | primal_infeasible | dual_infeasible | numerical_failure
    x: np.ndarray
    y: np.ndarray
    s: list
    z: list
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# helpers on lists of blocks


def _inner(U, V):
    return float(sum(np.sum(u * v) for u, v in zip(U, V)))


def _norm(U):
    return float(np.sqrt(sum(np.sum(u * u) for u in U)))


def _sym(X):
    return 0.5 * (X + X.T)


class _Scaling:
    """Nesterov-Todd scaling W z = R' z R = lambda = R^{-1} s R^{-T}."""

    def __init__(self, s, z):
        Ls = np.linalg.cholesky(s)
        Lz = np.linalg.cholesky(z)
        U, lam, Vt = np.linalg.svd(Lz.T @ Ls)
        isq = 1.0 / np.sqrt(lam)
        self.R = (Ls @ Vt.T) * isq
        self.Rit = (Lz @ U) * isq          # R^{-T}
        self.lam = lam
        self.theta = _sym(self.Rit @ self.Rit.T)  # (R R')^{-1}

    def W(self, dz):
        return self.R.T @ dz @ self.R

    def Wit(self, ds):
        return self.Rit.T @ ds @ self.Rit

    def Wt(self, U):
        return self.R @ U @ self.R.T

    def theta_apply(self, Y):
        return self.theta @ Y @ self.theta


def _jordan_solve(lam, R):
    """Solve lambda o U = R for U."""
    return 2.0 * R / (lam[:, None] + lam[None, :])


def _max_step(lam, D):
    """Largest alpha with diag(lam) + alpha D PSD (inf if unbounded)."""
    isq = 1.0 / np.sqrt(lam)
    ev = np.linalg.eigvalsh(_sym(isq[:, None] * D * isq[None, :]))
    return np.inf if ev[0] >= 0 else -1.0 / ev[0]


class _KKT:
    """Factorization of [[0, A', G'], [A, 0, 0], [G, 0, -W'W]]."""

    def __init__(self, prob: CoreProblem, scal):
        self.prob = prob
        self.scal = scal
        n = prob.n
        H = np.zeros((n, n))
        for blk, sc in zip(prob.blocks, scal):
            blk.schur(sc.theta, H)
        H = _sym(H)
        self.H = H
        A = prob.A
        self.reg = False
        try:
            self.cH = sla.cho_factor(H, lower=True, check_finite=False)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            # variables that only enter equality constraints make H singular;
            # past that, a tiny diagonal shift is corrected by refinement
            self.reg = True
            H2 = H + A.T @ A
            scale = max(float(np.max(np.diag(H2))), 1e-300)
            for shift in (0.0, 1e-14, 1e-12, 1e-10, 1e-8):
                try:
                    self.cH = sla.cho_factor(H2 + shift * scale * np.eye(n), lower=True,
                                             check_finite=False)
                    break
                except (np.linalg.LinAlgError, sla.LinAlgError):
                    if shift == 1e-8:
                        raise
        if A.shape[0]:
            HiAt = sla.cho_solve(self.cH, A.T, check_finite=False)
            S = _sym(A @ HiAt)
            self.HiAt = HiAt
            self.cS = sla.cho_factor(S, lower=True, check_finite=False)

    def solve(self, r1, r2, r3):
        prob, scal = self.prob, self.scal
        A = prob.A
        rhs = r1 + prob.Gt([sc.theta_apply(r) for sc, r in zip(scal, r3)])
        if self.reg:
            rhs = rhs + A.T @ r2
        Hr = sla.cho_solve(self.cH, rhs, check_finite=False)
        if A.shape[0]:
            dy = sla.cho_solve(self.cS, A @ Hr - r2, check_finite=False)
            dx = Hr - self.HiAt @ dy
        else:
            dy = np.zeros(0)
            dx = Hr
        Gdx = prob.G(dx)
        dz = [_sym(sc.theta_apply(g - r)) for sc, g, r in zip(scal, Gdx, r3)]
        return dx, dy, dz

    def residual(self, dx, dy, dz, r1, r2, r3):
        prob, scal = self.prob, self.scal
        e1 = r1 - (prob.A.T @ dy + prob.Gt(dz))
        e2 = r2 - prob.A @ dx
        Gdx = prob.G(dx)
        e3 = [r - (g - sc.Wt(sc.W(z))) for r, g, sc, z in zip(r3, Gdx, scal, dz)]
        return e1, e2, e3

    def refined_solve(self, r1, r2, r3, steps=3):
        dx, dy, dz = self.solve(r1, r2, r3)
        for _ in range(steps):
            e1, e2, e3 = self.residual(dx, dy, dz, r1, r2, r3)
            cx, cy, cz = self.solve(e1, e2, e3)
            dx, dy = dx + cx, dy + cy
            dz = [a + b for a, b in zip(dz, cz)]
        return dx, dy, dz


def _independent_rows(A, b, rtol=1e-12):
    """Indices of a maximal independent row subset of A, and whether the
    dropped rows of A x = b are consistent with the kept ones."""
    if A.shape[0] == 0:
        return np.arange(0), True
    _, R, piv = sla.qr(A.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > rtol * max(1.0, d[0] if d.size else 0.0)))
    keep = np.sort(piv[:rank])
    if rank == A.shape[0]:
        return keep, True
    Ak, bk = A[keep], b[keep]
    # least-squares multipliers expressing every row through the kept ones
    coef = np.linalg.lstsq(Ak.T, A.T, rcond=None)[0]
    consistent = np.allclose(coef.T @ bk, b, atol=1e-9 * max(1.0, np.abs(b).max()))
    return keep, consistent


def _with_h(blk, h):
    out = copy.copy(blk)
    out.h = h
    return out


def _scale_factors(prob):
    """Infinity norms of (b, h) and of c; 1 for all-zero data."""
    hmax = max((float(np.max(np.abs(blk.h))) for blk in prob.blocks if blk.h.size), default=0.0)
    bmax = float(np.max(np.abs(prob.b))) if prob.b.size else 0.0
    cmax = float(np.max(np.abs(prob.c))) if prob.c.size else 0.0
    sp = max(bmax, hmax)
    return (sp if sp > 0 else 1.0), (cmax if cmax > 0 else 1.0)


def solve_core(prob: CoreProblem, tol: float = 1e-8, max_iter: int = 200,
               abstol: float | None = None, reltol: float | None = None,
               feastol: float | None = None) -> CoreResult:
    """Run the homogeneous self-dual interior-point method.

    The data are equilibrated first: (b, h) and c are divided by their
    infinity norms, so rescaling the objective or the right-hand side leaves
    the iterates unchanged. Tolerances refer to the equilibrated problem.
    """
    sp, sd = _scale_factors(prob)
    scaled = CoreProblem(prob.c / sd, prob.A, prob.b / sp,
                         [_with_h(blk, blk.h / sp) for blk in prob.blocks])
    res = _solve_reduced(scaled, tol, max_iter, abstol, reltol, feastol)
    if res.status == "primal_infeasible":
        # certificate (y, z) normalized to h'z + b'y = -1 on the scaled data
        res.y = res.y / sp
        res.z = [q / sp for q in res.z]
    elif res.status == "dual_infeasible":
        res.x = res.x / sd
        res.s = [q / sd for q in res.s]
    else:
        res.x = res.x * sp
        res.s = [q * sp for q in res.s]
        res.y = res.y * sd
        res.z = [q * sd for q in res.z]
        res.primal_objective *= sp * sd
        res.dual_objective *= sp * sd
        res.gap *= sp * sd
    res.info["scale"] = (sp, sd)
    return res


def _solve_reduced(prob, tol, max_iter, abstol, reltol, feastol):
    """Drop redundant equality rows (the reduced Newton system needs A to
    have full row rank); their multipliers are reported as zero."""
    keep, consistent = _independent_rows(prob.A, prob.b)
    if not consistent:
        n = prob.n
        return CoreResult("primal_infeasible", np.zeros(n), np.zeros(len(prob.b)),
                          [np.zeros_like(b.h) for b in prob.blocks],
                          [np.zeros_like(b.h) for b in prob.blocks],
                          np.nan, np.nan, np.inf, np.nan, np.nan, 0,
                          info={"reason": "inconsistent equality constraints"})
    if len(keep) < prob.A.shape[0]:
        reduced = CoreProblem(prob.c, prob.A[keep], prob.b[keep], prob.blocks)
        res = _solve_hsd(reduced, tol, max_iter, abstol, reltol, feastol)
        y = np.zeros(prob.A.shape[0])
        y[keep] = res.y
        res.y = y
        return res
    return _solve_hsd(prob, tol, max_iter, abstol, reltol, feastol)


def _solve_hsd(prob, tol, max_iter, abstol, reltol, feastol):
    feastol = tol if feastol is None else feastol
    reltol = tol if reltol is None else reltol
    abstol = tol if abstol is None else abstol

    n, p = prob.n, prob.A.shape[0]
    A, b, c = prob.A, prob.b, prob.c
    h = [blk.h for blk in prob.blocks]
    dims = [blk.dim for blk in prob.blocks]
    nu = sum(dims)

    resx0 = max(1.0, float(np.linalg.norm(c)))
    resy0 = max(1.0, float(np.linalg.norm(b)))
    resz0 = max(1.0, _norm(h))

    x = np.zeros(n)
    y = np.zeros(p)
    s = [np.eye(d) for d in dims]
    z = [np.eye(d) for d in dims]
    tau, kappa = 1.0, 1.0

    best = None
    status = "numerical_failure"
    it = 0
    for it in range(max_iter + 1):
        Gx = prob.G(x)
        Gtz = prob.Gt(z)
        hz = _inner(h, z)
        cx, by = float(c @ x), float(b @ y)
        rx = A.T @ y + Gtz + c * tau
        ry = A @ x - b * tau
        rz = [g + si - hi * tau for g, si, hi in zip(Gx, s, h)]
        rt = kappa + cx + by + hz
        sz = _inner(s, z)
        mu = (sz + tau * kappa) / (nu + 1)

        pcost = cx / tau
        dcost = -(by + hz) / tau
        pres = max(np.linalg.norm(ry) / resy0, _norm(rz) / resz0) / tau
        dres = np.linalg.norm(rx) / resx0 / tau
        gap = sz / tau ** 2
        if pcost < 0:
            relgap = gap / -pcost
        elif dcost > 0:
            relgap = gap / dcost
        else:
            relgap = np.inf

        pinfres = None
        if hz + by < 0:
            pinfres = np.linalg.norm(A.T @ y + Gtz) / resx0 / -(hz + by)
        dinfres = None
        if cx < 0:
            dinfres = max(np.linalg.norm(A @ x) / resy0,
                          _norm([g + si for g, si in zip(Gx, s)]) / resz0) / -cx

        log.debug("it %3d pcost % .9e dcost % .9e gap %.2e pres %.2e dres %.2e k/t %.2e",
                  it, pcost, dcost, gap, pres, dres, kappa / tau)

        score = max(pres, dres, min(gap, relgap))
        if best is None or score < best[0]:
            best = (score, x.copy(), y.copy(), [q.copy() for q in s],
                    [q.copy() for q in z], tau, it, pcost, dcost, pres, dres, gap)

        if pres <= feastol and dres <= feastol and (gap <= abstol or relgap <= reltol):
            status = "optimal"
            break
        if pinfres is not None and pinfres <= feastol:
            status = "primal_infeasible"
            break
        if dinfres is not None and dinfres <= feastol:
            status = "dual_infeasible"
            break
        if it == max_iter:
            break

        try:
            scal = [_Scaling(si, zi) for si, zi in zip(s, z)]
            kkt = _KKT(prob, scal)
        except (np.linalg.LinAlgError, sla.LinAlgError, ValueError) as exc:
            log.debug("factorization failed at iteration %d: %s", it, exc)
            break
        lam = [sc.lam for sc in scal]

        # direction for the tau column
        x1, y1, z1 = kkt.refined_solve(-c, b.copy(), [hi.copy() for hi in h])

        def direction(eta, rc, rk):
            u = [_jordan_solve(l, r) for l, r in zip(lam, rc)]
            Wtu = [sc.Wt(ui) for sc, ui in zip(scal, u)]
            r3 = [-eta * r - w for r, w in zip(rz, Wtu)]
            x2, y2, z2 = kkt.refined_solve(-eta * rx, -eta * ry, r3)
            num = -eta * rt - rk / tau - (c @ x2 + b @ y2 + _inner(h, z2))
            den = c @ x1 + b @ y1 + _inner(h, z1) - kappa / tau
            dtau = num / den
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            dz = [a + dtau * q for a, q in zip(z2, z1)]
            dkappa = (rk - kappa * dtau) / tau
            # ds from the linearized primal residual keeps G x + s - h tau exact
            Gdx = prob.G(dx)
            ds = [_sym(-eta * r - g + hi * dtau) for r, g, hi in zip(rz, Gdx, h)]
            dzs = [_sym(sc.W(q)) for sc, q in zip(scal, dz)]
            dss = [_sym(sc.Wit(q)) for sc, q in zip(scal, ds)]
            return dx, dy, ds, dz, dtau, dkappa, dss, dzs

        def step_length(dss, dzs, dtau, dkappa):
            amax = np.inf
            for l, a1, a2 in zip(lam, dss, dzs):
                amax = min(amax, _max_step(l, a1), _max_step(l, a2))
            if dtau < 0:
                amax = min(amax, -tau / dtau)
            if dkappa < 0:
                amax = min(amax, -kappa / dkappa)
            return amax

        lamlam = [-np.diag(l * l) for l in lam]
        try:
            aff = direction(1.0, lamlam, -tau * kappa)
            a_aff = min(1.0, step_length(*aff[6:8], aff[4], aff[5]))
            sigma = (1.0 - a_aff) ** EXPON
            rc = [-np.diag(l * l) - _jordan_prod(ds_, dz_) + sigma * mu * np.eye(len(l))
                  for l, ds_, dz_ in zip(lam, aff[6], aff[7])]
            rk = -tau * kappa - aff[4] * aff[5] + sigma * mu
            dx, dy, ds, dz, dtau, dkappa, dss, dzs = direction(1.0 - sigma, rc, rk)
            amax = step_length(dss, dzs, dtau, dkappa)
        except (np.linalg.LinAlgError, sla.LinAlgError, FloatingPointError) as exc:
            log.debug("direction failed at iteration %d: %s", it, exc)
            break
        alpha = min(1.0, STEP * amax)
        if not np.isfinite(alpha) or alpha < 1e-12:
            log.debug("step length collapsed at iteration %d", it)
            break

        x = x + alpha * dx
        y = y + alpha * dy
        s = [_sym(si + alpha * d) for si, d in zip(s, ds)]
        z = [_sym(zi + alpha * d) for zi, d in zip(z, dz)]
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa

    if status != "optimal" and status not in ("primal_infeasible", "dual_infeasible"):
        _, x, y, s, z, tau, _, pcost, dcost, pres, dres, gap = best
        status = "numerical_failure"
        return CoreResult(status, x / tau, y / tau, [q / tau for q in s], [q / tau for q in z],
                          pcost, dcost, pres, dres, gap, it)

    if status == "optimal":
        return CoreResult(status, x / tau, y / tau, [q / tau for q in s], [q / tau for q in z],
                          pcost, dcost, pres, dres, gap, it)

    # certificates are normalized so the violated objective equals -1 / +1
    if status == "primal_infeasible":
        scale = -(hz + by)
        return CoreResult(status, x, y / scale, s, [q / scale for q in z],
                          np.nan, np.nan, pres, dres, gap, it,
                          info={"certificate_residual": pinfres})
    scale = -cx
    return CoreResult(status, x / scale, y, [q / scale for q in s], z,
                      np.nan, np.nan, pres, dres, gap, it,
                      info={"certificate_residual": dinfres})


def _jordan_prod(U, V):
    return 0.5 * (U @ V + V @ U)
