"""User-facing semidefinite program containers and the solver entry point.

Two problem shapes are supported:

* :class:`ConicProblem`, the standard primal form: free scalar variables,
  real-symmetric or complex-Hermitian PSD matrix variables, and real linear
  equality constraints.
* :class:`LMIProblem`, the inequality form: a vector x with linear matrix
  inequalities ``F0 + sum_i x_i F_i >= 0`` (dense or symmetric Toeplitz)
  and optional equalities.

Both are mapped onto :func:`chebk.sdp.core.solve_core`. ConicProblem is
handed over through its dual, so its PSD variables become the dual slacks of
the core problem and its free variables become equality multipliers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from . import core
from . import toeplitz as tp


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class ConicSolution:
    status: Status
    objective_value: float
    free_values: np.ndarray
    block_values: list
    primal_residual: float
    dual_residual: float
    gap: float
    min_eigenvalue: float
    iterations: int = 0
    multipliers: np.ndarray | None = None
    backend: str = "native"

    @property
    def residuals(self):
        return (self.primal_residual, self.dual_residual, self.gap, self.min_eigenvalue)

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL


def embed(X):
    """Real symmetric image [[Re, -Im], [Im, Re]] of a Hermitian matrix."""
    X = np.asarray(X)
    Xr, Xi = X.real, X.imag
    return np.block([[Xr, -Xi], [Xi, Xr]])


def deembed(Z):
    n = Z.shape[0] // 2
    re = 0.5 * (Z[:n, :n] + Z[n:, n:])
    im = 0.5 * (Z[n:, :n] - Z[:n, n:])
    return re + 1j * im


def _hermitian_part(A):
    A = np.asarray(A)
    return 0.5 * (A + A.conj().T)


@dataclass
class _Block:
    dim: int
    complex: bool

    @property
    def real_dim(self) -> int:
        return 2 * self.dim if self.complex else self.dim


class ConicProblem:
    """minimize  c'x + sum_j Re tr(C_j X_j)
    subject to    a_i'x + sum_j Re tr(A_ij X_j) = b_i,   X_j PSD.

    Matrices passed for complex blocks may be any complex square matrix; only
    their Hermitian part matters since X_j is Hermitian.
    """

    def __init__(self):
        self.n_free = 0
        self.blocks: list[_Block] = []
        self.rows: list[tuple[dict, dict, float]] = []
        self.obj_free: dict = {}
        self.obj_blocks: dict = {}

    # -- building -------------------------------------------------------
    def add_free(self, count: int = 1) -> np.ndarray:
        idx = np.arange(self.n_free, self.n_free + count)
        self.n_free += count
        return idx

    def add_block(self, dim: int, complex: bool = False) -> int:
        if dim < 1:
            raise DimensionMismatch("block dimension must be positive")
        self.blocks.append(_Block(int(dim), bool(complex)))
        return len(self.blocks) - 1

    def _check_terms(self, free, blocks):
        free = {int(k): float(v) for k, v in (free or {}).items()}
        for k in free:
            if not 0 <= k < self.n_free:
                raise DimensionMismatch(f"free variable {k} does not exist")
        out = {}
        for j, A in (blocks or {}).items():
            j = int(j)
            if not 0 <= j < len(self.blocks):
                raise DimensionMismatch(f"block {j} does not exist")
            blk = self.blocks[j]
            A = np.asarray(A, dtype=complex if blk.complex else float)
            if A.shape != (blk.dim, blk.dim):
                raise DimensionMismatch(
                    f"block {j} expects {blk.dim}x{blk.dim}, got {A.shape}")
            A = _hermitian_part(A)
            out[j] = A if blk.complex else A.real
        return free, out

    def add_constraint(self, free=None, blocks=None, rhs: float = 0.0):
        """Add sum free[k] x_k + sum Re tr(blocks[j] X_j) = rhs."""
        free, blocks = self._check_terms(free, blocks)
        self.rows.append((free, blocks, float(rhs)))
        return len(self.rows) - 1

    def add_complex_constraint(self, free=None, blocks=None, rhs: complex = 0.0,
                               drop_imaginary: bool = False):
        """Add the complex equality sum free_k x_k + sum tr(A_j X_j) = rhs.

        ``free`` holds complex coefficients of real variables. Yields two real
        rows, or one when the imaginary row is known to vanish identically.
        """
        free = free or {}
        blocks = blocks or {}
        rows = [self.add_constraint({k: np.real(v) for k, v in free.items()},
                                    {j: A for j, A in blocks.items()}, np.real(rhs))]
        if not drop_imaginary:
            # Im tr(A X) = Re tr(-i A X)
            rows.append(self.add_constraint(
                {k: np.imag(v) for k, v in free.items()},
                {j: -1j * np.asarray(A) for j, A in blocks.items()}, np.imag(rhs)))
        return rows

    def set_objective(self, free=None, blocks=None):
        self.obj_free, self.obj_blocks = self._check_terms(free, blocks)

    # -- evaluation -----------------------------------------------------
    def evaluate(self, free_values, block_values, free, blocks):
        val = sum(v * free_values[k] for k, v in free.items())
        for j, A in blocks.items():
            val += float(np.real(np.sum(A.conj() * block_values[j])))
        return float(val)

    def objective(self, free_values, block_values) -> float:
        return self.evaluate(free_values, block_values, self.obj_free, self.obj_blocks)

    def equality_residual(self, free_values, block_values) -> float:
        if not self.rows:
            return 0.0
        r = [self.evaluate(free_values, block_values, f, B) - b for f, B, b in self.rows]
        scale = 1.0 + max(abs(b) for _, _, b in self.rows)
        return float(np.max(np.abs(r)) / scale)

    # -- core mapping ---------------------------------------------------
    def _embedded(self, j, A):
        blk = self.blocks[j]
        return 0.5 * embed(A) if blk.complex else A

    def to_core(self) -> core.CoreProblem:
        m = len(self.rows)
        b_user = np.array([b for _, _, b in self.rows])
        A_core = np.zeros((self.n_free, m))
        per_block = [([], []) for _ in self.blocks]
        for i, (free, blocks, _) in enumerate(self.rows):
            for k, v in free.items():
                A_core[k, i] = -v
            for j, A in blocks.items():
                per_block[j][0].append(i)
                per_block[j][1].append(-self._embedded(j, A))
        c_free = np.zeros(self.n_free)
        for k, v in self.obj_free.items():
            c_free[k] = v
        core_blocks = []
        for j, blk in enumerate(self.blocks):
            n = blk.real_dim
            h = np.zeros((n, n))
            if j in self.obj_blocks:
                h = self._embedded(j, self.obj_blocks[j])
            idx, mats = per_block[j]
            mats = np.array(mats) if mats else np.zeros((0, n, n))
            core_blocks.append(core.DenseBlock(idx, mats, h))
        return core.CoreProblem(b_user, A_core, c_free, core_blocks)

    def solve(self, tol: float = 1e-8, max_iter: int = 200, backend=None) -> ConicSolution:
        return solve(self, tol=tol, max_iter=max_iter, backend=backend)


class LMIProblem:
    """minimize c'x  subject to  A x = b  and  S_j(x) PSD for each block.

    Dense blocks are ``F0 + sum_i x_i F_i``; Toeplitz blocks are
    ``Toep(B x + e)`` and are kept structured so the solver can use the FFT
    Schur kernel.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self.c = np.zeros(self.n)
        self.A = np.zeros((0, self.n))
        self.b = np.zeros(0)
        self.blocks: list = []

    def set_objective(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.n,):
            raise DimensionMismatch("objective has the wrong length")
        self.c = c

    def add_equalities(self, A, b):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if A.shape[1] != self.n or A.shape[0] != len(b):
            raise DimensionMismatch("equality data has the wrong shape")
        self.A = np.vstack([self.A, A])
        self.b = np.concatenate([self.b, b])

    def add_dense(self, F0, F):
        F0 = np.asarray(F0, dtype=float)
        F = np.asarray(F, dtype=float)
        if F.shape != (self.n, *F0.shape):
            raise DimensionMismatch("LMI coefficient array has the wrong shape")
        self.blocks.append(("dense", F0, F))
        return len(self.blocks) - 1

    def add_toeplitz(self, B, e=None):
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[1] != self.n:
            raise DimensionMismatch("Toeplitz map has the wrong shape")
        e = np.zeros(B.shape[0]) if e is None else np.asarray(e, dtype=float)
        if e.shape != (B.shape[0],):
            raise DimensionMismatch("Toeplitz offset has the wrong length")
        self.blocks.append(("toeplitz", e, B))
        return len(self.blocks) - 1

    def block_value(self, j, x):
        kind, a, B = self.blocks[j]
        if kind == "dense":
            return a + np.tensordot(x, B, axes=(0, 0))
        return tp.toep(B @ x + a)

    def to_core(self) -> core.CoreProblem:
        blocks = []
        for kind, a, B in self.blocks:
            if kind == "dense":
                nz = [i for i in range(self.n) if np.any(B[i])]
                blocks.append(core.DenseBlock(nz, -B[nz], a))
            else:
                nz = np.flatnonzero(np.any(B != 0, axis=0))
                blocks.append(core.ToeplitzBlock(nz, -B[:, nz], tp.toep(a)))
        return core.CoreProblem(self.c, self.A, self.b, blocks)

    def solve(self, tol: float = 1e-8, max_iter: int = 200, backend=None) -> ConicSolution:
        return solve(self, tol=tol, max_iter=max_iter, backend=backend)


def toeplitz_constraint(problem: ConicProblem, y_idx) -> int:
    """Register a PSD block X with X_ij tied to the free variable y_|i-j|."""
    y_idx = list(y_idx)
    n = len(y_idx)
    j = problem.add_block(n)
    for r in range(n):
        for s in range(r, n):
            E = np.zeros((n, n))
            if r == s:
                E[r, r] = 1.0
            else:
                E[r, s] = E[s, r] = 0.5
            problem.add_constraint({y_idx[s - r]: -1.0}, {j: E}, 0.0)
    return j


def toeplitz_feasible(y, route: str = "ties", tol: float = 1e-8, max_iter: int = 200,
                      backend=None) -> Status:
    """Status of the feasibility problem Toep(y) PSD for a fixed vector y.

    ``route="ties"`` builds the block through :func:`toeplitz_constraint`;
    ``route="lmi"`` uses a structured Toeplitz LMI. OPTIMAL means feasible.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if route == "ties":
        prob = ConicProblem()
        idx = prob.add_free(n)
        for k, v in enumerate(y):
            prob.add_constraint({int(idx[k]): 1.0}, None, v)
        toeplitz_constraint(prob, idx)
        prob.set_objective()
    elif route == "lmi":
        prob = LMIProblem(n)
        prob.add_equalities(np.eye(n), y)
        prob.add_toeplitz(np.eye(n))
    else:
        raise ValueError(f"unknown route {route!r}")
    return solve(prob, tol=tol, max_iter=max_iter, backend=backend).status


# ---------------------------------------------------------------------------
# backends


class NativeBackend:
    name = "native"

    def solve(self, problem, tol, max_iter):
        cp = problem.to_core()
        res = core.solve_core(cp, tol=tol, max_iter=max_iter)
        if isinstance(problem, ConicProblem):
            return self._conic(problem, res)
        return self._lmi(problem, res)

    @staticmethod
    def _status(res, flipped):
        if res.status == "optimal":
            return Status.OPTIMAL
        if res.status == "numerical_failure":
            return Status.NUMERICAL_FAILURE
        infeasible = (res.status == "primal_infeasible") != flipped
        return Status.INFEASIBLE if infeasible else Status.UNBOUNDED

    def _conic(self, problem, res):
        # the user's primal is the core dual, so the certificates swap roles
        status = self._status(res, flipped=True)
        X = []
        for blk, Z in zip(problem.blocks, res.z):
            X.append(deembed(Z) if blk.complex else Z)
        xf = res.y
        mins = [np.linalg.eigvalsh(Xj)[0] for Xj in X] or [0.0]
        obj = problem.objective(xf, X) if status == Status.OPTIMAL else np.nan
        return ConicSolution(
            status=status, objective_value=obj, free_values=xf, block_values=X,
            primal_residual=problem.equality_residual(xf, X),
            dual_residual=res.primal_residual, gap=res.gap,
            min_eigenvalue=float(min(mins)), iterations=res.iterations,
            multipliers=-res.x)

    def _lmi(self, problem, res):
        status = self._status(res, flipped=False)
        x = res.x
        S = [problem.block_value(j, x) for j in range(len(problem.blocks))]
        mins = [np.linalg.eigvalsh(Sj)[0] for Sj in S] or [0.0]
        obj = float(problem.c @ x) if status == Status.OPTIMAL else np.nan
        eq = 0.0
        if len(problem.b):
            eq = float(np.max(np.abs(problem.A @ x - problem.b)) / (1 + np.max(np.abs(problem.b))))
        return ConicSolution(
            status=status, objective_value=obj, free_values=x, block_values=res.z,
            primal_residual=max(eq, res.primal_residual), dual_residual=res.dual_residual,
            gap=res.gap, min_eigenvalue=float(min(mins)), iterations=res.iterations,
            multipliers=res.y)


class CvxpyBackend:
    """Reference backend through cvxpy, used to cross-check the native solver."""

    name = "cvxpy"

    def __init__(self, solver: str = "CLARABEL"):
        self.solver = solver

    def solve(self, problem, tol, max_iter):
        import cvxpy as cp

        if isinstance(problem, ConicProblem):
            xf = cp.Variable(problem.n_free) if problem.n_free else None
            X = [cp.Variable((b.dim, b.dim), hermitian=True) if b.complex
                 else cp.Variable((b.dim, b.dim), symmetric=True) for b in problem.blocks]

            def expr(free, blocks):
                terms = [v * xf[k] for k, v in free.items()]
                for j, A in blocks.items():
                    t = cp.trace(A @ X[j])
                    terms.append(cp.real(t) if problem.blocks[j].complex else t)
                return cp.sum(cp.hstack(terms)) if terms else cp.Constant(0.0)

            cons = [Xj >> 0 for Xj in X]
            cons += [expr(f, B) == b for f, B, b in problem.rows]
            prob = cp.Problem(cp.Minimize(expr(problem.obj_free, problem.obj_blocks)), cons)
        else:
            x = cp.Variable(problem.n)
            cons = []
            for j, (kind, a, B) in enumerate(problem.blocks):
                if kind == "dense":
                    S = a + sum(x[i] * B[i] for i in range(problem.n) if np.any(B[i]))
                else:
                    v = B @ x + a
                    n = len(a)
                    S = sum(v[k] * tp.toep(np.eye(n)[k]) for k in range(n))
                cons.append(0.5 * (S + S.T) >> 0)
            if len(problem.b):
                cons.append(problem.A @ x == problem.b)
            prob = cp.Problem(cp.Minimize(problem.c @ x), cons)
        prob.solve(solver=self.solver)
        status = {
            cp.OPTIMAL: Status.OPTIMAL, cp.OPTIMAL_INACCURATE: Status.OPTIMAL,
            cp.INFEASIBLE: Status.INFEASIBLE, cp.INFEASIBLE_INACCURATE: Status.INFEASIBLE,
            cp.UNBOUNDED: Status.UNBOUNDED, cp.UNBOUNDED_INACCURATE: Status.UNBOUNDED,
        }.get(prob.status, Status.NUMERICAL_FAILURE)
        if isinstance(problem, ConicProblem):
            fv = np.asarray(xf.value) if xf is not None and xf.value is not None else np.zeros(problem.n_free)
            bv = [np.asarray(Xj.value) if Xj.value is not None else None for Xj in X]
            ok = status == Status.OPTIMAL
            return ConicSolution(
                status=status, objective_value=float(prob.value) if ok else np.nan,
                free_values=fv, block_values=bv,
                primal_residual=problem.equality_residual(fv, bv) if ok else np.nan,
                dual_residual=np.nan, gap=np.nan,
                min_eigenvalue=min(np.linalg.eigvalsh(b)[0] for b in bv) if ok and bv else np.nan,
                backend=self.name)
        xv = np.asarray(x.value) if x.value is not None else np.zeros(problem.n)
        return ConicSolution(
            status=status,
            objective_value=float(prob.value) if status == Status.OPTIMAL else np.nan,
            free_values=xv, block_values=[], primal_residual=np.nan, dual_residual=np.nan,
            gap=np.nan, min_eigenvalue=np.nan, backend=self.name)


_BACKENDS = {"native": NativeBackend, "cvxpy": CvxpyBackend}


def get_backend(backend=None):
    if backend is None:
        return NativeBackend()
    if isinstance(backend, str):
        try:
            return _BACKENDS[backend]()
        except KeyError:
            raise ValueError(f"unknown backend {backend!r}") from None
    return backend


def solve(problem, tol: float = 1e-8, max_iter: int = 200, backend=None) -> ConicSolution:
    """Solve a ConicProblem or LMIProblem."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return get_backend(backend).solve(problem, tol, max_iter)
