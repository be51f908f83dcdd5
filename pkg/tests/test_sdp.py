import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebk.errors import DimensionMismatch
from chebk.sdp import (ConicProblem, CoreProblem, LMIProblem, Status, deembed, embed,
                       solve, solve_core, toeplitz_constraint, toeplitz_feasible)
from chebk.sdp.core import DenseBlock
from chebk.sdp.toeplitz import diagonal_sums, schur_matrix, schur_matrix_direct, toep


def random_psd(rng, n, complex_=False):
    A = rng.normal(size=(n, n))
    if complex_:
        A = A + 1j * rng.normal(size=(n, n))
    return A @ A.conj().T + 0.1 * np.eye(n)


def random_sdp(rng, n=5, m=4, free=2):
    """Strictly feasible and dual strictly feasible ConicProblem."""
    X0 = random_psd(rng, n)
    x0 = rng.normal(size=free)
    prob = ConicProblem()
    prob.add_free(free)
    j = prob.add_block(n)
    As, fs = [], []
    for _ in range(m):
        A = rng.normal(size=(n, n))
        A = A + A.T
        f = rng.normal(size=free)
        As.append(A)
        fs.append(f)
        prob.add_constraint(dict(enumerate(f)), {j: A}, float(f @ x0 + np.sum(A * X0)))
    # dual feasibility with free variables needs c_free in the row space of f
    yd = rng.normal(size=m)
    C = random_psd(rng, n) + sum(y * A for y, A in zip(yd, As))
    cf = sum(y * f for y, f in zip(yd, fs))
    prob.set_objective(dict(enumerate(cf)), {j: C})
    return prob


def test_min_x_one_by_one():
    prob = ConicProblem()
    j = prob.add_block(1)
    prob.set_objective(blocks={j: np.eye(1)})
    sol = solve(prob)
    assert sol.status == Status.OPTIMAL
    assert abs(sol.block_values[0][0, 0]) < 1e-7


def test_toeplitz_min_y0():
    prob = LMIProblem(1)
    prob.set_objective([1.0])
    prob.add_toeplitz(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
    sol = solve(prob)
    assert sol.status == Status.OPTIMAL
    assert sol.free_values[0] == pytest.approx(1.0, abs=1e-7)
    # same problem through explicit ties
    cp = ConicProblem()
    y = cp.add_free(2)
    cp.add_constraint({int(y[1]): 1.0}, None, 1.0)
    toeplitz_constraint(cp, y)
    cp.set_objective({int(y[0]): 1.0})
    sol2 = solve(cp)
    assert sol2.free_values[0] == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("theta0", [0.0, 0.4, 1.3, np.pi / 2, 2.9, np.pi])
def test_point_mass_moments_feasible(theta0):
    y = np.cos(np.arange(6) * theta0)
    assert toeplitz_feasible(y, "ties") == Status.OPTIMAL


def test_toeplitz_constraint_examples():
    assert toeplitz_feasible([0.7]) == Status.OPTIMAL
    assert toeplitz_feasible([-0.7]) == Status.INFEASIBLE
    assert toeplitz_feasible([1, 0, 0]) == Status.OPTIMAL
    assert toeplitz_feasible([1, 1, 1]) == Status.OPTIMAL
    assert np.array_equal(toep([1, 1, 1]), np.ones((3, 3)))
    prob = ConicProblem()
    y = prob.add_free(3)
    j = toeplitz_constraint(prob, y)
    assert prob.blocks[j].dim == 3 and not prob.blocks[j].complex


def test_infeasible_and_unbounded():
    prob = LMIProblem(1)
    prob.add_equalities([[1.0]], [-1.0])
    prob.add_dense(np.zeros((1, 1)), np.ones((1, 1, 1)))
    assert solve(prob).status == Status.INFEASIBLE
    prob = LMIProblem(1)
    prob.set_objective([-1.0])
    prob.add_dense(np.zeros((1, 1)), np.ones((1, 1, 1)))
    assert solve(prob).status == Status.UNBOUNDED
    cp = ConicProblem()
    x = cp.add_free(1)
    cp.set_objective({int(x[0]): 1.0})
    j = cp.add_block(1)
    cp.add_constraint({0: 1.0}, {j: -np.eye(1)}, 0.0)
    assert solve(cp).status == Status.OPTIMAL
    cp.set_objective({int(x[0]): -1.0})
    assert solve(cp).status == Status.UNBOUNDED


def test_dimension_checks():
    prob = ConicProblem()
    j = prob.add_block(2)
    with pytest.raises(DimensionMismatch):
        prob.add_constraint(None, {j: np.eye(3)}, 1.0)
    with pytest.raises(DimensionMismatch):
        prob.add_constraint({4: 1.0}, None, 1.0)
    with pytest.raises(ValueError):
        solve(prob, tol=0.0)


def test_embedding_round_trip(rng):
    X = random_psd(rng, 4, complex_=True)
    E = embed(X)
    assert np.allclose(E, E.T)
    assert np.allclose(deembed(E), X)
    assert np.allclose(np.sort(np.linalg.eigvalsh(E)), np.sort(np.repeat(np.linalg.eigvalsh(X), 2)))


def test_complex_block_matches_hand_embedding(rng):
    C = random_psd(rng, 4, complex_=True) - 2 * np.eye(4)
    prob = ConicProblem()
    j = prob.add_block(4, complex=True)
    prob.add_constraint(None, {j: np.eye(4)}, 1.0)
    prob.set_objective(blocks={j: C})
    hand = ConicProblem()
    k = hand.add_block(8)
    hand.add_constraint(None, {k: 0.5 * np.eye(8)}, 1.0)
    hand.set_objective(blocks={k: 0.5 * embed(C)})
    a, b = solve(prob, tol=1e-10), solve(hand, tol=1e-10)
    assert a.objective_value == pytest.approx(b.objective_value, abs=1e-9)
    assert a.objective_value == pytest.approx(np.linalg.eigvalsh(C)[0], abs=1e-8)
    X = a.block_values[0]
    assert np.allclose(X, X.conj().T)


@settings(max_examples=15)
@given(st.integers(0, 2**31), st.integers(2, 6), st.integers(1, 5))
def test_random_sdp_duality_and_residuals(seed, n, m):
    rng = np.random.default_rng(seed)
    prob = random_sdp(rng, n, m)
    core = prob.to_core()
    res = solve_core(core, tol=1e-8)
    assert res.status == "optimal"
    scale = 1 + abs(res.primal_objective)
    assert res.primal_objective >= res.dual_objective - 1e-8 * scale
    sol = solve(prob, tol=1e-8)
    assert sol.status == Status.OPTIMAL
    assert sol.primal_residual <= 1e-8 and sol.dual_residual <= 1e-8
    assert sol.min_eigenvalue >= -1e-8
    assert sol.objective_value == pytest.approx(prob.objective(sol.free_values, sol.block_values), abs=1e-10)


def test_scaling_invariance_of_argmin():
    from chebk.first_kind import _build
    from chebk.chebyshev import RationalWeight
    from chebk.intervals import validate
    prob = _build(validate([(-1, -0.3), (0.3, 1)]), RationalWeight.unit(), 4)
    base = solve(prob).free_values
    for lam in (0.01, 3.0, 250.0):
        prob.set_objective({0: lam})
        assert np.max(np.abs(solve(prob).free_values - base)) <= 1e-8


def test_against_reference_backend(rng):
    pytest.importorskip("cvxpy")
    for _ in range(3):
        prob = random_sdp(rng, 5, 4)
        a = solve(prob, tol=1e-9)
        b = solve(prob, backend="cvxpy")
        assert a.objective_value == pytest.approx(b.objective_value, rel=1e-6, abs=1e-7)


@given(st.integers(1, 12), st.integers(0, 2**31))
def test_schur_kernel_matches_direct(n, seed):
    A = np.random.default_rng(seed).normal(size=(n, n))
    theta = A @ A.T
    assert np.allclose(schur_matrix(theta), schur_matrix_direct(theta), atol=1e-10 * (1 + np.abs(theta).max() ** 2))


@given(st.integers(1, 10), st.integers(0, 2**31))
def test_diagonal_sums_adjoint(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n)
    Z = rng.normal(size=(n, n))
    Z = Z + Z.T
    assert np.sum(toep(v) * Z) == pytest.approx(v @ diagonal_sums(Z), abs=1e-10 * n * n)


def test_core_dense_block_direct():
    # min x s.t. [[x, 1], [1, x]] PSD  ->  x = 1
    B = DenseBlock([0], -np.array([np.eye(2)]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    res = solve_core(CoreProblem([1.0], np.zeros((0, 1)), np.zeros(0), [B]))
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(1.0, abs=1e-7)
