import numpy as np
import pytest

from phmor.linalg import (
    LinAlgContractError,
    SingularMatrixError,
    gen_eig,
    nullspace_basis,
    orthonormalize,
    rank_tolerance,
    solve_complex,
    sym_eig,
)


def test_sym_eig_orders_ascending():
    A = np.diag([3.0, -1.0, 2.0])
    res = sym_eig(A)
    assert np.allclose(res.eigenvalues, [-1.0, 2.0, 3.0])
    # eigenvectors reconstruct the matrix
    Q, w = res.eigenvectors, res.eigenvalues
    assert np.allclose(Q @ np.diag(w) @ Q.T, A)


def test_sym_eig_rejects_nonsymmetric():
    with pytest.raises(LinAlgContractError):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_solve_complex_matches_numpy():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    b = rng.standard_normal(6)
    x = solve_complex(M, b)
    assert np.allclose(M @ x, b)


def test_solve_complex_raises_on_singular():
    M = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_complex(M, np.ones(2))


def test_solve_complex_cond_limit_override():
    # nearly singular but solvable with a relaxed limit
    M = np.diag([1.0, 1e-13])
    with pytest.raises(SingularMatrixError):
        solve_complex(M, np.ones(2))
    x = solve_complex(M, np.ones(2), cond_limit=1e15)
    assert np.allclose(M @ x, np.ones(2))


def test_gen_eig_biorthogonal_scaling():
    rng = np.random.default_rng(1)
    n = 7
    L = rng.standard_normal((n, n))
    E = L @ L.T + n * np.eye(n)
    A = rng.standard_normal((n, n))
    res = gen_eig(A, E)
    for lam, v, w in zip(res.eigenvalues, res.right.T, res.left.T):
        assert np.linalg.norm(A @ v - lam * (E @ v)) < 1e-8 * np.linalg.norm(A)
        assert abs(w @ E @ v - 1.0) < 1e-8


def test_nullspace_basis_known_kernel():
    A = np.array([[1.0, 0.0, -1.0]])
    N = nullspace_basis(A)
    assert N.shape == (3, 2)
    assert np.allclose(A @ N, 0.0, atol=1e-12)
    assert np.allclose(N.T @ N, np.eye(2), atol=1e-12)


def test_nullspace_basis_zero_matrix_is_identity():
    N = nullspace_basis(np.zeros((3, 4)))
    assert N.shape == (4, 4)
    assert np.allclose(N.T @ N, np.eye(4))


def test_nullspace_basis_full_rank_is_empty():
    assert nullspace_basis(np.eye(3)).shape == (3, 0)


def test_orthonormalize_drops_dependent_columns():
    v = np.array([[1.0], [2.0], [0.0]])
    V = np.hstack([v, 2 * v, np.array([[0.0], [0.0], [1.0]])])
    Q = orthonormalize(V)
    assert Q.shape == (3, 2)
    assert np.allclose(Q.T @ Q, np.eye(2), atol=1e-12)


def test_rank_tolerance_scales_with_sigma():
    A = np.eye(4)
    assert rank_tolerance(A, 10.0) == pytest.approx(40 * np.finfo(float).eps)
