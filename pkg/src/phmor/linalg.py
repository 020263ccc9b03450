"""Dense linear-algebra kernels shared by all other modules.

Thin, contract-checked wrappers around LAPACK (via numpy/scipy) for the
decompositions and solves the reduction machinery needs: symmetric
eigendecompositions, SVD-based rank/nullspace decisions, shifted complex
solves, and generalized eigenproblems with two-sided eigenvectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

__all__ = [
    "LinAlgContractError",
    "SingularMatrixError",
    "SymEig",
    "GenEig",
    "sym_eig",
    "svd",
    "solve_complex",
    "gen_eig",
    "nullspace_basis",
    "rank_tolerance",
    "orthonormalize",
]

#: Condition-number threshold beyond which a matrix is treated as singular
#: to working precision.
COND_LIMIT = 1e12


class LinAlgContractError(ValueError):
    """An input violates a kernel precondition (shape, symmetry, finiteness)."""


class SingularMatrixError(LinAlgContractError):
    """A solve hit a matrix that is singular to working precision."""

    def __init__(self, message, cond_estimate=None):
        if cond_estimate is not None:
            message = f"{message} (condition estimate {cond_estimate:.3e})"
        super().__init__(message)
        self.cond_estimate = cond_estimate


def _as_matrix(M, name="matrix"):
    M = np.asarray(M)
    if M.ndim != 2:
        raise LinAlgContractError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise LinAlgContractError(f"{name} contains non-finite entries")
    return M


def rank_tolerance(M, sigma_max=None):
    """Default numerical-rank tolerance: max(rows, cols) * eps * sigma_1."""
    M = np.asarray(M)
    if sigma_max is None:
        sigma_max = spla.norm(M, 2) if M.size else 0.0
    return max(M.shape or (1,)) * np.finfo(float).eps * sigma_max


@dataclass(frozen=True)
class SymEig:
    """Spectral decomposition M = Q diag(eigenvalues) Q^T.

    Eigenvalues are ascending; Q has orthonormal columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        Q, lam = self.eigenvectors, self.eigenvalues
        return (Q * lam) @ Q.T


@dataclass(frozen=True)
class GenEig:
    """Eigenpairs of A v = lambda E v with two-sided eigenvectors.

    Right eigenvectors are the columns of ``right``; rows of ``left.T``
    satisfy w^T A = lambda w^T E, normalized so that w_i^T E v_i = 1.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray


def sym_eig(M, tol=1e-8):
    """Spectral decomposition of a (numerically) symmetric real matrix.

    The input is symmetrized internally; a relative asymmetry beyond
    `tol` is rejected.
    """
    M = _as_matrix(M, "M")
    n, nc = M.shape
    if n != nc:
        raise LinAlgContractError(f"sym_eig needs a square matrix, got {M.shape}")
    nrm = spla.norm(M, "fro")
    if nrm > 0 and spla.norm(M - M.T, "fro") > tol * nrm:
        raise LinAlgContractError("matrix is not symmetric to tolerance")
    Ms = 0.5 * (M + M.T)
    lam, Q = spla.eigh(Ms)
    return SymEig(eigenvalues=lam, eigenvectors=Q)


def svd(M):
    """Full SVD M = U diag(s) V^T with descending singular values."""
    M = _as_matrix(M, "M")
    U, s, Vt = spla.svd(M, full_matrices=True)
    return U, s, Vt.T


def solve_complex(M, rhs, cond_limit=COND_LIMIT):
    """Solve M X = rhs for square complex (or real) M.

    Raises :class:`SingularMatrixError` with a condition estimate when M is
    singular to working precision.  Callers solving shifted pencils
    s E - A at large |s| (whose condition number grows like |s| without
    any loss of relative solution accuracy) may pass a larger
    ``cond_limit``.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise LinAlgContractError(f"solve_complex needs a square matrix, got {M.shape}")
    rhs = np.asarray(rhs, dtype=complex)
    squeeze = rhs.ndim == 1
    B = rhs[:, None] if squeeze else rhs
    if B.shape[0] != M.shape[0]:
        raise LinAlgContractError("right-hand side has incompatible row count")
    try:
        lu, piv = spla.lu_factor(M)
    except spla.LinAlgError as exc:  # pragma: no cover - lu_factor rarely raises
        raise SingularMatrixError(str(exc)) from exc
    diag = np.abs(np.diag(lu))
    if diag.min(initial=np.inf) == 0.0:
        raise SingularMatrixError("matrix is exactly singular")
    anorm = spla.norm(M, 1)
    with np.errstate(all="ignore"):
        X = spla.lu_solve((lu, piv), B)
    # 1-norm condition estimate from the LU factors.
    try:
        inv_norm = spla.norm(spla.lu_solve((lu, piv), np.eye(M.shape[0], dtype=complex)), 1)
        cond = anorm * inv_norm
    except spla.LinAlgError:  # pragma: no cover
        cond = np.inf
    if not np.all(np.isfinite(X)) or cond > cond_limit:
        raise SingularMatrixError("matrix is singular to working precision", cond)
    return X[:, 0] if squeeze else X


def gen_eig(A, E, defective_cond_limit=1e8):
    """Generalized eigenpairs of (A, E) with E symmetric positive definite.

    Returns eigenvalues together with right eigenvectors ``v_i`` and left
    eigenvectors ``w_i`` satisfying ``A v_i = lambda_i E v_i`` and
    ``w_i^T A = lambda_i w_i^T E``, scaled so that ``w_i^T E v_i = 1``.
    Warns when the right-eigenvector basis is ill conditioned (defective or
    nearly defective pencil).
    """
    A = _as_matrix(A, "A")
    E = _as_matrix(E, "E")
    if A.shape != E.shape or A.shape[0] != A.shape[1]:
        raise LinAlgContractError("A and E must be square and of equal shape")
    nrmE = spla.norm(E, "fro")
    if nrmE > 0 and spla.norm(E - E.T, "fro") > 1e-10 * nrmE:
        raise LinAlgContractError("E must be symmetric")
    lam_min = spla.eigh(0.5 * (E + E.T), eigvals_only=True, subset_by_index=[0, 0])[0]
    if lam_min <= 0:
        raise LinAlgContractError(f"E must be positive definite (min eig {lam_min:.3e})")

    lam, VL, VR = spla.eig(A, E, left=True, right=True)
    # scipy's left vectors satisfy VL^H A = lam VL^H E; conjugate for the
    # transpose convention used throughout (real A, E).
    W = VL.conj()
    scale = np.einsum("ij,jk,ki->i", W.T, E, VR)
    if np.any(np.abs(scale) < 1e-14 * max(1.0, spla.norm(E, 2))):
        warnings.warn("near-defective pencil: w^T E v ~ 0 for some pair", RuntimeWarning)
        scale = np.where(np.abs(scale) < 1e-300, 1.0, scale)
    W = W / scale[None, :]
    if np.linalg.cond(VR) > defective_cond_limit:
        warnings.warn("eigenvector basis badly conditioned; pencil may be defective", RuntimeWarning)
    return GenEig(eigenvalues=lam, right=VR, left=W)


def nullspace_basis(M, tol=None):
    """Orthonormal basis of the right nullspace of M at tolerance `tol`.

    The column count is ``cols - rank(M, tol)``; an empty basis is a valid
    result. Transpose the input to obtain a left-nullspace basis.
    """
    M = _as_matrix(M, "M")
    if M.size == 0 or not np.any(M):
        return np.eye(M.shape[1])
    U, s, Vt = spla.svd(M)
    if tol is None:
        tol = rank_tolerance(M, s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return Vt[rank:].T.copy()


def orthonormalize(V, tol_factor=1e-12):
    """Orthonormal basis of span(V) via rank-revealing QR.

    Columns whose contribution falls below ``tol_factor * sigma_1`` are
    dropped; the caller is told how many survived via the returned shape.
    """
    V = _as_matrix(V, "V")
    if V.shape[1] == 0:
        return V.copy()
    Q, R, _ = spla.qr(V, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return np.empty((V.shape[0], 0))
    keep = int(np.sum(diag > tol_factor * diag[0]))
    return Q[:, :keep]
