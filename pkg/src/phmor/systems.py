"""Structured system model: the seven-matrix container, its validation,
and the block-partitioned index views used by the reducers.

A system is described by (E, J, R, B, P, S, N) with E = E^T >= 0, skew J,
and positive semidefinite passivity matrix W = [[R, P], [P^T, S]].  The
dynamics read::

    E x' = (J - R) x + (B - P) u
    y    = (B + P)^T x + (S + N) u

Systems are immutable after construction (the arrays are frozen), so the
partition views can safely alias parent storage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .linalg import COND_LIMIT, LinAlgContractError

__all__ = [
    "PHDAESystem",
    "GenericLTISystem",
    "ValidationReport",
    "ConditionCheck",
    "Index1Partition",
    "Index2Partition",
    "MixedPartition",
    "PartitionError",
    "validate_structure",
    "hamiltonian",
    "symmetric_skew_split",
    "as_generic",
    "partition_index1",
    "partition_index2",
    "partition_mixed",
]

#: Relative tolerance for positive-semidefiniteness decisions.
TOL_PSD = 1e-10


class PartitionError(ValueError):
    """A block partition's invariants do not hold; the message names the
    failed condition."""


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _min_eig_sym(M):
    if M.size == 0:
        return 0.0
    Ms = 0.5 * (M + M.T)
    return float(spla.eigh(Ms, eigvals_only=True, subset_by_index=[0, 0])[0])


@dataclass(frozen=True)
class PHDAESystem:
    """The structured seven-matrix model.

    E, J, R are n x n; B, P are n x m; S, N are m x m.  Construction only
    checks shapes and finiteness; structural validity is reported by
    :func:`validate_structure`.
    """

    E: np.ndarray
    J: np.ndarray
    R: np.ndarray
    B: np.ndarray
    P: np.ndarray
    S: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        for name in ("E", "J", "R", "B", "P", "S", "N"):
            arr = _frozen(getattr(self, name))
            if not np.all(np.isfinite(arr)):
                raise LinAlgContractError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, arr)
        n = self.E.shape[0]
        m = self.B.shape[1] if self.B.ndim == 2 else 1
        if self.B.ndim == 1:
            object.__setattr__(self, "B", _frozen(self.B.reshape(n, 1)))
        if self.P.ndim == 1:
            object.__setattr__(self, "P", _frozen(self.P.reshape(n, 1)))
        for name, shape in (
            ("E", (n, n)), ("J", (n, n)), ("R", (n, n)),
            ("B", (n, m)), ("P", (n, m)), ("S", (m, m)), ("N", (m, m)),
        ):
            if getattr(self, name).shape != shape:
                raise LinAlgContractError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}"
                )

    @property
    def n(self):
        return self.E.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def passivity_matrix(self):
        """W = [[R, P], [P^T, S]]."""
        return np.block([[self.R, self.P], [self.P.T, self.S]])


@dataclass(frozen=True)
class GenericLTISystem:
    """Unstructured descriptor realization E x' = A x + B u, y = C x + D u."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name in ("E", "A", "B", "C", "D"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.E.shape[0]
        if self.A.shape != (n, n) or self.B.shape[0] != n or self.C.shape[1] != n:
            raise LinAlgContractError("inconsistent dimensions in descriptor realization")
        if self.D.shape != (self.C.shape[0], self.B.shape[1]):
            raise LinAlgContractError("feedthrough shape inconsistent with B, C")

    @property
    def n(self):
        return self.E.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    violation: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self):
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"{c.name:<14s} {status}  violation={c.violation:.3e}  {c.detail}")
        return "\n".join(lines)


def validate_structure(sys, tol=TOL_PSD):
    """Check the four defining structural conditions of a system.

    Returns a :class:`ValidationReport` listing, per condition, whether it
    holds at tolerance `tol` and the measured violation:

    - ``E_symmetric`` : ||E - E^T||_F relative to ||E||_F
    - ``E_psd``       : negative part of the smallest eigenvalue of sym(E)
    - ``J_skew``      : ||J + J^T||_F relative to ||J||_F
    - ``W_psd``       : negative part of the smallest eigenvalue of sym(W)

    S = S^T and N = -N^T are folded into the W check plus an explicit
    ``SN_split`` check.
    """
    E, J = sys.E, sys.J
    nrmE = spla.norm(E, "fro") or 1.0
    nrmJ = spla.norm(J, "fro") or 1.0
    scaleE = spla.norm(E, 2) or 1.0

    e_sym_viol = spla.norm(E - E.T, "fro") / nrmE
    j_skew_viol = spla.norm(J + J.T, "fro") / nrmJ
    min_eig_E = _min_eig_sym(E)
    W = sys.passivity_matrix
    scaleW = spla.norm(W, 2) or 1.0
    min_eig_W = _min_eig_sym(W)
    sn_viol = max(
        spla.norm(sys.S - sys.S.T, "fro"),
        spla.norm(sys.N + sys.N.T, "fro"),
    ) / (spla.norm(sys.S + sys.N, "fro") or 1.0)

    checks = (
        ConditionCheck("E_symmetric", e_sym_viol <= tol, e_sym_viol),
        ConditionCheck("E_psd", min_eig_E >= -tol * scaleE, max(0.0, -min_eig_E),
                       f"min eig {min_eig_E:.3e}"),
        ConditionCheck("J_skew", j_skew_viol <= tol, j_skew_viol),
        ConditionCheck("W_psd", min_eig_W >= -tol * scaleW, max(0.0, -min_eig_W),
                       f"min eig {min_eig_W:.3e}"),
        ConditionCheck("SN_split", sn_viol <= tol, sn_viol),
    )
    return ValidationReport(checks=checks)


def hamiltonian(sys, x):
    """Stored energy 0.5 x^T E x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise LinAlgContractError(f"state has shape {x.shape}, expected ({sys.n},)")
    return 0.5 * float(x @ sys.E @ x)


def symmetric_skew_split(M):
    """Exact decomposition M = sym + skew with sym = (M+M^T)/2."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise LinAlgContractError("symmetric_skew_split needs a square matrix")
    sym = 0.5 * (M + M.T)
    return sym, M - sym


def as_generic(sys):
    """Unstructured realization: A = J - R, B = B - P, C = (B+P)^T, D = S + N."""
    return GenericLTISystem(
        E=sys.E,
        A=sys.J - sys.R,
        B=sys.B - sys.P,
        C=(sys.B + sys.P).T,
        D=sys.S + sys.N,
    )


def _check_spd(M, what):
    if M.size == 0:
        raise PartitionError(f"{what} is empty")
    lam = _min_eig_sym(M)
    if lam <= TOL_PSD * (spla.norm(M, 2) or 1.0):
        raise PartitionError(f"{what} is not positive definite (min eig {lam:.3e})")


def _check_nonsingular(M, what):
    if M.size == 0:
        return
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise PartitionError(f"{what} is singular to working precision (cond {cond:.3e})")


def _check_zero(M, what, scale):
    if M.size and spla.norm(M, "fro") > TOL_PSD * max(1.0, scale):
        raise PartitionError(f"{what} must be zero in this semi-explicit form")


@dataclass(frozen=True)
class Index1Partition:
    """Semi-explicit index-1 view: E = diag(E11, 0) with E11 > 0 and
    J22 - R22 nonsingular."""

    parent: PHDAESystem
    n1: int
    n2: int

    def __post_init__(self):
        n1, n2 = self.n1, self.n2
        sys = self.parent
        if n1 < 0 or n2 < 0 or n1 + n2 != sys.n:
            raise PartitionError(f"block sizes ({n1}, {n2}) do not sum to n={sys.n}")
        scale = spla.norm(sys.E, 2)
        _check_zero(sys.E[:n1, n1:], "E12", scale)
        _check_zero(sys.E[n1:, :n1], "E21", scale)
        _check_zero(sys.E[n1:, n1:], "E22", scale)
        _check_spd(self.E11, "E11")
        _check_nonsingular(self.A22, "J22 - R22")

    @property
    def E11(self):
        return self.parent.E[: self.n1, : self.n1]

    @property
    def J11(self):
        return self.parent.J[: self.n1, : self.n1]

    @property
    def J12(self):
        return self.parent.J[: self.n1, self.n1:]

    @property
    def J22(self):
        return self.parent.J[self.n1:, self.n1:]

    @property
    def R11(self):
        return self.parent.R[: self.n1, : self.n1]

    @property
    def R12(self):
        return self.parent.R[: self.n1, self.n1:]

    @property
    def R22(self):
        return self.parent.R[self.n1:, self.n1:]

    @property
    def A22(self):
        return self.J22 - self.R22

    @property
    def B1(self):
        return self.parent.B[: self.n1]

    @property
    def B2(self):
        return self.parent.B[self.n1:]

    @property
    def P1(self):
        return self.parent.P[: self.n1]

    @property
    def P2(self):
        return self.parent.P[self.n1:]

    @property
    def b2_zero(self):
        return not (np.any(self.B2) or np.any(self.P2))


@dataclass(frozen=True)
class Index2Partition:
    """Semi-explicit index-2 view: E = diag(E11, 0), trailing J, R blocks
    zero, with E11 > 0 and J12^T E11^{-1} J12 nonsingular."""

    parent: PHDAESystem
    n1: int
    n2: int
    b2_zero: bool = field(init=False)

    def __post_init__(self):
        n1, n2 = self.n1, self.n2
        sys = self.parent
        if n1 <= 0 or n2 < 0 or n1 + n2 != sys.n:
            raise PartitionError(f"block sizes ({n1}, {n2}) do not sum to n={sys.n}")
        scale = spla.norm(sys.E, 2)
        _check_zero(sys.E[:n1, n1:], "E12", scale)
        _check_zero(sys.E[n1:, :n1], "E21", scale)
        _check_zero(sys.E[n1:, n1:], "E22", scale)
        _check_zero(sys.J[n1:, n1:], "J22", spla.norm(sys.J, 2))
        _check_zero(sys.R[:n1, n1:], "R12", spla.norm(sys.R, 2))
        _check_zero(sys.R[n1:, :n1], "R21", spla.norm(sys.R, 2))
        _check_zero(sys.R[n1:, n1:], "R22", spla.norm(sys.R, 2))
        _check_spd(self.E11, "E11")
        if n2 > 0:
            _check_nonsingular(self.coupling_matrix(), "J12^T E11^{-1} J12 (coupling)")
        object.__setattr__(
            self, "b2_zero", not (np.any(self.B2) or np.any(self.P2))
        )

    @property
    def E11(self):
        return self.parent.E[: self.n1, : self.n1]

    @property
    def J11(self):
        return self.parent.J[: self.n1, : self.n1]

    @property
    def J12(self):
        return self.parent.J[: self.n1, self.n1:]

    @property
    def R11(self):
        return self.parent.R[: self.n1, : self.n1]

    @property
    def A11(self):
        return self.J11 - self.R11

    @property
    def B1(self):
        return self.parent.B[: self.n1]

    @property
    def B2(self):
        return self.parent.B[self.n1:]

    @property
    def P1(self):
        return self.parent.P[: self.n1]

    @property
    def P2(self):
        return self.parent.P[self.n1:]

    def coupling_matrix(self):
        """J12^T E11^{-1} J12 (nonsingular for a valid index-2 form)."""
        X = spla.solve(self.E11, self.J12, assume_a="pos")
        return self.J12.T @ X


@dataclass(frozen=True)
class MixedPartition:
    """Combined index-1/index-2 view: states (x1, x2, x3) where x1 carries
    the index-2 constraint (J31 x1 = 0 with J31 square nonsingular), x2 the
    index-1 algebraic part (J22 - R22 nonsingular), and the leading 2x2
    block of E is positive definite.  B3 = P3 = 0 is required."""

    parent: PHDAESystem
    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        n1, n2, n3 = self.n1, self.n2, self.n3
        sys = self.parent
        if min(n1, n2, n3) < 0 or n1 + n2 + n3 != sys.n:
            raise PartitionError(f"block sizes ({n1}, {n2}, {n3}) do not sum to n={sys.n}")
        if n3 != n1:
            raise PartitionError(
                f"index-2 constraint block must be square: n3={n3} != n1={n1}"
            )
        nd = n1 + n2
        scaleE = spla.norm(sys.E, 2)
        scaleJ = spla.norm(sys.J, 2)
        scaleR = spla.norm(sys.R, 2)
        _check_zero(sys.E[:nd, nd:], "E(:,3)", scaleE)
        _check_zero(sys.E[nd:, :], "E(3,:)", scaleE)
        _check_zero(sys.J[n1:nd, nd:], "J23", scaleJ)
        _check_zero(sys.J[nd:, n1:nd], "J32", scaleJ)
        _check_zero(sys.J[nd:, nd:], "J33", scaleJ)
        _check_zero(sys.R[:, nd:], "R(:,3)", scaleR)
        _check_zero(sys.R[nd:, :], "R(3,:)", scaleR)
        _check_zero(sys.B[nd:], "B3", spla.norm(sys.B, 2))
        _check_zero(sys.P[nd:], "P3", spla.norm(sys.P, 2) if sys.P.size else 0.0)
        _check_spd(self.E_dyn, "leading 2x2 block of E")
        _check_nonsingular(self.A22, "J22 - R22")
        if n3 > 0:
            _check_nonsingular(self.J31, "J31")

    @property
    def E_dyn(self):
        nd = self.n1 + self.n2
        return self.parent.E[:nd, :nd]

    @property
    def A22(self):
        n1, nd = self.n1, self.n1 + self.n2
        Ablk = self.parent.J - self.parent.R
        return Ablk[n1:nd, n1:nd]

    @property
    def J31(self):
        nd = self.n1 + self.n2
        return self.parent.J[nd:, : self.n1]

    @property
    def B1(self):
        return self.parent.B[: self.n1]

    @property
    def B2(self):
        return self.parent.B[self.n1: self.n1 + self.n2]

    @property
    def P1(self):
        return self.parent.P[: self.n1]

    @property
    def P2(self):
        return self.parent.P[self.n1: self.n1 + self.n2]


def partition_index1(sys, n1):
    """Semi-explicit index-1 view with dynamic block size `n1`."""
    return Index1Partition(parent=sys, n1=n1, n2=sys.n - n1)


def partition_index2(sys, n1):
    """Semi-explicit index-2 view with dynamic block size `n1`."""
    return Index2Partition(parent=sys, n1=n1, n2=sys.n - n1)


def partition_mixed(sys, n1, n2):
    """Mixed index-1/index-2 view with constrained block `n1` and index-1
    algebraic block `n2`; the multiplier block size follows."""
    return MixedPartition(parent=sys, n1=n1, n2=n2, n3=sys.n - n1 - n2)
