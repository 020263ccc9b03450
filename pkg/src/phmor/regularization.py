"""Diagnosis and regularization of pHDAE systems.

Systems coming from automated modeling are often not in one of the
semi-explicit forms the reducers need: the pencil may contain a
non-dynamic singular part, the state may not be ordered by index, or
the feedthrough may be deficient.  This module provides

* ``diagnose`` — rank tests for controllability/observability at
  infinity and along the finite spectrum, pencil regularity, and an
  index <= 1 certificate;
* ``remove_singular_part`` — splits off states that appear in no
  equation (common nullspace of E, J, R) by an orthogonal congruence;
* ``condensed_form`` — staircase congruence ordering the state into
  dynamic, dissipative-algebraic, skew-algebraic, index-2 coupled and
  free blocks, with rank-gap reporting;
* ``output_feedback_regularize`` — closes the loop u = -K y, which
  absorbs a nonsingular feedthrough into the dynamics and returns a
  pHDAE without input terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .linalg import LinAlgContractError, nullspace_basis, rank_tolerance
from .systems import GenericLTISystem, PHDAESystem, as_generic

__all__ = [
    "RankTest",
    "DiagnosisReport",
    "CondensedForm",
    "diagnose",
    "remove_singular_part",
    "condensed_form",
    "condensed_report",
    "output_feedback_regularize",
]


@dataclass(frozen=True)
class RankTest:
    """Outcome of a single rank condition: expected vs measured rank and
    the worst evaluation point (for spectrum-dependent tests)."""

    name: str
    passed: bool
    expected_rank: int
    measured_rank: int
    witness: complex | None = None

    @property
    def gap(self):
        return self.expected_rank - self.measured_rank


@dataclass(frozen=True)
class DiagnosisReport:
    """Results of the regularity/index diagnosis of a descriptor system."""

    pencil_regular: bool
    index_leq1: bool
    tests: tuple

    def __getitem__(self, name):
        for t in self.tests:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def regular_at_infinity(self):
        return self["C2"].passed and self["O2"].passed

    def summary(self):
        lines = [
            f"pencil regular:   {'yes' if self.pencil_regular else 'NO'}",
            f"index at most 1:  {'yes' if self.index_leq1 else 'NO'}",
        ]
        for t in self.tests:
            status = "ok " if t.passed else "FAIL"
            wit = f" at lambda={t.witness:.6g}" if (t.witness is not None and not t.passed) else ""
            lines.append(
                f"  [{status}] {t.name}: rank {t.measured_rank}/{t.expected_rank}{wit}"
            )
        return "\n".join(lines)


def _rank(M):
    if M.size == 0:
        return 0
    s = spla.svdvals(M)
    return int(np.sum(s > rank_tolerance(M, s[0])))


def _finite_spectrum(A, E, cap=400):
    if A.shape[0] > cap:
        return np.array([], dtype=complex)
    lam = spla.eigvals(A, E)
    return lam[np.isfinite(lam) & (np.abs(lam) < 1e10)]


def diagnose(model, probes=16, seed=0, spectrum_cap=400):
    """Rank-based regularity diagnosis of a descriptor realization.

    Accepts a :class:`GenericLTISystem` or :class:`PHDAESystem`.  The
    finite-spectrum conditions (C1/O1) are checked at the finite pencil
    eigenvalues plus ``probes`` random complex points; the conditions at
    infinity (C2/O2) use nullspace bases of E.  ``index_leq1`` certifies
    that the pencil has differentiation index at most one.
    """
    gen = as_generic(model) if isinstance(model, PHDAESystem) else model
    E, A, B, C = gen.E, gen.A, gen.B, gen.C
    n = gen.n
    rng = np.random.default_rng(seed)
    scale = 1.0 + max(spla.norm(A, 2), spla.norm(E, 2))

    lam_eig = _finite_spectrum(A, E, spectrum_cap)
    lam_rand = scale * (rng.standard_normal(probes) + 1j * rng.standard_normal(probes))
    points = np.concatenate([lam_eig, lam_rand])

    # pencil regularity: det(lambda E - A) != 0 somewhere
    regular = False
    witness_reg = None
    for lam in lam_rand:
        if _rank(lam * E - A) == n:
            regular = True
            witness_reg = lam
            break

    def spectrum_test(name, stack):
        worst_rank, worst_lam = n, None
        for lam in points:
            r = _rank(stack(lam))
            if r < worst_rank:
                worst_rank, worst_lam = r, lam
        return RankTest(name=name, passed=worst_rank == n,
                        expected_rank=n, measured_rank=worst_rank,
                        witness=worst_lam)

    c1 = spectrum_test("C1", lambda lam: np.hstack([lam * E - A, B]))
    o1 = spectrum_test("O1", lambda lam: np.vstack([lam * E - A, C]))

    S_inf = nullspace_basis(E)       # right nullspace of E
    T_inf = nullspace_basis(E.T)     # left nullspace of E
    r_c2 = _rank(np.hstack([E, A @ S_inf, B]))
    c2 = RankTest(name="C2", passed=r_c2 == n, expected_rank=n, measured_rank=r_c2)
    r_o2 = _rank(np.vstack([E, T_inf.T @ A, C]))
    o2 = RankTest(name="O2", passed=r_o2 == n, expected_rank=n, measured_rank=r_o2)

    core = T_inf.T @ A @ S_inf
    index_leq1 = (
        core.shape[0] == core.shape[1]
        and (core.size == 0 or _rank(core) == core.shape[0])
    )

    report = DiagnosisReport(
        pencil_regular=regular,
        index_leq1=bool(index_leq1),
        tests=(c1, c2, o1, o2),
    )
    if witness_reg is None and not regular:
        warnings.warn("pencil appears singular at all probe points", RuntimeWarning)
    return report


def remove_singular_part(sys):
    """Split off states appearing in no dynamic or algebraic equation.

    States in the common nullspace of E, J and R (one stacked SVD)
    either couple to the input only through B (they move to the tail of
    the kept block as pure input constraints) or not at all (dropped).
    Returns ``(subsystem, dropped, V)`` with V orthogonal and
    V^T (.) V / V^T B reproducing the transformed system; the leading
    ``sys.n - dropped`` states form the subsystem.
    """
    K = nullspace_basis(np.vstack([sys.E, sys.J, sys.R]))
    k = K.shape[1]
    if k == 0:
        return sys, 0, np.eye(sys.n)
    # complement of the common nullspace
    U1 = nullspace_basis(K.T)
    V1 = np.hstack([U1, K])
    P2 = K.T @ sys.P
    if np.any(np.abs(P2) > 1e-10 * (1.0 + spla.norm(sys.P, 2))):
        raise LinAlgContractError(
            "nonzero P rows on states outside range(E, J, R); "
            "the passivity matrix would be indefinite"
        )
    B2 = K.T @ sys.B
    r2 = _rank(B2)
    if r2 > 0:
        # rotate the nullspace block so input-coupled rows come first
        U, _, _ = spla.svd(B2)
        V1 = V1 @ spla.block_diag(np.eye(sys.n - k), U)
    dropped = k - r2
    keep = sys.n - dropped
    Et = V1.T @ sys.E @ V1
    Jt = V1.T @ sys.J @ V1
    Rt = V1.T @ sys.R @ V1
    Bt = V1.T @ sys.B
    Pt = V1.T @ sys.P
    sub = PHDAESystem(
        E=0.5 * (Et[:keep, :keep] + Et[:keep, :keep].T),
        J=0.5 * (Jt[:keep, :keep] - Jt[:keep, :keep].T),
        R=0.5 * (Rt[:keep, :keep] + Rt[:keep, :keep].T),
        B=Bt[:keep],
        P=Pt[:keep],
        S=sys.S,
        N=sys.N,
    )
    return sub, dropped, V1


@dataclass(frozen=True)
class CondensedForm:
    """Staircase congruence of a pHDAE.

    Block sizes (in order): dynamic (E11 > 0), dissipative algebraic
    (R22 > 0), skew algebraic (J33 nonsingular), index-2 coupled
    (rows of [J41 J42] independent), and free states.  ``system`` is the
    transformed pHDAE V^T (.) V; ``rank_gaps`` records, per staircase
    step, the ratio between the smallest accepted and largest rejected
    singular value (large is good; inf if nothing was rejected).
    """

    system: PHDAESystem
    V: np.ndarray
    block_sizes: tuple
    rank_gaps: tuple
    warnings: tuple

    @property
    def n_dynamic(self):
        return self.block_sizes[0]


def _split_psd(M):
    """Eigendecomposition split of a symmetric psd matrix: returns
    (Q, rank, gap) with the positive eigenvector block first."""
    if M.shape[0] == 0:
        return np.eye(0), 0, np.inf
    w, Q = spla.eigh(0.5 * (M + M.T))
    order = np.argsort(w)[::-1]
    w, Q = w[order], Q[:, order]
    tol = rank_tolerance(M, max(w.max(initial=0.0), 0.0))
    rank = int(np.sum(w > tol))
    gap = np.inf
    if 0 < rank < w.size and w[rank] > 0:
        gap = w[rank - 1] / w[rank]
    elif rank < w.size:
        gap = np.inf
    return Q, rank, gap


def _split_range(M):
    """Orthogonal split of a square matrix into range/nullspace blocks:
    returns (Q, rank, gap) with Q = [range basis, nullspace basis]."""
    if M.shape[0] == 0:
        return np.eye(0), 0, np.inf
    U, s, _ = spla.svd(M)
    tol = rank_tolerance(M, s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    gap = s[rank - 1] / s[rank] if 0 < rank < s.size and s[rank] > 0 else np.inf
    N = nullspace_basis(M)
    if N.shape[1] != M.shape[0] - rank:
        # fall back to consistent SVD-based complement
        N = U[:, rank:]
    Q = np.hstack([U[:, :rank], N]) if rank > 0 else np.eye(M.shape[0])
    # re-orthonormalize against roundoff
    Q, _ = spla.qr(Q, mode="economic")
    return Q, rank, gap


def condensed_form(sys, gap_warn=10.0):
    """Orthogonal staircase congruence separating the system by index.

    Steps: (1) eigendecompose E to isolate the dynamic block, (2) split
    the algebraic block of R into definite and zero parts, (3) split the
    remaining skew block of J into nonsingular and zero parts, (4) row
    compress the couplings of the leftover states into the earlier
    blocks.  All steps are orthogonal congruences, so the result is a
    pHDAE with the same transfer function.  Small rank gaps (below
    ``gap_warn``) are reported — they mean the block sizes are decided
    by nearly-tied singular values.
    """
    n = sys.n
    V = np.eye(n)
    notes = []
    gaps = []

    def transform(sys, Q):
        return PHDAESystem(
            E=0.5 * ((Q.T @ sys.E @ Q) + (Q.T @ sys.E @ Q).T),
            J=0.5 * ((Q.T @ sys.J @ Q) - (Q.T @ sys.J @ Q).T),
            R=0.5 * ((Q.T @ sys.R @ Q) + (Q.T @ sys.R @ Q).T),
            B=Q.T @ sys.B,
            P=Q.T @ sys.P,
            S=sys.S,
            N=sys.N,
        )

    # step 1: dynamic block from E
    Q1, n_dyn, gap = _split_psd(sys.E)
    gaps.append(gap)
    V = V @ Q1
    cur = transform(sys, Q1)

    # step 2: dissipative algebraic block from trailing R
    tail = n - n_dyn
    Q2t, n_diss, gap = _split_psd(cur.R[n_dyn:, n_dyn:])
    gaps.append(gap)
    Q2 = spla.block_diag(np.eye(n_dyn), Q2t)
    V = V @ Q2
    cur = transform(cur, Q2)

    # step 3: skew algebraic block from trailing J
    off = n_dyn + n_diss
    J33 = cur.J[off:, off:]
    Q3t, n_skew, gap = _split_range(J33)
    gaps.append(gap)
    Q3 = spla.block_diag(np.eye(off), Q3t)
    V = V @ Q3
    cur = transform(cur, Q3)

    # step 4: index-2 couplings of the leftover states
    off2 = off + n_skew
    coupling = cur.J[off2:, :off]  # rows [J41 J42]
    if coupling.shape[0]:
        U4, s4, _ = spla.svd(coupling) if coupling.size else (np.eye(coupling.shape[0]), np.array([]), None)
        tol = rank_tolerance(coupling, s4[0]) if s4.size else 0.0
        n_ind2 = int(np.sum(s4 > tol))
        gap = s4[n_ind2 - 1] / s4[n_ind2] if 0 < n_ind2 < s4.size and s4[n_ind2] > 0 else np.inf
        gaps.append(gap)
        Q4 = spla.block_diag(np.eye(off2), U4)
        V = V @ Q4
        cur = transform(cur, Q4)
    else:
        n_ind2 = 0
        gaps.append(np.inf)
    n_sing = n - off2 - n_ind2

    for i, g in enumerate(gaps):
        if g < gap_warn:
            notes.append(
                f"staircase step {i + 1} decided a rank with gap {g:.2f} "
                f"(below {gap_warn:g}); block sizes may be unreliable"
            )
            warnings.warn(notes[-1], RuntimeWarning)

    return CondensedForm(
        system=cur,
        V=V,
        block_sizes=(n_dyn, n_diss, n_skew, n_ind2, n_sing),
        rank_gaps=tuple(gaps),
        warnings=tuple(notes),
    )


def condensed_report(cf):
    """Human-readable staircase report (block sizes and rank gaps)."""
    names = ("dynamic", "algebraic (dissipative)", "algebraic (skew)",
             "index-2 coupled", "free")
    lines = ["condensed form block sizes:"]
    for name, size in zip(names, cf.block_sizes):
        lines.append(f"  {name:<24s} {size}")
    lines.append("rank gaps per staircase step: "
                 + ", ".join("inf" if not np.isfinite(g) else f"{g:.3g}"
                             for g in cf.rank_gaps))
    for w in cf.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def output_feedback_regularize(sys, K):
    """Close the loop u = -K y (K symmetric positive definite).

    The closed-loop system E x' = (J_cl - R_cl) x is again a pHDAE with
    the same E and Hamiltonian but no input/output terms:
    A_cl = (J - R) - (B - P)(K^{-1} + S + N)^{-1}(B + P)^T.  Requires
    K^{-1} + S + N to be nonsingular; feedback makes many otherwise
    deficient feedthroughs regular.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape[0] != K.shape[1] or K.shape[0] != sys.m:
        raise LinAlgContractError(f"K must be {sys.m} x {sys.m}")
    if spla.norm(K - K.T, 2) > 1e-12 * (1.0 + spla.norm(K, 2)):
        raise LinAlgContractError("K must be symmetric")
    if spla.eigh(K, eigvals_only=True, subset_by_index=[0, 0])[0] <= 0:
        raise LinAlgContractError("K must be positive definite")
    Kinv = spla.inv(K)
    T = Kinv + sys.S + sys.N
    A_cl = (sys.J - sys.R) - (sys.B - sys.P) @ spla.solve(T, (sys.B + sys.P).T)
    sym_A, J_cl = 0.5 * (A_cl + A_cl.T), 0.5 * (A_cl - A_cl.T)
    m0 = np.zeros((sys.n, 0))
    return PHDAESystem(
        E=sys.E,
        J=J_cl,
        R=-sym_A,
        B=m0,
        P=m0,
        S=np.zeros((0, 0)),
        N=np.zeros((0, 0)),
    )
