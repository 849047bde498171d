"""Isaacs-type uniformly elliptic operators.

An operator is a finite family of negative semi-definite symmetric
matrices arranged in branches: F(M) = max over branches of (min within
the branch of Tr(A M)).  Construction keeps the matrices immutable;
validation of the structural assumptions (symmetry, semi-definiteness,
row diagonal dominance) is an explicit operation returning a report
rather than an exception, so callers can surface every failing matrix
at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateEllipticityError, ShapeError

__all__ = [
    "IsaacsOperator",
    "EllipticityBounds",
    "OperatorValidation",
    "isaacs_eval",
    "validate_operator",
    "ellipticity_bounds",
    "barrier_bounds",
]

#: eigenvalue slack for semi-definiteness checks (floating-point eigensolves)
EIGENVALUE_TOL = 1e-10


class IsaacsOperator:
    """Finite sup-inf family of trace operators.

    ``families[a][b]`` is the d x d matrix of branch a, inner index b.
    Matrices are copied and marked read-only.
    """

    def __init__(self, families, dim: int | None = None):
        branches = []
        for branch in families:
            mats = []
            for A in branch:
                A = np.array(A, dtype=float)
                if A.ndim != 2 or A.shape[0] != A.shape[1]:
                    raise ShapeError(f"operator matrix must be square, got shape {A.shape}")
                A.setflags(write=False)
                mats.append(A)
            if not mats:
                raise ConfigurationError("every branch needs at least one matrix")
            branches.append(tuple(mats))
        if not branches:
            raise ConfigurationError("operator needs at least one branch")
        d = branches[0][0].shape[0]
        for branch in branches:
            for A in branch:
                if A.shape[0] != d:
                    raise ShapeError("all operator matrices must share one dimension")
        if dim is not None and dim != d:
            raise ShapeError(f"declared dim {dim} does not match matrices of size {d}")
        self.families = tuple(branches)
        self.dim = d

    def matrices(self):
        """All matrices of the family in branch order."""
        for branch in self.families:
            yield from branch

    def __repr__(self):
        sizes = [len(b) for b in self.families]
        return f"IsaacsOperator(dim={self.dim}, branches={sizes})"


@dataclass(frozen=True)
class EllipticityBounds:
    """A certificate 0 < lambda <= Lambda of uniform ellipticity."""

    lam: float
    Lam: float

    def __post_init__(self):
        if not 0 < self.lam <= self.Lam:
            raise ConfigurationError(f"need 0 < lambda <= Lambda, got ({self.lam}, {self.Lam})")


@dataclass
class MatrixCheck:
    branch: int
    inner: int
    symmetric: bool
    negative_semidefinite: bool
    max_eigenvalue: float
    diagonally_dominant: bool

    @property
    def passed(self) -> bool:
        return self.symmetric and self.negative_semidefinite and self.diagonally_dominant


@dataclass
class OperatorValidation:
    checks: list[MatrixCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[MatrixCheck]:
        return [c for c in self.checks if not c.passed]


def isaacs_eval(op: IsaacsOperator, M) -> float:
    """max over branches of min over the branch of Tr(A M)."""
    M = np.asarray(M, dtype=float)
    if M.shape != (op.dim, op.dim):
        raise ShapeError(f"expected a {op.dim}x{op.dim} matrix, got shape {M.shape}")
    best = -np.inf
    for branch in op.families:
        inner = min(float(np.tensordot(A, M.T)) for A in branch)
        if inner > best:
            best = inner
    return best


def isaacs_eval_many(op: IsaacsOperator, H: np.ndarray) -> np.ndarray:
    """Vectorised sup-inf over a stack of symmetric matrices, shape (n, d, d)."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 3 or H.shape[1:] != (op.dim, op.dim):
        raise ShapeError(f"expected shape (n, {op.dim}, {op.dim}), got {H.shape}")
    branch_vals = []
    for branch in op.families:
        traces = [np.einsum("ij,nij->n", A, H) for A in branch]
        branch_vals.append(np.minimum.reduce(traces))
    return np.maximum.reduce(branch_vals)


def validate_operator(op: IsaacsOperator) -> OperatorValidation:
    """Check symmetry, negative semi-definiteness and diagonal dominance.

    Semi-definiteness allows eigenvalues up to EIGENVALUE_TOL above zero.
    """
    checks = []
    for a, branch in enumerate(op.families):
        for b, A in enumerate(branch):
            sym = bool(np.allclose(A, A.T, atol=1e-12))
            eigs = np.linalg.eigvalsh(0.5 * (A + A.T))
            nsd = bool(eigs[-1] <= EIGENVALUE_TOL)
            offsums = np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))
            dom = bool(np.all(np.abs(np.diag(A)) >= offsums - 1e-12))
            checks.append(MatrixCheck(a, b, sym, nsd, float(eigs[-1]), dom))
    return OperatorValidation(checks)


def ellipticity_bounds(op: IsaacsOperator) -> EllipticityBounds:
    """Conservative (lambda, Lambda) certificate for the sup-inf family.

    lambda is the smallest eigenvalue magnitude over all matrices, Lambda
    the largest; for validated families every decrease F(M) - F(M+N) with
    N >= 0 then lies in [lambda*|N|, d*Lambda*|N|] (spectral norm).
    """
    small = np.inf
    large = 0.0
    for A in op.matrices():
        mags = np.abs(np.linalg.eigvalsh(0.5 * (A + A.T)))
        small = min(small, float(np.min(mags)))
        large = max(large, float(np.max(mags)))
    if small <= EIGENVALUE_TOL:
        raise DegenerateEllipticityError(
            "a family matrix is singular: no positive ellipticity constant"
        )
    return EllipticityBounds(small, large)


def barrier_bounds(f1: IsaacsOperator, f2: IsaacsOperator) -> EllipticityBounds:
    """Ellipticity pair used to size the explicit quadratic barriers.

    The lower constant is min_i F_i(-I)/d: the exact response of each
    sup-inf family to the barrier's isotropic Hessian (positive
    homogeneity makes F_i(-cI) = c*F_i(-I), so the upper-barrier
    certificate holds with this constant and no slack).  The upper
    constant is the conservative eigenvalue bound over both families.
    """
    if f1.dim != f2.dim:
        raise ShapeError("operator dimensions differ")
    d = f1.dim
    minus_eye = -np.eye(d)
    lam = min(isaacs_eval(f1, minus_eye), isaacs_eval(f2, minus_eye)) / d
    if lam <= EIGENVALUE_TOL:
        raise DegenerateEllipticityError("family responds degenerately to -I")
    Lam = max(ellipticity_bounds(f1).Lam, ellipticity_bounds(f2).Lam)
    return EllipticityBounds(lam, max(lam, Lam))
