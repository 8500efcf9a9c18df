"""Quadratic spaces of Lorentzian signature and their semi-definite splittings.

The central object is an even symmetric non-degenerate integer matrix A with
one negative eigendirection.  A vector c with Q(c) < 0 splits A into a rank-1
negative semi-definite piece A- = A c c^T A / (2 Q(c)) and its positive
semi-definite complement A+ = A - A-, with majorant M = A+ - A-.  All of the
structural data here is exact rational; floating point enters only in the
theta summation and cubature modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import ratlin as rl
from .errors import (
    DimensionMismatch,
    LinearlyDependent,
    NonSymmetric,
    NotInCone,
    NotNegativeVector,
    SignatureError,
    Singular,
)


def signature(A) -> tuple[int, int]:
    """Counts of positive and negative eigenvalues of a symmetric matrix.

    Computed by exact congruence inertia, so no floating tolerance is
    involved.  Raises Singular if the matrix is degenerate.
    """
    A = rl.mat(A)
    if not rl.is_symmetric(A):
        raise NonSymmetric("signature requires a symmetric matrix")
    pos, neg, zero = rl.inertia(A)
    if zero:
        raise Singular("matrix is singular")
    return pos, neg


@dataclass(frozen=True)
class QuadraticSpace:
    """An even symmetric non-degenerate integer matrix with its forms.

    Carries Q(u) = u^T A u / 2 on vectors, the bilinear form B(u, v) = u^T A v
    and the trace form QQ(U) = tr(U^T A U) / 2 on m x n matrices.
    """

    A: rl.Mat
    m: int
    sig: tuple[int, int]

    @cached_property
    def A_float(self) -> np.ndarray:
        return rl.to_float(self.A)

    @cached_property
    def det(self) -> Fraction:
        return rl.det(self.A)

    @property
    def is_lorentzian(self) -> bool:
        return self.sig == (self.m - 1, 1)

    def Q(self, u) -> Fraction:
        u = rl.vec(u)
        return rl.dot(u, rl.matvec(self.A, u)) / 2

    def B(self, u, v) -> Fraction:
        return rl.dot(rl.vec(u), rl.matvec(self.A, rl.vec(v)))

    def gram(self, U) -> rl.Mat:
        """U^T A U for an m x n matrix U, exact."""
        U = rl.mat(U)
        if rl.shape(U)[0] != self.m:
            raise DimensionMismatch(f"expected {self.m} rows, got {rl.shape(U)[0]}")
        return rl.matmul(rl.transpose(U), rl.matmul(self.A, U))

    def QQ(self, U) -> Fraction:
        G = self.gram(U)
        return sum(G[j][j] for j in range(len(G))) / 2


def quadratic_space(A) -> QuadraticSpace:
    """Validate and wrap an even symmetric non-degenerate integer matrix."""
    A = rl.mat(A)
    r, c = rl.shape(A)
    if r != c:
        raise DimensionMismatch("A must be square")
    if not rl.is_symmetric(A):
        raise NonSymmetric("A must be symmetric")
    if not rl.all_integer(A):
        raise ValueError("A must have integer entries")
    for i in range(r):
        if A[i][i] % 2 != 0:
            raise ValueError(f"diagonal entry A[{i}][{i}] = {A[i][i]} must be even")
    sig = signature(A)
    return QuadraticSpace(A=A, m=r, sig=sig)


@dataclass(frozen=True)
class SplitData:
    """Splitting of A along a negative vector c.

    A_minus = A c c^T A / (2 Q(c)) is negative semi-definite, A_plus is the
    positive semi-definite complement and M = A_plus - A_minus is the
    positive definite majorant (certified by exact LDL^T at construction).
    """

    space: QuadraticSpace
    c: rl.Vec
    A_minus: rl.Mat
    A_plus: rl.Mat
    M: rl.Mat

    @cached_property
    def M_float(self) -> np.ndarray:
        return rl.to_float(self.M)

    @cached_property
    def qc(self) -> Fraction:
        return self.space.Q(self.c)

    def q_minus(self, U) -> Fraction:
        """tr(U^T A- U) / 2, which is <= 0 for every U."""
        U = rl.mat(U)
        G = rl.matmul(rl.transpose(U), rl.matmul(self.A_minus, U))
        return sum(G[j][j] for j in range(len(G))) / 2

    def q_plus(self, U) -> Fraction:
        U = rl.mat(U)
        G = rl.matmul(rl.transpose(U), rl.matmul(self.A_plus, U))
        return sum(G[j][j] for j in range(len(G))) / 2


def split(space: QuadraticSpace, c) -> SplitData:
    """Split A into semi-definite parts along a vector with Q(c) < 0."""
    if not space.is_lorentzian:
        raise SignatureError(f"splitting requires signature (m-1, 1), got {space.sig}")
    c = rl.vec(c)
    if len(c) != space.m:
        raise DimensionMismatch(f"c must have length {space.m}")
    qc = space.Q(c)
    if qc >= 0:
        raise NotNegativeVector(f"Q(c) = {qc} must be negative")
    Ac = rl.matvec(space.A, c)
    A_minus = rl.mat_scale(Fraction(1, 2) / qc, rl.outer(Ac, Ac))
    A_plus = rl.mat_sub(space.A, A_minus)
    M = rl.mat_sub(A_plus, A_minus)
    if not rl.is_positive_definite(M):
        # cannot happen in signature (m-1, 1); kept as a hard guard
        raise SignatureError("majorant A+ - A- is not positive definite")
    return SplitData(space=space, c=c, A_minus=A_minus, A_plus=A_plus, M=M)


def project(sd: SplitData, U):
    """Decompose U = U_perp + U_c with U_c columnwise parallel to c.

    Each column satisfies u^c = (B(c, u) / 2Q(c)) c, and B(c, u_perp) = 0.
    """
    U = rl.mat(U)
    r, n = rl.shape(U)
    if r != sd.space.m:
        raise DimensionMismatch(f"U must have {sd.space.m} rows")
    Ac = rl.matvec(sd.space.A, sd.c)
    cols_perp = []
    cols_c = []
    for j in range(n):
        u = rl.col(U, j)
        coeff = rl.dot(Ac, u) / (2 * sd.qc)
        uc = tuple(coeff * x for x in sd.c)
        cols_c.append(uc)
        cols_perp.append(tuple(a - b for a, b in zip(u, uc)))
    return rl.from_cols(cols_perp), rl.from_cols(cols_c)


@dataclass(frozen=True)
class PairForm:
    """Positive definite form attached to two independent negative vectors.

    Q+_{k,l}(v) = Q(v) + B(c_k,c_l) B(c_k,v) B(c_l,v) / (4 Q(c_k) Q(c_l) - B(c_k,c_l)^2),
    represented by the symmetric matrix G with Q+_{k,l}(v) = v^T G v.
    """

    k: int
    l: int
    G: rl.Mat

    @cached_property
    def G_float(self) -> np.ndarray:
        return rl.to_float(self.G)

    def value(self, v) -> Fraction:
        v = rl.vec(v)
        return rl.dot(v, rl.matvec(self.G, v))

    @cached_property
    def smallest_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.G_float)[0])


def pair_form(space: QuadraticSpace, ck, cl, k: int = 0, l: int = 1) -> PairForm:
    """Build Q+_{k,l} for two linearly independent vectors in the cone."""
    ck = rl.vec(ck)
    cl = rl.vec(cl)
    qk, ql = space.Q(ck), space.Q(cl)
    if qk >= 0 or ql >= 0:
        raise NotNegativeVector("both vectors must satisfy Q < 0")
    bkl = space.B(ck, cl)
    denom = 4 * qk * ql - bkl * bkl
    if denom == 0:
        raise LinearlyDependent("pair form needs linearly independent vectors")
    if bkl >= 0:
        raise NotInCone("vectors lie in opposite components of the negative cone")
    Ack = rl.matvec(space.A, ck)
    Acl = rl.matvec(space.A, cl)
    cross = rl.mat_add(rl.outer(Ack, Acl), rl.outer(Acl, Ack))
    G = rl.mat_add(rl.mat_scale(Fraction(1, 2), space.A), rl.mat_scale(bkl / denom / 2, cross))
    if not rl.is_positive_definite(G):
        # excluded by Lorentzian reverse Cauchy-Schwarz; hard guard only
        raise SignatureError("pair form failed its positive definiteness certificate")
    return PairForm(k=k, l=l, G=G)
