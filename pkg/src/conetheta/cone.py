"""Cone frames and the locally constant weight f.

A frame is a matrix C = (c_0 ... c_n) of n+1 vectors from one component of
the negative cone {Q < 0}.  For an m x n matrix U the sign data

    x_i = (-1)^i det(U^T A C_i-hat)      (C_i-hat = C with column i removed)

determines the weight

    f(U) = prod_i (1 + sgn x_i)/2  -  prod_i (1 - sgn x_i)/2,

which is nonzero exactly on the component where the x_i share a common sign
and are not all zero.  Every sign decision in this module is made in exact
rational arithmetic; there is deliberately no tolerance parameter, since f
is discontinuous precisely where some x_i vanishes.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from . import ratlin as rl
from .errors import DimensionMismatch, FrameError, LinearlyDependent
from .quadspace import QuadraticSpace, pair_form

# conservative shrink applied to the floating eigenvalue bound
_EIG_SAFETY = 1.0 - 1e-8


@dataclass(frozen=True)
class ConeFrame:
    """n+1 validated negative-cone vectors with cached Gram data."""

    space: QuadraticSpace
    C: rl.Mat  # m x (n+1), columns are the cone vectors
    n: int
    gram: rl.Mat  # (n+1) x (n+1) matrix of B(c_i, c_j)
    full_rank: bool

    @cached_property
    def columns(self) -> tuple[rl.Vec, ...]:
        return tuple(rl.col(self.C, i) for i in range(self.n + 1))

    @cached_property
    def C_float(self) -> np.ndarray:
        return rl.to_float(self.C)

    @cached_property
    def AC(self) -> rl.Mat:
        """A C, so that U^T (A C) gives all the vectors x_i at once."""
        return rl.matmul(self.space.A, self.C)


def validate_frame(space: QuadraticSpace, C, allow_rank_deficient: bool = False) -> ConeFrame:
    """Check all frame conditions exactly and return the frame.

    Collects every violated condition into a single FrameError rather than
    stopping at the first failure.  A rank-deficient frame (for which the
    weight f vanishes identically) may be admitted explicitly via
    allow_rank_deficient; all other conditions remain mandatory.
    """
    C = rl.mat(C)
    m, ncols = rl.shape(C)
    violations = []
    if m != space.m:
        raise DimensionMismatch(f"C must have {space.m} rows, got {m}")
    if ncols < 2:
        raise DimensionMismatch("C needs at least two columns")
    n = ncols - 1
    if not space.is_lorentzian:
        raise FrameError([("Signature", (), f"space has signature {space.sig}, need (m-1, 1)")])
    if n >= space.m:
        violations.append(("GenusTooLarge", (n,), f"genus n = {n} must be smaller than m = {space.m}"))
    cols = tuple(rl.col(C, i) for i in range(ncols))
    gram = tuple(tuple(space.B(ci, cj) for cj in cols) for ci in cols)
    for i in range(ncols):
        if gram[i][i] >= 0:
            violations.append(("NotInCone", (i,), f"Q(c_{i}) = {gram[i][i] / 2} is not negative"))
    for i, j in combinations(range(ncols), 2):
        if gram[i][j] >= 0:
            violations.append(
                ("MixedComponents", (i, j), f"B(c_{i}, c_{j}) = {gram[i][j]} is not negative")
            )
    full_rank = rl.rank(C) == ncols
    if not full_rank and not allow_rank_deficient:
        violations.append(("RankDeficient", (), "frame matrix does not have full rank"))
    if violations:
        raise FrameError(violations)
    return ConeFrame(space=space, C=C, n=n, gram=gram, full_rank=full_rank)


@dataclass(frozen=True)
class XData:
    """Exact sign data of a matrix U against a frame."""

    xvecs: tuple[rl.Vec, ...]  # x_i = U^T A c_i, each of length n
    x: tuple[Fraction, ...]  # the n+1 determinant scalars


def x_data(frame: ConeFrame, U) -> XData:
    U = rl.mat(U)
    m, n = rl.shape(U)
    if m != frame.space.m or n != frame.n:
        raise DimensionMismatch(f"U must be {frame.space.m} x {frame.n}")
    # U^T A C, whose columns are the vectors x_i
    W = rl.matmul(rl.transpose(U), frame.AC)
    xvecs = tuple(rl.col(W, i) for i in range(frame.n + 1))
    x = []
    for i in range(frame.n + 1):
        minor = rl.from_cols([xvecs[j] for j in range(frame.n + 1) if j != i])
        x.append((-1) ** i * rl.det(minor))
    return XData(xvecs=xvecs, x=tuple(x))


@dataclass(frozen=True)
class FValue:
    """Value of the locally constant weight at one matrix."""

    value: Fraction  # dyadic rational in [-1, 1]
    in_component: bool


def f_of_signs(signs) -> Fraction:
    plus = Fraction(1)
    minus = Fraction(1)
    for s in signs:
        plus *= Fraction(1 + s, 2)
        minus *= Fraction(1 - s, 2)
    return plus - minus


def f_value(frame: ConeFrame, U) -> FValue:
    xd = x_data(frame, U)
    signs = [(x > 0) - (x < 0) for x in xd.x]
    nonneg = all(s >= 0 for s in signs)
    nonpos = all(s <= 0 for s in signs)
    some = any(s != 0 for s in signs)
    return FValue(value=f_of_signs(signs), in_component=some and (nonneg or nonpos))


def _int_det(M) -> int:
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    if n == 3:
        return (
            M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
            - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
            + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
        )
    # fraction-free elimination keeps everything integral
    A = [list(row) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[-1][-1]


class FastSignEvaluator:
    """Sign data and f over a shifted lattice column by integer arithmetic.

    The signs of the x_i are invariant under positive rescalings of the
    frame columns and of the columns of U, so both are scaled integral once
    and all subsequent determinants are plain integer arithmetic.  Used in
    the theta summation hot loop; the exact rational x_i remain available
    through x_data.
    """

    def __init__(self, frame: ConeFrame, H=None):
        space = frame.space
        n = frame.n
        self.n = n
        Hm = rl.zeros(space.m, n) if H is None else rl.mat(H)
        if rl.shape(Hm) != (space.m, n):
            raise DimensionMismatch(f"H must be {space.m} x {n}")
        # frame columns scaled integral (positive factors only)
        ac_int = []
        for i in range(n + 1):
            ci = frame.columns[i]
            den = math.lcm(*(x.denominator for x in ci))
            aci = rl.matvec(space.A, tuple(x * den for x in ci))
            ac_int.append(tuple(int(x) for x in aci))
        self.ac = ac_int
        # lattice shift scaled integral per column of U
        self.dens = []
        self.hnum = []
        for j in range(n):
            den = math.lcm(*(Hm[i][j].denominator for i in range(space.m)))
            self.dens.append(den)
            self.hnum.append(tuple(int(Hm[i][j] * den) for i in range(space.m)))

    def signs(self, offsets):
        n = self.n
        ucols = [
            tuple(a * d + h for a, h in zip(col, hn))
            for col, d, hn in zip(offsets, (self.dens[j] for j in range(n)), self.hnum)
        ]
        W = [[sum(u * a for u, a in zip(ucols[j], self.ac[i])) for i in range(n + 1)] for j in range(n)]
        signs = []
        for i in range(n + 1):
            minor = [[W[r][c] for c in range(n + 1) if c != i] for r in range(n)]
            d = _int_det(minor)
            if i % 2:
                d = -d
            signs.append((d > 0) - (d < 0))
        return signs

    def f(self, offsets) -> Fraction:
        return f_of_signs(self.signs(offsets))

    def f_batch(self, offsets: np.ndarray) -> np.ndarray:
        """Vectorized f over an integer offset array of shape (T, n, m).

        Computes the sign determinants in int64; falls back to exact python
        integers when the intermediate magnitudes could overflow.  The
        returned dyadic values are exact in floating point.
        """
        n = self.n
        T = offsets.shape[0]
        if T == 0:
            return np.zeros(0)
        U = offsets.astype(np.int64) * np.array(self.dens, dtype=np.int64)[None, :, None]
        U = U + np.array(self.hnum, dtype=np.int64)[None, :, :]
        AC = np.array(self.ac, dtype=np.int64).T  # (m, n+1)
        W = U @ AC  # (T, n, n+1); W[t, j, i] = u_j . A c_i
        wmax = int(np.max(np.abs(W))) if W.size else 0
        # n+1 minors of size n: products of n entries plus additions
        if wmax**n * math.factorial(n) >= 2**62 or n > 3:
            out = np.empty(T)
            for t in range(T):
                out[t] = float(self.f(tuple(tuple(int(x) for x in col) for col in offsets[t])))
            return out
        signs = np.empty((T, n + 1), dtype=np.int64)
        cols = list(range(n + 1))
        for i in range(n + 1):
            keep = [c for c in cols if c != i]
            M = W[:, :, keep]
            if n == 1:
                d = M[:, 0, 0]
            elif n == 2:
                d = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
            else:
                d = (
                    M[:, 0, 0] * (M[:, 1, 1] * M[:, 2, 2] - M[:, 1, 2] * M[:, 2, 1])
                    - M[:, 0, 1] * (M[:, 1, 0] * M[:, 2, 2] - M[:, 1, 2] * M[:, 2, 0])
                    + M[:, 0, 2] * (M[:, 1, 0] * M[:, 2, 1] - M[:, 1, 1] * M[:, 2, 0])
                )
            if i % 2:
                d = -d
            signs[:, i] = np.sign(d)
        plus = np.prod((1.0 + signs) / 2.0, axis=1)
        minus = np.prod((1.0 - signs) / 2.0, axis=1)
        return plus - minus


def independent_pairs(frame: ConeFrame):
    """Index pairs (k, l) whose columns are linearly independent."""
    out = []
    for k, l in combinations(range(frame.n + 1), 2):
        denom = frame.gram[k][k] * frame.gram[l][l] - frame.gram[k][l] ** 2
        if denom != 0:
            out.append((k, l))
    return out


def enum_bound(frame: ConeFrame) -> float:
    """Positive lower bound lambda* with Q(u_j) >= lambda* |u_j|^2 on the support of f.

    Minimum over independent column pairs of the smallest eigenvalue of the
    pair form Q+_{k,l}; any column of a matrix in the support admits such a
    pair bounding Q from below.  The eigenvalue comes from a floating solver
    and is shrunk by 1e-8 so the result stays a valid bound.
    """
    pairs = independent_pairs(frame)
    if not pairs:
        raise LinearlyDependent("frame has no linearly independent column pair")
    best = min(
        pair_form(frame.space, frame.columns[k], frame.columns[l], k, l).smallest_eigenvalue
        for k, l in pairs
    )
    return best * _EIG_SAFETY
