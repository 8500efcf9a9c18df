"""Exact rational linear algebra on small dense matrices.

Matrices are immutable tuples of row tuples holding ``fractions.Fraction``
entries; vectors are flat tuples.  Everything here is exact: determinants,
inverses, Sylvester inertia, positive-definiteness certificates and the
Smith normal form never touch floating point.  The scale is small (m <= 6
or so), so the quadratic/cubic loops are written plainly.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np

from .errors import DimensionMismatch, NonSymmetric, Singular

Mat = tuple
Vec = tuple


def frac(x) -> Fraction:
    """Coerce an int, string "p/q", float or Fraction to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {x!r} to a rational number")


def vec(entries) -> Vec:
    return tuple(frac(x) for x in entries)


def mat(rows) -> Mat:
    out = tuple(tuple(frac(x) for x in row) for row in rows)
    if out and any(len(row) != len(out[0]) for row in out):
        raise DimensionMismatch("ragged matrix")
    return out


def shape(M) -> tuple[int, int]:
    return (len(M), len(M[0]) if M else 0)


def zeros(r, c) -> Mat:
    z = Fraction(0)
    return tuple(tuple(z for _ in range(c)) for _ in range(r))


def identity(n) -> Mat:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))


def transpose(M) -> Mat:
    return tuple(zip(*M)) if M else ()


def mat_add(A, B) -> Mat:
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_sub(A, B) -> Mat:
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_scale(s, A) -> Mat:
    s = frac(s)
    return tuple(tuple(s * a for a in row) for row in A)


def matmul(A, B) -> Mat:
    ra, ca = shape(A)
    rb, cb = shape(B)
    if ca != rb:
        raise DimensionMismatch(f"cannot multiply {ra}x{ca} by {rb}x{cb}")
    Bt = transpose(B)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in Bt) for row in A)


def matvec(A, v) -> Vec:
    if shape(A)[1] != len(v):
        raise DimensionMismatch("matrix/vector size mismatch")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in A)


def dot(u, v) -> Fraction:
    if len(u) != len(v):
        raise DimensionMismatch("vector size mismatch")
    return sum(x * y for x, y in zip(u, v))


def outer(u, v) -> Mat:
    return tuple(tuple(x * y for y in v) for x in u)


def col(M, j) -> Vec:
    return tuple(row[j] for row in M)


def from_cols(cols) -> Mat:
    return transpose(tuple(tuple(c) for c in cols))


def is_symmetric(M) -> bool:
    r, c = shape(M)
    return r == c and all(M[i][j] == M[j][i] for i in range(r) for j in range(i))


def to_float(M) -> np.ndarray:
    a = np.array([[float(x) for x in row] for row in M], dtype=float)
    a.setflags(write=False)
    return a


def det(M) -> Fraction:
    """Determinant by exact fraction Gaussian elimination."""
    n, c = shape(M)
    if n != c:
        raise DimensionMismatch("determinant of non-square matrix")
    A = [list(row) for row in M]
    sign = 1
    d = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        d *= A[k][k]
        inv = 1 / A[k][k]
        for i in range(k + 1, n):
            if A[i][k]:
                f = A[i][k] * inv
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
    return sign * d


def rank(M) -> int:
    r, c = shape(M)
    A = [list(row) for row in M]
    rk = 0
    row_pos = 0
    for k in range(c):
        piv = next((i for i in range(row_pos, r) if A[i][k] != 0), None)
        if piv is None:
            continue
        A[row_pos], A[piv] = A[piv], A[row_pos]
        inv = 1 / A[row_pos][k]
        for i in range(row_pos + 1, r):
            if A[i][k]:
                f = A[i][k] * inv
                for j in range(k, c):
                    A[i][j] -= f * A[row_pos][j]
        rk += 1
        row_pos += 1
        if row_pos == r:
            break
    return rk


def inverse(M) -> Mat:
    n, c = shape(M)
    if n != c:
        raise DimensionMismatch("inverse of non-square matrix")
    A = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(M)]
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            raise Singular("matrix is singular")
        A[k], A[piv] = A[piv], A[k]
        inv = 1 / A[k][k]
        A[k] = [x * inv for x in A[k]]
        for i in range(n):
            if i != k and A[i][k]:
                f = A[i][k]
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return tuple(tuple(row[n:]) for row in A)


def inertia(M) -> tuple[int, int, int]:
    """Counts (pos, neg, zero) of eigenvalue signs of a symmetric matrix.

    Works by exact congruence reduction: diagonal pivots contribute their
    sign directly; when the active diagonal is all zero, a nonzero
    off-diagonal entry spans a hyperbolic 2x2 block contributing (1, 1).
    Congruence preserves inertia (Sylvester), so the counts are exact.
    """
    if not is_symmetric(M):
        raise NonSymmetric("inertia requires a symmetric matrix")
    n = len(M)
    A = [[frac(x) for x in row] for row in M]
    pos = neg = zero = 0
    active = list(range(n))
    while active:
        p = next((i for i in active if A[i][i] != 0), None)
        if p is not None:
            d = A[p][p]
            if d > 0:
                pos += 1
            else:
                neg += 1
            active.remove(p)
            for i in active:
                if A[i][p]:
                    f = A[i][p] / d
                    for j in active:
                        A[i][j] -= f * A[p][j]
            continue
        pq = next(((i, j) for i in active for j in active if i != j and A[i][j] != 0), None)
        if pq is None:
            zero += len(active)
            break
        p, q = pq
        b = A[p][q]
        pos += 1
        neg += 1
        active.remove(p)
        active.remove(q)
        for i in active:
            aip, aiq = A[i][p], A[i][q]
            if aip or aiq:
                for j in active:
                    A[i][j] -= (aip * A[q][j] + aiq * A[p][j]) / b
    return pos, neg, zero


def ldl(M):
    """Exact LDL^T of a symmetric positive definite matrix.

    Returns (L, D) with L unit lower triangular and D the pivot list, so
    that M = L diag(D) L^T.  Returns None as soon as a pivot fails to be
    strictly positive, which certifies that M is not positive definite.
    """
    if not is_symmetric(M):
        raise NonSymmetric("ldl requires a symmetric matrix")
    n = len(M)
    L = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    D = [Fraction(0)] * n
    for j in range(n):
        d = M[j][j] - sum(L[j][k] * L[j][k] * D[k] for k in range(j))
        if d <= 0:
            return None
        D[j] = d
        for i in range(j + 1, n):
            s = M[i][j] - sum(L[i][k] * L[j][k] * D[k] for k in range(j))
            L[i][j] = s / d
    return tuple(tuple(row) for row in L), tuple(D)


def is_positive_definite(M) -> bool:
    return ldl(M) is not None


def smith_normal_form(A):
    """Smith normal form of an integer matrix.

    Returns (D, P, Q) with P, Q unimodular and D = P A Q diagonal with
    non-negative entries satisfying the divisibility chain.
    """
    n, m = shape(A)
    M = [[int(x) for x in row] for row in A]
    if any(Fraction(x).denominator != 1 for row in A for x in row):
        raise ValueError("smith_normal_form requires integer entries")
    P = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Q = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        for row in Q:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):
        M[dst] = [a + k * b for a, b in zip(M[dst], M[src])]
        P[dst] = [a + k * b for a, b in zip(P[dst], P[src])]

    def add_col(src, dst, k):
        for row in M:
            row[dst] += k * row[src]
        for row in Q:
            row[dst] += k * row[src]

    def scale_row(i, s):
        M[i] = [s * a for a in M[i]]
        P[i] = [s * a for a in P[i]]

    t = 0
    while t < min(n, m):
        if all(M[i][j] == 0 for i in range(t, n) for j in range(t, m)):
            break
        # move a smallest nonzero entry to the (t, t) corner
        i0, j0 = min(
            ((i, j) for i in range(t, n) for j in range(t, m) if M[i][j] != 0),
            key=lambda ij: abs(M[ij[0]][ij[1]]),
        )
        swap_rows(t, i0)
        swap_cols(t, j0)
        dirty = False
        for i in range(t + 1, n):
            if M[i][t]:
                q, r = divmod(M[i][t], M[t][t])
                add_row(t, i, -q)
                if r:
                    dirty = True
        for j in range(t + 1, m):
            if M[t][j]:
                q, r = divmod(M[t][j], M[t][t])
                add_col(t, j, -q)
                if r:
                    dirty = True
        if dirty or any(M[i][t] for i in range(t + 1, n)) or any(M[t][j] for j in range(t + 1, m)):
            continue
        # enforce divisibility of the remaining block by the pivot
        bad = next(
            ((i, j) for i in range(t + 1, n) for j in range(t + 1, m) if M[i][j] % M[t][t] != 0),
            None,
        )
        if bad is not None:
            add_row(bad[0], t, 1)
            continue
        if M[t][t] < 0:
            scale_row(t, -1)
        t += 1
    D = tuple(tuple(Fraction(M[i][j]) for j in range(m)) for i in range(n))
    Pm = tuple(tuple(Fraction(x) for x in row) for row in P)
    Qm = tuple(tuple(Fraction(x) for x in row) for row in Q)
    return D, Pm, Qm


def all_integer(M) -> bool:
    return all(x.denominator == 1 for row in M for x in row)


def frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def rational_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def enumerate_grid(bounds):
    """Iterate integer tuples a with lo_i <= a_i <= hi_i, lexicographically."""
    ranges = [range(lo, hi + 1) for lo, hi in bounds]
    return product(*ranges)
