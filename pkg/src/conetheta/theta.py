"""Lattice enumeration and truncated theta sums.

Theta series over shifted lattices H + Z^{m x n},

    theta_p(Z) = sum_U p(U Y^{1/2}) exp(pi i tr(U^T A U Z) + 2 pi i tr(K^T A U)),

with p either the exact locally constant weight f or the Gaussian simplex
kernel g.  Truncation is operative: the enumeration radius doubles until the
partial sum moves by less than eps/10, and the last change is reported as the
tail certificate.  Lattice points inside majorant ellipsoids are enumerated
per column (Fincke-Pohst recursion on an exact LDL^T), combined cartesianly
and kept by an exact final test, so boundary points are never lost to
floating-point rounding.  Sums run in a fixed lexicographic order through
math.fsum, which makes every value reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import ratlin as rl
from .cone import ConeFrame, FastSignEvaluator, enum_bound, f_value
from .errors import (
    ConeThetaError,
    CubatureBudgetExceeded,
    DimensionMismatch,
    RadiusTooLarge,
)
from .quadspace import QuadraticSpace, split
from .simplex import SimplexChart, g_value, simplex_chart

_EPS_FLOOR = 1e-10
_MAJORANT_SAFETY = 0.9
_MAX_DOUBLINGS = 30


@dataclass(frozen=True)
class Characteristics:
    """Rational lattice shift H and phase shift K, both m x n."""

    H: rl.Mat
    K: rl.Mat


def characteristics(space: QuadraticSpace, n: int, H=None, K=None) -> Characteristics:
    Hm = rl.zeros(space.m, n) if H is None else rl.mat(H)
    Km = rl.zeros(space.m, n) if K is None else rl.mat(K)
    for name, M in (("H", Hm), ("K", Km)):
        if rl.shape(M) != (space.m, n):
            raise DimensionMismatch(f"{name} must be {space.m} x {n}, got {rl.shape(M)}")
    return Characteristics(H=Hm, K=Km)


@dataclass(frozen=True)
class SiegelPoint:
    """Z = X + iY with Y positive definite and its symmetric square root."""

    X: np.ndarray
    Y: np.ndarray
    Yhalf: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @cached_property
    def Z(self) -> np.ndarray:
        return self.X + 1j * self.Y

    @cached_property
    def ymin(self) -> float:
        return float(np.linalg.eigvalsh(self.Y)[0])


def siegel_point(X, Y) -> SiegelPoint:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionMismatch("X and Y must be square matrices of equal size")
    scale = max(1.0, float(np.max(np.abs(X))), float(np.max(np.abs(Y))))
    if float(np.max(np.abs(X - X.T))) > 1e-12 * scale:
        raise ConeThetaError("X is not symmetric")
    if float(np.max(np.abs(Y - Y.T))) > 1e-12 * scale:
        raise ConeThetaError("Y is not symmetric")
    w, V = np.linalg.eigh(Y)
    if w[0] <= 0:
        raise ConeThetaError(f"Y is not positive definite (smallest eigenvalue {w[0]})")
    Yhalf = (V * np.sqrt(w)) @ V.T
    Yhalf = 0.5 * (Yhalf + Yhalf.T)
    if float(np.max(np.abs(Yhalf @ Yhalf - Y))) > 1e-10 * scale:
        raise ConeThetaError("square root of Y failed its certificate")
    for a in (X, Y, Yhalf):
        a.setflags(write=False)
    return SiegelPoint(X=X, Y=Y, Yhalf=Yhalf)


def siegel_from_complex(Z) -> SiegelPoint:
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1)
    return siegel_point(Z.real.copy(), Z.imag.copy())


@dataclass(frozen=True)
class ThetaValue:
    """A truncated theta sum with its tail certificate."""

    value: complex
    tail_bound: float
    radius: float
    terms: int


# ---------------------------------------------------------------------------
# Lattice point enumeration
# ---------------------------------------------------------------------------


def enumerate_ellipsoid(M, h, r, cap: float = 1e8):
    """Integer a with (a + h)^T M (a + h) <= r, sorted lexicographically.

    M is an exact rational positive definite matrix and h a rational shift.
    Interval bounds come from the exact LDL^T factors evaluated in floating
    point with a widening slack; every candidate is then kept or dropped by
    an exact rational comparison, so points on the boundary are included.
    """
    M = rl.mat(M)
    m = len(M)
    h = rl.vec(h)
    if len(h) != m:
        raise DimensionMismatch("shift length does not match matrix size")
    if r < 0:
        return []
    fact = rl.ldl(M)
    if fact is None:
        raise ConeThetaError("enumeration matrix is not positive definite")
    L, D = fact
    Lf = [[float(x) for x in row] for row in L]
    Df = [float(x) for x in D]
    hf = [float(x) for x in h]
    slack = 1e-9 * (1.0 + abs(r))
    Minv_diag = [float(rl.inverse(M)[i][i]) for i in range(m)]
    est = 1.0
    for i in range(m):
        est *= 2.0 * math.sqrt(max(r, 0.0) * Minv_diag[i]) + 1.0
    if est > cap:
        raise RadiusTooLarge(f"projected ellipsoid count {est:.3g} exceeds cap {cap:.3g}")

    out = []
    a = [0] * m

    def rec(i, rem):
        if i < 0:
            cand = tuple(a)
            x = tuple(Fraction(ai) + hi for ai, hi in zip(cand, h))
            q = rl.dot(x, rl.matvec(M, x))
            if q <= r:
                out.append(cand)
            return
        # y_i = (a_i + h_i) + sum_{j > i} L_ji (a_j + h_j)
        c = sum(Lf[j][i] * (a[j] + hf[j]) for j in range(i + 1, m))
        if rem < -slack:
            return
        b = math.sqrt(max(rem, 0.0) / Df[i]) * (1.0 + 1e-12) + 1e-9
        lo = math.ceil(-b - c - hf[i] - 1e-12)
        hi = math.floor(b - c - hf[i] + 1e-12)
        for ai in range(lo, hi + 1):
            a[i] = ai
            y = ai + hf[i] + c
            rec(i - 1, rem - Df[i] * y * y)
        a[i] = 0

    rec(m - 1, r + slack)
    out.sort()
    return out


def enumerate_lattice(
    space: QuadraticSpace,
    Y,
    H=None,
    R: float = 1.0,
    majorant=None,
    lambda_star: float | None = None,
    cap: float = 1e8,
):
    """Shifted lattice matrices U = H + N inside the truncation region.

    With a positive definite majorant: all U with tr(U^T M U Y) <= R,
    obtained by per-column ellipsoid enumeration, cartesian combination and
    an exact total test.  With a cone bound lambda*: all U whose columns
    satisfy 2 lambda* lambda_min(Y) |u_j|^2 <= R, which covers every term of
    the f-weighted series with magnitude >= exp(-pi R).  Results are sorted
    lexicographically by the integer offsets.
    """
    offsets, hcols = _enumerate_offsets(
        space, Y, H=H, R=R, majorant=majorant, lambda_star=lambda_star, cap=cap
    )
    return [_mat_from_offsets(offs, hcols) for offs in offsets]


def _mat_from_offsets(offsets, hcols) -> rl.Mat:
    cols = [
        tuple(Fraction(ai) + hi for ai, hi in zip(col, hj)) for col, hj in zip(offsets, hcols)
    ]
    return rl.from_cols(cols)


def _enumerate_offsets(space, Y, H, R, majorant, lambda_star, cap):
    if (majorant is None) == (lambda_star is None):
        raise ValueError("pass exactly one of majorant or lambda_star")
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    Hm = rl.zeros(space.m, n) if H is None else rl.mat(H)
    if rl.shape(Hm) != (space.m, n):
        raise DimensionMismatch(f"H must be {space.m} x {n}")
    ymin = float(np.linalg.eigvalsh(Y)[0])
    hcols = [rl.col(Hm, j) for j in range(n)]

    if majorant is not None:
        M = rl.mat(majorant)
        r_col = R / ymin
    else:
        if lambda_star <= 0:
            raise ConeThetaError("lambda_star must be positive")
        M = rl.identity(space.m)
        r_col = R / (2.0 * lambda_star * ymin)
    per_col = [enumerate_ellipsoid(M, hj, r_col, cap=cap) for hj in hcols]

    total = 1.0
    for pts in per_col:
        total *= max(len(pts), 1)
    if total > cap:
        raise RadiusTooLarge(f"projected term count {total:.3g} exceeds cap {cap:.3g}")

    out = _combine_columns(per_col, hcols, rl.to_float(M), Y, R, exact_test=majorant is not None)
    return out, hcols


def _combine_columns(per_col, hcols, Mf, Y, R, exact_test):
    """Cartesian combination of per-column points with the total trace test.

    The test tr(U^T M U Y) <= R expands over column pairs as
    sum_{j,k} Y_jk u_j^T M u_k; the genus 1 and 2 cases are vectorized.
    """
    n = len(per_col)
    if not exact_test:
        out = []

        def build(j, cols):
            if j == n:
                out.append(tuple(cols))
                return
            for a in per_col[j]:
                build(j + 1, cols + [a])

        build(0, [])
        return out
    Xs = []
    for j, pts in enumerate(per_col):
        hj = np.array([float(x) for x in hcols[j]])
        Xs.append(np.array(pts, dtype=float).reshape(len(pts), len(hj)) + hj)
    Qs = [np.einsum("ai,ij,aj->a", X, Mf, X) for X in Xs]
    if n == 1:
        mask = Y[0, 0] * Qs[0] <= R
        return [(per_col[0][i],) for i in np.nonzero(mask)[0]]
    if n == 2:
        out = []
        MX1 = Xs[1] @ Mf.T  # (N1, m)
        for i0 in range(len(per_col[0])):
            cross = MX1 @ Xs[0][i0]
            tr = Y[0, 0] * Qs[0][i0] + Y[1, 1] * Qs[1] + 2.0 * Y[0, 1] * cross
            for i1 in np.nonzero(tr <= R)[0]:
                out.append((per_col[0][i0], per_col[1][i1]))
        return out
    out = []

    def build(j, cols, idx):
        if j == n:
            Uf = np.array([Xs[a][idx[a]] for a in range(n)]).T
            tr = float(np.einsum("ij,ik,kl,jl->", Uf, Mf, Uf, Y, optimize=True))
            if tr <= R:
                out.append(tuple(cols))
            return
        for i, a in enumerate(per_col[j]):
            build(j + 1, cols + [a], idx + [i])

    build(0, [], [])
    return out


# ---------------------------------------------------------------------------
# Theta sums
# ---------------------------------------------------------------------------


def _phase_traces(Af: np.ndarray, pt: SiegelPoint, Uf: np.ndarray):
    """(Re, Im) of tr(U^T A U Z) for one lattice matrix."""
    S = Uf.T @ Af @ Uf
    return float(np.sum(S * pt.X)), float(np.sum(S * pt.Y))


class _LatticePhase:
    """Exact evaluation of tr(K^T A U) mod 1 over U = H + N.

    Uses tr(K^T A U) = sum_ij (A K)_ij U_ij, split into the constant H part
    and an integer combination of the exact weights (A K)_ij.
    """

    def __init__(self, space: QuadraticSpace, K, H, n: int):
        if K is None:
            self.W = None
            self.const = Fraction(0)
            return
        K = rl.mat(K)
        self.W = rl.matmul(space.A, K)
        Hm = rl.zeros(space.m, n) if H is None else rl.mat(H)
        self.const = rl.frac_part(
            sum(self.W[i][j] * Hm[i][j] for i in range(space.m) for j in range(n))
        )

    def at(self, offsets) -> float:
        if self.W is None:
            return 0.0
        tot = self.const
        for j, col in enumerate(offsets):
            for i, a in enumerate(col):
                if a:
                    tot += self.W[i][j] * a
        return float(rl.frac_part(tot))


def _term(weight: float, re: float, im: float, q: float) -> complex:
    """weight * exp(pi i (re + i im)) * exp(2 pi i q), computed in log scale."""
    if weight == 0.0:
        return 0.0 + 0.0j
    lm = math.log(abs(weight)) - math.pi * im
    if lm < -745.0:
        return 0.0 + 0.0j
    if lm > 60.0:
        raise ConeThetaError("theta term overflow; enumeration region inconsistent")
    mag = math.exp(lm)
    ang = math.pi * re + 2.0 * math.pi * q + (math.pi if weight < 0 else 0.0)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def _csum(terms) -> complex:
    terms = list(terms)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _initial_radius(eps: float) -> float:
    return max(6.0, math.log(10.0 / eps) / math.pi)


def theta_f(
    space: QuadraticSpace,
    frame: ConeFrame,
    H=None,
    K=None,
    Z: SiegelPoint | None = None,
    eps: float = 1e-8,
    radius: float | None = None,
    cap: float = 1e8,
) -> ThetaValue:
    """Truncated holomorphic theta sum with weight f.

    f(U Y^{1/2}) = f(U), so the weight is evaluated exactly at the rational
    lattice matrices.  The enumeration radius doubles until the sum changes
    by less than eps/10; the last change is reported as tail_bound.
    """
    eps = max(float(eps), _EPS_FLOOR)
    if not isinstance(Z, SiegelPoint):
        raise TypeError("Z must be a SiegelPoint")
    if not frame.full_rank:
        return ThetaValue(value=0j, tail_bound=0.0, radius=0.0, terms=0)
    lam = enum_bound(frame)
    Af = space.A_float
    phase = _LatticePhase(space, K, H, frame.n)
    weight = FastSignEvaluator(frame, H)
    hf_cache: dict = {}

    def partial(R):
        offsets, hcols = _enumerate_offsets(
            space, Z.Y, H=H, R=R, majorant=None, lambda_star=lam, cap=cap
        )
        if "hf" not in hf_cache:
            hf_cache["hf"] = np.array([[float(x) for x in hj] for hj in hcols]).T
        hf = hf_cache["hf"]
        if not offsets:
            return 0j, 0
        O = np.array(offsets, dtype=np.int64)  # (T, n, m)
        fvals = weight.f_batch(O)
        keep = np.nonzero(fvals)[0]
        Uf = O[keep].astype(float).transpose(0, 2, 1) + hf  # (Tk, m, n)
        S = np.einsum("tmi,mk,tkj->tij", Uf, Af, Uf)
        res = np.einsum("tij,ij->t", S, Z.X)
        ims = np.einsum("tij,ij->t", S, Z.Y)
        terms = [
            _term(float(fvals[t]), float(res[k]), float(ims[k]), phase.at(offsets[t]))
            for k, t in enumerate(keep)
        ]
        return _csum(terms), len(offsets)

    if radius is not None:
        val, count = partial(radius)
        ref, _ = partial(radius / 2.0)
        return ThetaValue(value=val, tail_bound=abs(val - ref), radius=radius, terms=count)

    R = _initial_radius(eps)
    prev, _ = partial(R)
    for _ in range(_MAX_DOUBLINGS):
        R *= 2.0
        cur, count = partial(R)
        change = abs(cur - prev)
        if change < eps / 10.0:
            return ThetaValue(value=cur, tail_bound=change, radius=R, terms=count)
        prev = cur
    raise RadiusTooLarge("doubling criterion did not converge")


def _sampled_majorants(space: QuadraticSpace, frame: ConeFrame):
    """Majorant matrices at the frame vertices and the barycenter."""
    cols = frame.columns
    nv = len(cols)
    samples = list(cols)
    samples.append(tuple(sum(c[i] for c in cols) / nv for i in range(space.m)))
    return [split(space, c).M_float for c in samples]


def _majorant_floor(space: QuadraticSpace, frame: ConeFrame) -> float:
    """Enumeration constant for the g-weighted series.

    Smallest majorant eigenvalue across the splitting-vector samples,
    shrunk by a safety factor; terms then decay at least like
    exp(-pi kappa tr(U^T U Y)) up to the polynomial factor, with the
    doubling criterion as the operative stop.
    """
    lam = min(float(np.linalg.eigvalsh(M)[0]) for M in _sampled_majorants(space, frame))
    return _MAJORANT_SAFETY * lam


def theta_g(
    space: QuadraticSpace,
    frame: ConeFrame,
    H=None,
    K=None,
    Z: SiegelPoint | None = None,
    eps: float = 1e-8,
    rule: str = "gm:7",
    cap: float = 1e8,
    budget: float = 2e8,
    threads: int = 1,
    kernel_cache: dict | None = None,
) -> ThetaValue:
    """Truncated modular theta sum with the Gaussian simplex kernel g.

    Each kernel value g(U Y^{1/2}) comes from cubature under the fixed
    chart; its tolerance is scaled by the term's exponential weight so that
    cheap low-accuracy evaluations suffice far out in the lattice.  A
    kernel_cache dict may be shared between calls at the same Y (the kernel
    depends on U Y^{1/2} only); keys are the raw bytes of that product.
    """
    eps = max(float(eps), _EPS_FLOOR)
    if not isinstance(Z, SiegelPoint):
        raise TypeError("Z must be a SiegelPoint")
    chart = simplex_chart(space, frame)
    kappa = _majorant_floor(space, frame)
    majorant_samples = _sampled_majorants(space, frame)
    M_enum = rl.mat_scale(Fraction(kappa), rl.identity(space.m))
    Af = space.A_float
    phase = _LatticePhase(space, K, H, frame.n)
    hf_cache: dict = {}
    cache: dict = {} if kernel_cache is None else kernel_cache
    spent = [0]

    def kernel(Uh, atol):
        # first-seen values are kept for good: recomputing at tighter
        # tolerances would leak cubature noise into the doubling criterion
        key = Uh.tobytes()
        hit = cache.get(key)
        if hit is not None:
            return hit
        res = g_value(chart, Uh, rule=rule, atol=atol)
        spent[0] += res.evaluations
        if spent[0] > budget:
            raise CubatureBudgetExceeded(
                f"cubature budget {budget:.3g} exhausted after {spent[0]} evaluations"
            )
        cache[key] = res.value
        return res.value

    def partial(R):
        offsets, hcols = _enumerate_offsets(
            space, Z.Y, H=H, R=R, majorant=M_enum, lambda_star=None, cap=cap
        )
        if "hf" not in hf_cache:
            hf_cache["hf"] = np.array([[float(x) for x in hj] for hj in hcols]).T
        hf = hf_cache["hf"]
        if not offsets:
            return 0j, 0
        O = np.array(offsets, dtype=float).transpose(0, 2, 1) + hf  # (T, m, n)
        S = np.einsum("tmi,mk,tkj->tij", O, Af, O)
        res = np.einsum("tij,ij->t", S, Z.X)
        ims = np.einsum("tij,ij->t", S, Z.Y)
        Uh = O @ Z.Yhalf  # (T, m, n)
        # kernel * phase is bounded by exp(-pi tr(U^T M_c U Y)) for every c
        # in the simplex; sampling c at the vertices and barycenter, terms
        # whose best sampled bound sits far below the sum's error allowance
        # cannot move it, so their cubature is skipped outright (polynomial
        # factors are covered by the margin; doubling backstops).
        quads = np.stack(
            [np.einsum("tmi,mk,tki->t", Uh, Mc, Uh) for Mc in majorant_samples]
        )
        exponent = math.pi * _MAJORANT_SAFETY * quads.min(axis=0)
        compute = np.nonzero(exponent < math.log(1e4 / eps))[0]
        todo = []
        for t in compute:
            atol = eps / 100.0 * math.exp(min(math.pi * float(ims[t]), 50.0))
            todo.append((int(t), min(max(atol, 1e-13), 1e-2)))
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as ex:
                done = list(ex.map(lambda p: kernel(Uh[p[0]], p[1]), todo))
        else:
            done = [kernel(Uh[t], atol) for t, atol in todo]
        gvals = np.zeros(len(offsets))
        for (t, _), g in zip(todo, done):
            gvals[t] = g
        terms = [
            _term(float(gvals[t]), float(res[t]), float(ims[t]), phase.at(offsets[t]))
            for t in range(len(offsets))
            if gvals[t] != 0.0
        ]
        return _csum(terms), len(offsets)

    R = _initial_radius(eps)
    prev, _ = partial(R)
    for _ in range(_MAX_DOUBLINGS):
        R *= 2.0
        cur, count = partial(R)
        change = abs(cur - prev)
        if change < eps / 10.0:
            return ThetaValue(value=cur, tail_bound=change, radius=R, terms=count)
        prev = cur
    raise RadiusTooLarge("doubling criterion did not converge")


# ---------------------------------------------------------------------------
# Discriminant cosets and Fourier coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetSet:
    """Representatives of A^{-1} Z^{m x n} modulo Z^{m x n}."""

    representatives: tuple


def cosets(space: QuadraticSpace, n: int) -> CosetSet:
    """Coset representatives via the Smith normal form, columnwise.

    With D = P A Q diagonal, the vector cosets are Q D^{-1} k mod Z^m for k
    ranging over the boxes [0, d_i); matrices take one vector representative
    per column, giving |det A|^n representatives in lexicographic order.
    """
    D, P, Q = rl.smith_normal_form(space.A)
    d = [int(D[i][i]) for i in range(space.m)]
    det_abs = abs(int(space.det))
    count = 1
    for di in d:
        count *= di
    assert count == det_abs, "Smith normal form lost the determinant"
    col_reps = []
    for k in rl.enumerate_grid([(0, di - 1) for di in d]):
        w = tuple(Fraction(ki, di) for ki, di in zip(k, d))
        repv = tuple(rl.frac_part(x) for x in rl.matvec(Q, w))
        col_reps.append(repv)
    assert len(set(col_reps)) == det_abs, "coset representatives are not distinct"
    reps = []
    for choice in rl.enumerate_grid([(0, det_abs - 1)] * n):
        reps.append(rl.from_cols(tuple(col_reps[i] for i in choice)))
    return CosetSet(representatives=tuple(reps))


def fourier_coefficient(space: QuadraticSpace, frame: ConeFrame, K, T) -> complex:
    """Coefficient of the holomorphic series at the semi-integral index T.

    Sums f(U) exp(2 pi i tr(K^T A U)) over integer U in the support with
    U^T A U = 2T; the cone bound makes the sum finite.  An index that is
    not represented yields 0.
    """
    T = rl.mat(T)
    n = len(T)
    if not rl.is_symmetric(T):
        raise ConeThetaError("T must be symmetric")
    for i in range(n):
        if T[i][i].denominator != 1:
            raise ConeThetaError("diagonal of T must be integral")
        for j in range(n):
            if (2 * T[i][j]).denominator != 1:
                raise ConeThetaError("2T must be integral")
    if not frame.full_rank:
        return 0j
    if any(T[j][j] <= 0 for j in range(n)):
        return 0j
    lam = enum_bound(frame)
    ident = rl.identity(space.m)
    per_col = [
        enumerate_ellipsoid(ident, rl.vec([0] * space.m), float(T[j][j]) / lam)
        for j in range(n)
    ]
    target = rl.mat_scale(2, T)
    terms = []
    count = [0]

    def build(j, cols):
        if j == n:
            U = rl.from_cols(cols)
            if space.gram(U) != target:
                return
            fv = f_value(frame, U).value
            if fv == 0:
                return
            q = 0.0
            if K is not None:
                KAU = rl.matmul(rl.transpose(rl.mat(K)), rl.matmul(space.A, U))
                q = float(rl.frac_part(sum(KAU[a][a] for a in range(n))))
            ang = 2.0 * math.pi * q
            terms.append(complex(float(fv) * math.cos(ang), float(fv) * math.sin(ang)))
            count[0] += 1
            return
        for a in per_col[j]:
            build(j + 1, cols + [rl.vec(a)])

    build(0, [])
    return _csum(terms)
