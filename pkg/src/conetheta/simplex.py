"""The modular kernel g as a Gaussian integral over a curved simplex.

Under the chart c(t) = c_0 + sum_i t_i (c_i - c_0) on the unit simplex T_n,
the kernel is

    g(U) = int_{T_n} exp(-pi |v(t)|^2) jac(t) dt,

    v(t)  = U^T A c(t) / sqrt(-Q(c(t))),
    jac(t) = det( B(u_j^perp(c(t)), c_l - c_0) )_{j,l} / (-Q(c(t)))^{n/2},

where u_j^perp is the part of the j-th column of U orthogonal to c(t).  The
chart orientation is fixed once and for all so that g approaches the locally
constant weight f with positive sign as the argument is scaled up.

Cubature uses symmetric Grundmann-Moller rules on T_n (degree 7 by default)
over a dyadically refined mesh; the mesh refinement is the Kuhn/Freudenthal
decomposition, which splits a simplex into 2^n equal-volume children in any
dimension.  Refinement levels climb deterministically until two consecutive
levels agree, so results are reproducible for a given rule descriptor.
Descriptors: "gm:<degree>", "gm:<degree>:<levels>", "mc:<samples>:<seed>".

E(x) = 2 int_0^x exp(-pi v^2) dv is evaluated as scipy.special.erf(sqrt(pi) x),
which is accurate to better than 1e-15 over the real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, permutations, product

import numpy as np
from scipy.special import erf as _erf

from . import ratlin as rl
from .cone import ConeFrame
from .errors import ChartDegenerate, DimensionMismatch, RuleUnavailable, WrongGenus
from .quadspace import QuadraticSpace, SplitData, project

_LADDER_ATOL = 1e-12
_LADDER_RTOL = 1e-10
_MAX_LEVELS = {1: 14, 2: 9, 3: 5}


def erf_like(x):
    """E(x) = 2 int_0^x exp(-pi v^2) dv, odd, increasing, |E| < 1."""
    return _erf(np.sqrt(np.pi) * x)


# ---------------------------------------------------------------------------
# Grundmann-Moller rules and dyadic simplex meshes
# ---------------------------------------------------------------------------


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@lru_cache(maxsize=None)
def _gm_rule_exact(degree: int, n: int):
    """Grundmann-Moller points/weights on the unit simplex, exact rationals.

    The rule of degree d = 2s+1 integrates all polynomials of degree <= d
    against Lebesgue measure on T_n = {t >= 0, sum t <= 1}; the weights sum
    to vol(T_n) = 1/n! exactly.
    """
    if degree < 1 or degree % 2 == 0:
        raise RuleUnavailable(f"Grundmann-Moller degree must be odd and >= 1, got {degree}")
    s = (degree - 1) // 2
    d = degree
    acc: dict[tuple, Fraction] = {}
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = Fraction((-1) ** i * denom**d, 4**s * math.factorial(i) * math.factorial(d + n - i))
        for beta in _compositions(s - i, n + 1):
            bc = tuple(Fraction(2 * b + 1, denom) for b in beta)
            acc[bc] = acc.get(bc, Fraction(0)) + w
    points = tuple(bc[1:] for bc in acc)  # drop the barycentric t_0 coordinate
    weights = tuple(acc[bc] for bc in acc)
    return points, weights


@lru_cache(maxsize=None)
def gm_rule(degree: int, n: int):
    points, weights = _gm_rule_exact(degree, n)
    P = np.array([[float(x) for x in p] for p in points], dtype=float).reshape(len(points), n)
    W = np.array([float(w) for w in weights], dtype=float)
    P.setflags(write=False)
    W.setflags(write=False)
    return P, W


@lru_cache(maxsize=None)
def _dyadic_children(n: int):
    """Split T_n into 2^n equal-volume simplices (Kuhn decomposition).

    In the Kuhn coordinates x with 1 >= x_1 >= ... >= x_n >= 0 the doubled
    simplex is tiled by the integer-translated permutahedral cells; mapping
    back through t_j = x_j - x_{j+1} gives the children in T_n coordinates.
    """
    children = []
    seen = set()
    for z in product((0, 1), repeat=n):
        for sigma in permutations(range(n)):
            verts_x = [list(z)]
            acc = list(z)
            for idx in sigma:
                acc = acc.copy()
                acc[idx] += 1
                verts_x.append(acc)
            ok = all(
                v[0] <= 2 and v[n - 1] >= 0 and all(v[a] >= v[a + 1] for a in range(n - 1))
                for v in verts_x
            )
            if not ok:
                continue
            verts_t = []
            for v in verts_x:
                xh = [Fraction(a, 2) for a in v]
                verts_t.append(
                    tuple(xh[j] - xh[j + 1] if j + 1 < n else xh[j] for j in range(n))
                )
            key = frozenset(verts_t)
            if key not in seen:
                seen.add(key)
                children.append(tuple(verts_t))
    assert len(children) == 2**n
    return tuple(children)


@lru_cache(maxsize=None)
def _mesh(n: int, level: int):
    """Vertices of the level-wise refined mesh of T_n, exact rationals."""
    if level == 0:
        zero = tuple(Fraction(0) for _ in range(n))
        unit = [zero] + [
            tuple(Fraction(1 if j == i else 0) for j in range(n)) for i in range(n)
        ]
        return (tuple(unit),)
    children = _dyadic_children(n)
    out = []
    for simplex in _mesh(n, level - 1):
        p0 = simplex[0]
        edges = [tuple(p[j] - p0[j] for j in range(n)) for p in simplex[1:]]
        for child in children:
            mapped = []
            for t in child:
                mapped.append(
                    tuple(p0[j] + sum(t[i] * edges[i][j] for i in range(n)) for j in range(n))
                )
            out.append(tuple(mapped))
    return tuple(out)


@lru_cache(maxsize=None)
def composite_rule(degree: int, n: int, level: int):
    """Cubature points/weights of the GM rule over the level-L dyadic mesh."""
    base_p, base_w = gm_rule(degree, n)
    simplices = _mesh(n, level)
    S = len(simplices)
    verts = np.array(
        [[[float(x) for x in p] for p in simplex] for simplex in simplices], dtype=float
    )  # (S, n+1, n)
    origin = verts[:, 0, :]  # (S, n)
    edges = verts[:, 1:, :] - origin[:, None, :]  # (S, n, n); edges[s, i] = p_i - p_0
    pts = origin[:, None, :] + np.einsum("pi,sij->spj", base_p, edges)  # (S, P, n)
    pts = pts.reshape(S * len(base_p), n)
    wts = np.tile(base_w, S) * (2.0 ** (-level * n))
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


# ---------------------------------------------------------------------------
# Chart over the curved simplex
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimplexChart:
    """Fixed-orientation chart c(t) = c_0 + sum_i t_i (c_i - c_0), t in T_n."""

    space: QuadraticSpace
    frame: ConeFrame

    @property
    def n(self) -> int:
        return self.frame.n

    @cached_property
    def _c0(self) -> np.ndarray:
        return self.frame.C_float[:, 0]

    @cached_property
    def _dc(self) -> np.ndarray:
        C = self.frame.C_float
        return C[:, 1:] - C[:, :1]

    @cached_property
    def _A(self) -> np.ndarray:
        return self.space.A_float


def simplex_chart(space: QuadraticSpace, frame: ConeFrame) -> SimplexChart:
    return SimplexChart(space=space, frame=frame)


def _chart_batch(chart: SimplexChart, U: np.ndarray, T: np.ndarray):
    """Evaluate v(t) and the chart Jacobian on a batch of points.

    Returns (v, jac) with v of shape (N, n) and jac of shape (N,).
    """
    n = chart.n
    A = chart._A
    cpts = chart._c0[:, None] + chart._dc @ T.T  # (m, N)
    Ac = A @ cpts  # (m, N)
    qc = 0.5 * np.einsum("iN,iN->N", cpts, Ac)
    if np.any(qc >= 0):
        raise ChartDegenerate("Q(c(t)) >= 0 inside the chart")
    s = np.sqrt(-qc)  # (N,)
    w = U.T @ Ac  # (n, N); w_j = B(c(t), u_j)
    v = (w / s).T  # (N, n)
    J0 = U.T @ A @ chart._dc  # (n, n); B(u_j, c_l - c_0)
    G = chart._dc.T @ Ac  # (n, N); B(c(t), c_l - c_0)
    corr = (w.T[:, :, None] * G.T[:, None, :]) / (2.0 * qc)[:, None, None]
    Bmat = J0[None, :, :] - corr  # (N, n, n)
    jac = _det_batch(Bmat) / s**n
    return v, jac


def _det_batch(B: np.ndarray) -> np.ndarray:
    # cofactor expansion for the small genera; np.linalg.det pays a large
    # per-call dispatch cost on these batch sizes
    n = B.shape[-1]
    if n == 1:
        return B[:, 0, 0].copy()
    if n == 2:
        return B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
    if n == 3:
        return (
            B[:, 0, 0] * (B[:, 1, 1] * B[:, 2, 2] - B[:, 1, 2] * B[:, 2, 1])
            - B[:, 0, 1] * (B[:, 1, 0] * B[:, 2, 2] - B[:, 1, 2] * B[:, 2, 0])
            + B[:, 0, 2] * (B[:, 1, 0] * B[:, 2, 1] - B[:, 1, 1] * B[:, 2, 0])
        )
    return np.linalg.det(B)


def v_map(chart: SimplexChart, U, t):
    """Map one chart point to (v, jac); U may be exact or floating."""
    Uf = U if isinstance(U, np.ndarray) else rl.to_float(rl.mat(U))
    if Uf.shape != (chart.space.m, chart.n):
        raise DimensionMismatch(f"U must be {chart.space.m} x {chart.n}")
    T = np.asarray(t, dtype=float).reshape(1, chart.n)
    if T.min() < -1e-12 or T.sum() > 1 + 1e-12:
        raise ChartDegenerate("t lies outside the unit simplex")
    v, jac = _chart_batch(chart, Uf, T)
    return v[0], float(jac[0])


def wedge_coeffs(sd: SplitData, U):
    """Exact maximal-minor determinants of A U^perp, keyed by row multi-index.

    Row indices are 0-based strictly increasing tuples of length n.  Via
    Cauchy-Binet these coefficients expand the chart Jacobian determinant:
    det((A U^perp)^T Dc) = sum_k det((A U^perp)_k) det(Dc_k).
    """
    U = rl.mat(U)
    m, n = rl.shape(U)
    if m != sd.space.m:
        raise DimensionMismatch(f"U must have {sd.space.m} rows")
    u_perp, _ = project(sd, U)
    W = rl.matmul(sd.space.A, u_perp)
    out = {}
    for k in combinations(range(m), n):
        sub = tuple(W[i] for i in k)
        out[k] = rl.det(sub)
    return out


# ---------------------------------------------------------------------------
# Kernel evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GResult:
    """One kernel evaluation with an a-posteriori error estimate.

    error_estimate is the difference between the two finest refinements
    (or the Monte Carlo standard error), not a rigorous bound.
    """

    value: float
    error_estimate: float
    rule_used: str
    evaluations: int


def parse_rule(rule: str):
    parts = rule.split(":")
    if parts[0] == "gm" and len(parts) in (2, 3):
        try:
            degree = int(parts[1])
            levels = int(parts[2]) if len(parts) == 3 else None
        except ValueError as exc:
            raise RuleUnavailable(f"bad rule descriptor {rule!r}") from exc
        if degree < 1 or degree % 2 == 0:
            raise RuleUnavailable(f"Grundmann-Moller degree must be odd and >= 1, got {degree}")
        if levels is not None and levels < 1:
            raise RuleUnavailable("refinement level must be >= 1")
        return ("gm", degree, levels)
    if parts[0] == "mc" and len(parts) == 3:
        try:
            samples, seed = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise RuleUnavailable(f"bad rule descriptor {rule!r}") from exc
        if samples < 1:
            raise RuleUnavailable("sample count must be >= 1")
        return ("mc", samples, seed)
    raise RuleUnavailable(f"unknown rule descriptor {rule!r}")


def _integrate_level(chart, Uf, degree, level):
    pts, wts = composite_rule(degree, chart.n, level)
    v, jac = _chart_batch(chart, Uf, pts)
    vals = np.exp(-np.pi * np.einsum("Nj,Nj->N", v, v)) * jac
    total = float(np.sum(wts * vals))
    if not math.isfinite(total):
        raise ChartDegenerate("non-finite cubature value")
    return total, len(wts)


def _start_level(chart, Uf):
    """Deterministic minimum refinement before convergence may be accepted.

    The Gaussian factor concentrates on a strip of width ~ 1/|v|, so the
    mesh is pre-refined until cells resolve the largest vertex value of |v|.
    """
    n = chart.n
    probes = np.vstack([np.zeros(n), np.eye(n), np.full(n, 1.0 / (n + 1))])
    v, _ = _chart_batch(chart, Uf, probes)
    vmax = float(np.max(np.abs(v)))
    lead = math.ceil(math.log2(vmax)) if vmax > 1.0 else 0
    return max(1, lead)


def g_value(chart: SimplexChart, U, rule: str = "gm:7", atol: float | None = None) -> GResult:
    """Evaluate the kernel by simplex cubature under the fixed chart.

    With a plain "gm:<degree>" descriptor the dyadic mesh is refined until
    two consecutive levels agree to the requested tolerance; an explicit
    "gm:<degree>:<levels>" pins the refinement depth.  The Monte Carlo
    descriptor "mc:<samples>:<seed>" is a seeded cross-check estimator.
    """
    Uf = U if isinstance(U, np.ndarray) else rl.to_float(rl.mat(U))
    if Uf.shape != (chart.space.m, chart.n):
        raise DimensionMismatch(f"U must be {chart.space.m} x {chart.n}")
    kind, a, b = parse_rule(rule)
    if kind == "mc":
        samples, seed = a, b
        rng = np.random.default_rng(seed)
        T = rng.dirichlet(np.ones(chart.n + 1), size=samples)[:, : chart.n]
        v, jac = _chart_batch(chart, Uf, T)
        vals = np.exp(-np.pi * np.einsum("Nj,Nj->N", v, v)) * jac
        vol = 1.0 / math.factorial(chart.n)
        value = vol * float(np.mean(vals))
        err = vol * float(np.std(vals)) / math.sqrt(samples)
        return GResult(value=value, error_estimate=err, rule_used=rule, evaluations=samples)

    degree, levels = a, b
    tol_abs = _LADDER_ATOL if atol is None else max(atol, 1e-14)
    evals = 0
    if levels is not None:
        lo, counted = _integrate_level(chart, Uf, degree, max(levels - 1, 0))
        evals += counted
        hi, counted = _integrate_level(chart, Uf, degree, levels)
        evals += counted
        return GResult(
            value=hi,
            error_estimate=abs(hi - lo),
            rule_used=f"gm:{degree}:{levels}",
            evaluations=evals,
        )
    max_level = _MAX_LEVELS.get(chart.n, 4)
    start = min(_start_level(chart, Uf), max_level - 1)
    prev, counted = _integrate_level(chart, Uf, degree, start)
    evals += counted
    level = start
    delta = math.inf
    while level < max_level:
        level += 1
        cur, counted = _integrate_level(chart, Uf, degree, level)
        evals += counted
        delta = abs(cur - prev)
        prev = cur
        if delta <= max(tol_abs, _LADDER_RTOL * abs(cur)):
            break
    return GResult(
        value=prev,
        error_estimate=delta,
        rule_used=f"gm:{degree}:{level}",
        evaluations=evals,
    )


def g_n1(space: QuadraticSpace, frame: ConeFrame, u) -> float:
    """Closed form of the kernel at genus 1 under the chart orientation.

    g(u) = ( E(B(c_1,u)/sqrt(-Q(c_1))) - E(B(c_0,u)/sqrt(-Q(c_0))) ) / 2.
    """
    if frame.n != 1:
        raise WrongGenus(f"closed form requires genus 1, frame has n = {frame.n}")
    uf = np.asarray(u, dtype=float).reshape(space.m)
    A = space.A_float
    C = frame.C_float
    b0 = float(C[:, 0] @ A @ uf)
    b1 = float(C[:, 1] @ A @ uf)
    q0 = -0.5 * float(C[:, 0] @ A @ C[:, 0])
    q1 = -0.5 * float(C[:, 1] @ A @ C[:, 1])
    return 0.5 * (float(erf_like(b1 / math.sqrt(q1))) - float(erf_like(b0 / math.sqrt(q0))))


def gaussian_affine_simplex(vertices, seed: int, samples: int = 400_000) -> float:
    """Signed Gaussian measure of an affine simplex by seeded Monte Carlo.

    exp(-pi |v|^2) is a probability density, so the measure equals the hit
    probability of Gaussian samples; the sign is the orientation of the
    vertex order.  Used as the scale-up limit oracle for the kernel.
    """
    V = np.asarray(vertices, dtype=float)
    npts, n = V.shape
    if npts != n + 1:
        raise DimensionMismatch("need n+1 vertices of dimension n")
    E = (V[1:] - V[0]).T  # columns are edge vectors
    d = float(np.linalg.det(E))
    if d == 0.0:
        return 0.0
    sign = 1.0 if d > 0 else -1.0
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, 1.0 / math.sqrt(2.0 * math.pi), size=(samples, n))
    bary = np.linalg.solve(E, (X - V[0]).T)  # (n, samples)
    inside = np.all(bary >= 0.0, axis=0) & (bary.sum(axis=0) <= 1.0)
    return sign * float(np.count_nonzero(inside)) / samples
