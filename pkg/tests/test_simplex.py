import itertools
import math
import random
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from conetheta import (
    erf_like,
    g_n1,
    g_value,
    gaussian_affine_simplex,
    project,
    quadratic_space,
    simplex_chart,
    split,
    v_map,
    validate_frame,
    wedge_coeffs,
)
from conetheta import ratlin as rl
from conetheta.errors import ChartDegenerate, RuleUnavailable, WrongGenus
from conetheta.simplex import _gm_rule_exact, _mesh, composite_rule, parse_rule

from gen import random_rational_matrix


def quad_oracle(x):
    """Adaptive quadrature of the defining integral, 25 working digits."""
    with mpmath.workdps(25):
        return float(2 * mpmath.quad(lambda v: mpmath.exp(-mpmath.pi * v * v), [0, x]))


def test_erf_like_against_quadrature_oracle():
    assert erf_like(0.0) == 0.0
    assert abs(float(erf_like(1.0)) - quad_oracle(1.0)) < 1e-10
    for x in (-6.0, -2.5, -0.7, 0.3, 1.9, 4.2, 6.0):
        assert abs(float(erf_like(x)) - quad_oracle(x)) < 1e-12


def test_erf_like_shape():
    xs = np.linspace(-12, 12, 401)
    vals = erf_like(xs)
    assert np.all(np.abs(vals) < 1.0 + 1e-15)
    assert np.all(np.diff(vals) >= 0)
    assert np.allclose(vals + erf_like(-xs), 0.0, atol=1e-15)
    assert abs(float(erf_like(9.0)) - 1.0) < 1e-12
    assert abs(float(erf_like(-9.0)) + 1.0) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gm_weights_sum_exactly(n):
    for degree in (1, 3, 5, 7):
        _, weights = _gm_rule_exact(degree, n)
        assert sum(weights) == F(1, math.factorial(n))


@pytest.mark.parametrize("n,degree", [(1, 7), (2, 7), (3, 5)])
def test_gm_monomial_exactness(n, degree):
    pts, wts = composite_rule(degree, n, 0)
    for alpha in itertools.product(range(degree + 1), repeat=n):
        if sum(alpha) > degree:
            continue
        approx = float(np.sum(wts * np.prod(pts ** np.array(alpha), axis=1)))
        num = 1
        for a in alpha:
            num *= math.factorial(a)
        exact = num / math.factorial(n + sum(alpha))
        assert abs(approx - exact) < 5e-14


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mesh_partitions_simplex(n):
    for level in (1, 2):
        mesh = _mesh(n, level)
        assert len(mesh) == 2 ** (level * n)
        total = F(0)
        for simplex in mesh:
            p0 = simplex[0]
            edges = rl.mat([[p[j] - p0[j] for p in simplex[1:]] for j in range(n)])
            total += abs(rl.det(edges))
        assert total == 1  # n! * vol(T_n)


def test_rule_descriptor_parsing():
    assert parse_rule("gm:7") == ("gm", 7, None)
    assert parse_rule("gm:5:3") == ("gm", 5, 3)
    assert parse_rule("mc:1000:42") == ("mc", 1000, 42)
    for bad in ("gm:6", "gm:x", "mc:100", "simpson:3", "gm:7:0"):
        with pytest.raises(RuleUnavailable):
            parse_rule(bad)


def test_g_n1_examples(space2, frame2):
    assert g_n1(space2, frame2, [0.0, 0.0]) == 0.0
    # arguments B(c0,u) = -2, B(c1,u) = 2, Q(c0) = -1, Q(c1) = -3 by hand
    expected = 0.5 * (quad_oracle(2.0 / math.sqrt(3.0)) - quad_oracle(-2.0))
    assert abs(g_n1(space2, frame2, [3.0, 1.0]) - expected) < 1e-12
    expected = 0.5 * quad_oracle(2.0 / math.sqrt(3.0))
    assert abs(g_n1(space2, frame2, [1.0, 0.0]) - expected) < 1e-12


def test_g_n1_wrong_genus(space3, frame3):
    with pytest.raises(WrongGenus):
        g_n1(space3, frame3, [1.0, 0.0, 0.0])


def test_v_map_vertices(space2, frame2):
    chart = simplex_chart(space2, frame2)
    v, _ = v_map(chart, [[3], [1]], [0.0])
    assert abs(v[0] - (-2.0)) < 1e-14  # B(c0,u)/sqrt(-Q(c0))
    v, _ = v_map(chart, [[3], [1]], [1.0])
    assert abs(v[0] - 2.0 / math.sqrt(3.0)) < 1e-14


def test_v_map_outside_chart(space2, frame2):
    chart = simplex_chart(space2, frame2)
    with pytest.raises(ChartDegenerate):
        v_map(chart, [[3], [1]], [1.5])


def test_v_map_jacobian_matches_finite_differences(space2, frame2, space3, frame3):
    rng = random.Random(3)
    cases = [(space2, frame2), (space3, frame3)]
    # genus 3 in a 4-dimensional space
    sp4 = quadratic_space(
        [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, -2]]
    )
    fr4 = validate_frame(
        sp4,
        [[0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1], [1, 2, 2, 3]],
    )
    cases.append((sp4, fr4))
    h = 1e-5
    for space, frame in cases:
        chart = simplex_chart(space, frame)
        n = frame.n
        for _ in range(6):
            U = np.array(
                [[rng.uniform(-2, 2) for _ in range(n)] for _ in range(space.m)]
            )
            t0 = np.full(n, 1.0 / (n + 2)) + np.array(
                [rng.uniform(-0.05, 0.05) for _ in range(n)]
            )
            _, jac = v_map(chart, U, t0)
            J = np.zeros((n, n))
            for l in range(n):
                tp = t0.copy()
                tp[l] += h
                tm = t0.copy()
                tm[l] -= h
                vp, _ = v_map(chart, U, tp)
                vm, _ = v_map(chart, U, tm)
                J[:, l] = (vp - vm) / (2 * h)
            fd = float(np.linalg.det(J))
            assert abs(jac - fd) < 1e-5 * max(1.0, abs(fd))


def test_v_map_jac_vanishes_on_parallel_columns(space2, frame2):
    chart = simplex_chart(space2, frame2)
    # c(1/2) = (1/2, 3/2); a column proportional to it has u_perp = 0
    _, jac = v_map(chart, [[0.5], [1.5]], [0.5])
    assert abs(jac) < 1e-14


def test_wedge_coeffs_zero_and_rank(space2, frame2):
    sd = split(space2, (0, 1))
    assert all(v == 0 for v in wedge_coeffs(sd, [[0], [0]]).values())
    # n = m: the single maximal minor vanishes since U_perp has rank < m
    coeffs = wedge_coeffs(sd, [[1, 2], [3, 4]])
    assert list(coeffs) == [(0, 1)]
    assert coeffs[(0, 1)] == 0


def test_cauchy_binet_identity(space3, frame3):
    rng = random.Random(13)
    space, frame = space3, frame3
    n = frame.n
    dc = rl.from_cols(
        [
            tuple(a - b for a, b in zip(frame.columns[l + 1], frame.columns[0]))
            for l in range(n)
        ]
    )
    for _ in range(25):
        t = [F(rng.randint(1, 5), 12) for _ in range(n)]
        c_t = tuple(
            frame.columns[0][i]
            + sum(t[l] * (frame.columns[l + 1][i] - frame.columns[0][i]) for l in range(n))
            for i in range(space.m)
        )
        sd = split(space, c_t)
        U = random_rational_matrix(rng, space.m, n)
        coeffs = wedge_coeffs(sd, U)
        u_perp, _ = project(sd, U)
        lhs = rl.det(rl.matmul(rl.transpose(rl.matmul(space.A, u_perp)), dc))
        rhs = F(0)
        for k, val in coeffs.items():
            sub = tuple(dc[i] for i in k)
            rhs += val * rl.det(sub)
        assert lhs == rhs


def test_g_value_against_closed_form(space2, frame2):
    chart = simplex_chart(space2, frame2)
    rng = random.Random(19)
    worst = 0.0
    for _ in range(25):
        u = np.array([rng.uniform(-4, 4), rng.uniform(-4, 4)])
        res = g_value(chart, u.reshape(2, 1))
        gap = abs(res.value - g_n1(space2, frame2, u))
        worst = max(worst, gap)
    assert worst < 1e-8


def test_g_value_parity_and_zero(space2, frame2):
    chart = simplex_chart(space2, frame2)
    res0 = g_value(chart, [[0], [0]])
    assert res0.value == 0.0
    rp = g_value(chart, [[2.3], [0.7]])
    rm = g_value(chart, [[-2.3], [-0.7]])
    assert abs(rp.value + rm.value) <= rp.error_estimate + rm.error_estimate + 1e-12
    assert abs(rp.value) <= 1.0 + rp.error_estimate


def test_g_value_bounded_on_samples(space3, frame3):
    chart = simplex_chart(space3, frame3)
    rng = random.Random(37)
    for _ in range(10):
        U = np.array([[rng.uniform(-3, 3) for _ in range(2)] for _ in range(3)])
        res = g_value(chart, U)
        assert abs(res.value) <= 1.0 + res.error_estimate + 1e-9


def test_g_value_monte_carlo_cross_check(space2, frame2):
    chart = simplex_chart(space2, frame2)
    U = [[1.7], [0.4]]
    det_res = g_value(chart, U)
    mc_res = g_value(chart, U, rule="mc:200000:1234")
    assert mc_res.rule_used == "mc:200000:1234"
    assert abs(det_res.value - mc_res.value) < 5 * mc_res.error_estimate + 1e-4


def test_gaussian_affine_simplex_examples():
    big = gaussian_affine_simplex([[-40, -40], [100, -30], [-30, 100]], seed=7)
    assert abs(big - 1.0) <= 0.01
    facet = gaussian_affine_simplex([[0, -40], [80, 40], [0, 40]], seed=7)
    assert abs(facet - 0.5) <= 0.01
    far = gaussian_affine_simplex([[100, 100], [120, 100], [100, 120]], seed=7)
    assert abs(far) <= 1e-6
    neg = gaussian_affine_simplex([[-40, -40], [-30, 100], [100, -30]], seed=7)
    assert abs(neg + 1.0) <= 0.01


def test_gaussian_affine_simplex_matches_closed_form_interval(space2, frame2):
    # at genus 1 the image simplex is an interval, so the oracle must agree
    # with the error-function difference
    u = np.array([2.2, 0.9])
    chart = simplex_chart(space2, frame2)
    v0, _ = v_map(chart, u.reshape(2, 1), [0.0])
    v1, _ = v_map(chart, u.reshape(2, 1), [1.0])
    mc = gaussian_affine_simplex([[v0[0]], [v1[0]]], seed=99, samples=400_000)
    assert abs(mc - g_n1(space2, frame2, u)) < 5e-3
