import random
from fractions import Fraction as F

import numpy as np
import pytest

from conetheta import enum_bound, f_value, pair_form, validate_frame, x_data
from conetheta import ratlin as rl
from conetheta.cone import FastSignEvaluator, independent_pairs
from conetheta.errors import DimensionMismatch, FrameError

from gen import random_frame, random_rational_matrix, random_space


def test_validate_frame_example(space2, frame2):
    assert frame2.n == 1
    assert frame2.full_rank
    assert frame2.gram[0][0] == -2 and frame2.gram[1][1] == -6
    assert frame2.gram[0][1] == -4


def test_validate_frame_rank_deficient(space2):
    with pytest.raises(FrameError) as exc:
        validate_frame(space2, [[0, 0], [1, 2]])
    assert "RankDeficient" in exc.value.codes()
    frame = validate_frame(space2, [[0, 0], [1, 2]], allow_rank_deficient=True)
    assert not frame.full_rank


def test_validate_frame_not_in_cone(space2):
    with pytest.raises(FrameError) as exc:
        validate_frame(space2, [[0, 1], [1, 0]])
    codes = exc.value.codes()
    assert "NotInCone" in codes
    assert any(idx == (1,) for code, idx, _ in exc.value.violations if code == "NotInCone")


def test_validate_frame_mixed_components(space2):
    with pytest.raises(FrameError) as exc:
        validate_frame(space2, [[0, 0], [1, -2]])
    assert "MixedComponents" in exc.value.codes()


def test_validate_frame_genus_too_large(space2):
    with pytest.raises(FrameError) as exc:
        validate_frame(space2, [[0, 1, 1], [1, 2, 3]])
    assert "GenusTooLarge" in exc.value.codes()


def test_x_data_examples(frame2):
    xd = x_data(frame2, [[3], [1]])
    assert xd.x == (F(2), F(2))
    assert x_data(frame2, [[1], [0]]).x == (F(2), F(0))
    assert x_data(frame2, [[0], [0]]).x == (F(0), F(0))


def test_x_data_column_identity(frame2, frame3):
    rng = random.Random(11)
    for frame in (frame2, frame3):
        space = frame.space
        for _ in range(150):
            U = random_rational_matrix(rng, space.m, frame.n)
            xd = x_data(frame, U)
            for j in range(frame.n):
                uj = rl.col(rl.mat(U), j)
                total = sum(space.B(frame.columns[i], uj) * xd.x[i] for i in range(frame.n + 1))
                assert total == 0


def test_f_value_examples(frame2):
    assert f_value(frame2, [[3], [1]]).value == 1
    fv = f_value(frame2, [[1], [0]])
    assert fv.value == F(1, 2) and fv.in_component
    fv = f_value(frame2, [[1], [3]])
    assert fv.value == 0 and not fv.in_component


def test_f_value_case_table(frame3):
    # scan lattice matrices and check the dyadic ladder 2^(k-n-1) case by case
    rng = random.Random(41)
    n = frame3.n
    seen = set()
    for _ in range(3000):
        U = rl.mat([[rng.randint(-4, 4) for _ in range(n)] for _ in range(3)])
        xd = x_data(frame3, U)
        signs = [(x > 0) - (x < 0) for x in xd.x]
        fv = f_value(frame3, U).value
        if all(s > 0 for s in signs):
            assert fv == 1
        elif all(s < 0 for s in signs):
            assert fv == -1
        elif all(s >= 0 for s in signs) and any(signs):
            k = sum(1 for s in signs if s > 0)
            assert fv == F(2) ** (k - n - 1)
        elif all(s <= 0 for s in signs) and any(signs):
            k = sum(1 for s in signs if s < 0)
            assert fv == -(F(2) ** (k - n - 1))
        else:
            assert fv == 0
        seen.add(tuple(sorted(signs)))
    assert len(seen) >= 4


def test_f_homogeneity_and_parity(frame2, frame3):
    rng = random.Random(23)
    for frame in (frame2, frame3):
        space = frame.space
        n = frame.n
        for _ in range(120):
            U = random_rational_matrix(rng, space.m, n)
            fU = f_value(frame, U).value
            # positive-determinant change of columns leaves f alone
            while True:
                N = random_rational_matrix(rng, n, n, lo=-2, hi=2, den=3)
                dN = rl.det(N)
                if dN > 0:
                    break
            assert f_value(frame, rl.matmul(rl.mat(U), N)).value == fU
            assert f_value(frame, rl.mat_scale(-1, rl.mat(U))).value == (-1) ** n * fU


def test_f_n1_closed_form(frame2):
    rng = random.Random(5)
    space = frame2.space
    c0, c1 = frame2.columns
    for _ in range(300):
        u = rl.vec([rng.randint(-8, 8), rng.randint(-8, 8)])
        b0, b1 = space.B(c0, u), space.B(c1, u)
        sgn = lambda x: (x > 0) - (x < 0)
        expected = F(sgn(b1) - sgn(b0), 2)
        assert f_value(frame2, rl.from_cols([u])).value == expected


def test_rank_deficient_frame_kills_f(space2):
    frame = validate_frame(space2, [[0, 0], [1, 3]], allow_rank_deficient=True)
    rng = random.Random(17)
    for _ in range(500):
        U = rl.mat([[rng.randint(-20, 20)], [rng.randint(-20, 20)]])
        assert f_value(frame, U).value == 0


def test_sign_lemma_pair_exists(frame2, frame3):
    rng = random.Random(29)
    for frame in (frame2, frame3):
        space = frame.space
        hits = 0
        for _ in range(400):
            U = rl.mat(
                [[rng.randint(-5, 5) for _ in range(frame.n)] for _ in range(space.m)]
            )
            fv = f_value(frame, U)
            if not fv.in_component:
                continue
            hits += 1
            for j in range(frame.n):
                uj = rl.col(U, j)
                pairs = [
                    (k, l)
                    for k, l in independent_pairs(frame)
                    if space.B(frame.columns[k], uj) * space.B(frame.columns[l], uj) <= 0
                ]
                assert pairs, f"no sign pair for column {j} of {U}"
        assert hits > 10


def test_enum_bound_matches_eigensolver_oracle(space2, frame2):
    pf = pair_form(space2, frame2.columns[0], frame2.columns[1])
    oracle = float(np.linalg.eigvalsh(rl.to_float(pf.G))[0])
    lam = enum_bound(frame2)
    assert lam > 0
    assert lam <= oracle
    assert abs(lam - oracle) < 1e-7 * oracle


def test_enum_bound_scale_invariance(space2, frame2):
    # the pair form is degree-0 homogeneous in (c_k, c_l)
    t = F(7, 3)
    c0 = tuple(t * x for x in frame2.columns[0])
    c1 = tuple(t * x for x in frame2.columns[1])
    assert pair_form(space2, c0, c1).G == pair_form(
        space2, frame2.columns[0], frame2.columns[1]
    ).G


def test_fast_sign_evaluator_matches_exact(frame2, frame3):
    rng = random.Random(31)
    for frame, H in (
        (frame2, rl.mat([[F(1, 2)], [F(0)]])),
        (frame3, rl.mat([[F(1, 2), 0], [0, 0], [0, F(1, 3)]])),
    ):
        ev = FastSignEvaluator(frame, H)
        space = frame.space
        offs_batch = []
        for _ in range(300):
            offs = tuple(
                tuple(rng.randint(-5, 5) for _ in range(space.m)) for _ in range(frame.n)
            )
            offs_batch.append(offs)
            U = rl.mat_add(rl.from_cols([rl.vec(c) for c in offs]), rl.mat(H))
            assert ev.f(offs) == f_value(frame, U).value
        batch = ev.f_batch(np.array(offs_batch, dtype=np.int64))
        for offs, fb in zip(offs_batch, batch):
            assert F(fb).limit_denominator(1 << 12) == ev.f(offs)


def test_x_data_dimension_check(frame2):
    with pytest.raises(DimensionMismatch):
        x_data(frame2, [[1, 0], [0, 1]])
