import csv
import json
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from conetheta import ratlin as rl
from conetheta import siegel_from_complex, siegel_point
from conetheta.verify import (
    append_report_csv,
    det_z_power,
    diag_correction,
    translate_multiplier,
    verify_invert,
    verify_limit,
    verify_translate,
    write_report_json,
)

from gen import random_siegel


def test_translate_multiplier_identity(space2):
    assert translate_multiplier(space2, rl.zeros(2, 1), [[1]]) == 1.0


def test_translate_multiplier_half_characteristic(space2):
    # tr(H^T A H S) = 1/2 gives exp(-pi i/2) = -i; the odd-diagonal
    # correction exponent is 1 here and must not enter for even A
    H = [[F(1, 2)], [0]]
    mult = translate_multiplier(space2, H, [[1]])
    assert abs(mult - (-1j)) < 1e-15
    assert diag_correction(space2, H, [[1]]) == 1


def test_translate_law_trivial_characteristics(space2, frame2):
    rep = verify_translate(
        space2, frame2, None, None, [[2]], siegel_from_complex(0.2 + 1.1j), eps=1e-6
    )
    assert abs(rep.details["multiplier"] - 1.0) < 1e-15
    assert rep.passed


def test_translate_law_half_characteristic(space2, frame2):
    rep = verify_translate(
        space2,
        frame2,
        [[F(1, 2)], [0]],
        [[F(1, 4)], [F(1, 3)]],
        [[1]],
        siegel_from_complex(1.3j),
        eps=1e-6,
    )
    assert rep.passed
    assert abs(rep.details["multiplier"] - (-1j)) < 1e-15
    assert abs(rep.lhs) > 1e-3  # non-degenerate instance


def test_translate_law_random_instances(space2, frame2):
    rng = random.Random(61)
    for _ in range(3):
        H = rl.mat([[F(rng.randint(-2, 2), 4)], [F(rng.randint(-2, 2), 4)]])
        K = rl.mat([[F(rng.randint(-2, 2), 8)], [F(rng.randint(-2, 2), 8)]])
        S = rl.mat([[rng.randint(-2, 2)]])
        Z = random_siegel(rng, 1)
        rep = verify_translate(space2, frame2, H, K, S, Z, eps=1e-6)
        assert rep.passed, rep.json_dict()


def test_det_z_power_at_base_point():
    val, amb = det_z_power(1j * np.eye(2), m=3)
    assert not amb
    assert abs(val - np.exp(1j * math.pi * 3 * 2 / 4)) < 1e-12


def test_det_z_power_square_consistency():
    rng = random.Random(3)
    for _ in range(10):
        z = complex(rng.uniform(-1, 1), rng.uniform(0.4, 2.5))
        val, amb = det_z_power(np.array([[z]]), m=3)
        assert not amb
        assert abs(val * val - z**3) < 1e-10 * abs(z) ** 3


def test_invert_law_at_fixed_points(space2, frame2):
    for z in (1j, 2j):
        rep = verify_invert(space2, frame2, None, None, siegel_from_complex(z), eps=1e-6)
        assert rep.details["coset_count"] == 4
        assert rep.details["modulus_err"] < 1e-6
        assert rep.abs_err < 1e-4
        assert not rep.details["branch_ambiguous"]


def test_invert_law_nondegenerate(space2, frame2):
    H = rl.mat([[F(1, 2)], [0]])
    K = rl.mat([[0], [F(1, 3)]])
    for z in (1j, 2j, 0.3 + 1.2j):
        rep = verify_invert(space2, frame2, H, K, siegel_from_complex(z), eps=1e-6)
        assert abs(rep.lhs) > 1e-4  # the series is visibly nonzero here
        assert rep.details["modulus_err"] < 1e-6
        assert rep.abs_err < 1e-4


def test_limit_generic_facet_and_outside(space2, frame2):
    rep = verify_limit(space2, frame2, [[3], [1]], y_grid=(1.0, 4.0, 25.0))
    assert rep.details["case"] == "generic"
    assert rep.details["gaps"][-1] < 1e-3
    rep = verify_limit(space2, frame2, [[1], [0]], y_grid=(1.0, 4.0, 25.0, 100.0))
    assert "facet" in rep.details["case"]
    assert rep.details["f_value"] == F(1, 2)
    assert rep.details["gaps"][-1] < 1e-3
    rep = verify_limit(space2, frame2, [[1], [3]], y_grid=(1.0, 25.0))
    assert rep.details["f_value"] == 0
    assert rep.details["gaps"][-1] < 1e-3


def test_limit_gaps_shrink(space2, frame2):
    rep = verify_limit(space2, frame2, [[3], [1]], y_grid=(1.0, 4.0, 25.0, 100.0))
    gaps = rep.details["gaps"]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


def test_limit_genus2(space3, frame3):
    U = [[1, 0], [0, 1], [0, 0]]
    rep = verify_limit(space3, frame3, U, y_grid=(1.0, 25.0, 100.0))
    assert rep.details["gaps"][-1] < 1e-2


def test_report_serialization(tmp_path, space2, frame2):
    rep = verify_limit(space2, frame2, [[3], [1]], y_grid=(1.0, 4.0))
    out = tmp_path / "report.json"
    write_report_json(rep, out)
    data = json.loads(out.read_text())
    assert data["law"] == "limit"
    assert data["pass"] is True
    csv_path = tmp_path / "agg.csv"
    append_report_csv(rep, csv_path)
    append_report_csv(rep, csv_path)
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["law", "inputs_hash", "abs_err", "rel_err", "pass"]
    assert len(rows) == 3 and rows[1] == rows[2]
