"""Problem-definition files.

A problem is a JSON object with the fields

    "A"  - row-major integer array (flat, length m^2, or nested rows)
    "m"  - dimension (optional when "A" is nested)
    "c"  - optional splitting vector, length m
    "C"  - optional cone frame, m rows of n+1 entries
    "H"  - optional lattice shift, m rows of n entries
    "K"  - optional phase shift, m rows of n entries

Rational entries are written as integers or "p/q" strings; floats are
rejected so that problem files stay exact.  Errors name the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import ratlin as rl
from .cone import ConeFrame, validate_frame
from .errors import FrameError, ProblemFormatError
from .quadspace import QuadraticSpace, quadratic_space


@dataclass(frozen=True)
class Problem:
    space: QuadraticSpace
    c: rl.Vec | None
    frame: ConeFrame | None
    frame_error: FrameError | None
    H: rl.Mat | None
    K: rl.Mat | None
    n: int | None


def _rational(value, path):
    if isinstance(value, bool) or isinstance(value, float):
        raise ProblemFormatError(f"{path}: rationals must be integers or 'p/q' strings")
    try:
        return rl.frac(value)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc


def _matrix(value, rows, cols, path):
    if not isinstance(value, list) or len(value) != rows:
        raise ProblemFormatError(f"{path}: expected {rows} rows")
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise ProblemFormatError(f"{path}[{i}]: expected {cols} entries")
        out.append(tuple(_rational(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)))
    return tuple(out)


def parse_problem(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ProblemFormatError("problem file must contain a JSON object")
    if "A" not in data:
        raise ProblemFormatError("A: field is required")
    raw_a = data["A"]
    if isinstance(raw_a, list) and raw_a and isinstance(raw_a[0], list):
        m = len(raw_a)
        A = _matrix(raw_a, m, m, "A")
    else:
        if "m" not in data:
            raise ProblemFormatError("m: required when A is given flat")
        m = data["m"]
        if not isinstance(m, int) or m < 1:
            raise ProblemFormatError("m: must be a positive integer")
        if not isinstance(raw_a, list) or len(raw_a) != m * m:
            raise ProblemFormatError(f"A: expected {m * m} entries for m = {m}")
        A = tuple(
            tuple(_rational(raw_a[i * m + j], f"A[{i * m + j}]") for j in range(m))
            for i in range(m)
        )
    if "m" in data and data["m"] != m:
        raise ProblemFormatError(f"m: inconsistent with A ({data['m']} vs {m})")
    for i in range(m):
        for j in range(m):
            if A[i][j].denominator != 1:
                raise ProblemFormatError(f"A[{i}][{j}]: entries of A must be integers")
    space = quadratic_space(A)

    c = None
    if "c" in data:
        raw_c = data["c"]
        if not isinstance(raw_c, list) or len(raw_c) != m:
            raise ProblemFormatError(f"c: expected {m} entries")
        c = tuple(_rational(x, f"c[{i}]") for i, x in enumerate(raw_c))

    frame = None
    frame_error = None
    n = None
    if "C" in data:
        raw_C = data["C"]
        if not isinstance(raw_C, list) or len(raw_C) != m:
            raise ProblemFormatError(f"C: expected {m} rows")
        ncols = len(raw_C[0]) if isinstance(raw_C[0], list) else 0
        if ncols < 2:
            raise ProblemFormatError("C: needs at least two columns")
        C = _matrix(raw_C, m, ncols, "C")
        n = ncols - 1
        try:
            frame = validate_frame(space, C)
        except FrameError as exc:
            frame_error = exc

    H = K = None
    for name in ("H", "K"):
        if name in data:
            raw = data[name]
            if not isinstance(raw, list) or not raw or not isinstance(raw[0], list):
                raise ProblemFormatError(f"{name}: expected nested rows")
            ncols = len(raw[0])
            M = _matrix(raw, m, ncols, name)
            if n is None:
                n = ncols
            elif ncols != n:
                raise ProblemFormatError(f"{name}: expected {n} columns, got {ncols}")
            if name == "H":
                H = M
            else:
                K = M
    return Problem(space=space, c=c, frame=frame, frame_error=frame_error, H=H, K=K, n=n)


def load_problem(path) -> Problem:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ProblemFormatError(f"problem file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"problem file is not valid JSON: {exc}") from exc
    return parse_problem(data)
