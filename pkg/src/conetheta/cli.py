"""Batch command line front-end.

Subcommands: inspect, f-eval, g-eval, theta-f, theta-g, fourier, cosets,
verify-translate, verify-invert, verify-limit.  All output is canonical JSON
(plus an aggregate CSV for the verify commands), so identical configurations
produce byte-identical files.  Exit codes: 0 success, 1 validation failure,
2 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ratlin as rl
from .cone import enum_bound, f_value, x_data
from .errors import ConeThetaError, FrameError, LinearlyDependent
from .problem import Problem, load_problem
from .serialize import canonical_json
from .simplex import g_value, parse_rule, simplex_chart
from .theta import cosets, fourier_coefficient, siegel_point, theta_f, theta_g
from .verify import (
    DEFAULT_Y_GRID,
    append_report_csv,
    verify_invert,
    verify_limit,
    verify_translate,
)

_COMMANDS = (
    "inspect",
    "f-eval",
    "g-eval",
    "theta-f",
    "theta-g",
    "fourier",
    "cosets",
    "verify-translate",
    "verify-invert",
    "verify-limit",
)


class _Parser(argparse.ArgumentParser):
    """argparse front-end that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: str
    eps: float
    rule: str
    ygrid: tuple
    seed: int | None
    out: str | None
    csv: str | None
    threads: int
    tol: float | None


def _parse_matrix(text, path="matrix"):
    rows = [r for r in text.split(";") if r.strip()]
    try:
        return rl.mat([[x for x in row.split(",")] for row in rows])
    except (ValueError, TypeError) as exc:
        raise ConeThetaError(f"cannot parse {path}: {exc}") from exc


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def _siegel_from_args(args, n):
    if args.zim is None:
        raise ConeThetaError("--zim is required for this command")
    zim = [float(x) for x in args.zim.split(",")]
    if len(zim) != n * n:
        raise ConeThetaError(f"--zim: expected {n * n} entries for genus {n}")
    Y = np.array(zim, dtype=float).reshape(n, n)
    if args.zre is None:
        X = np.zeros((n, n))
    else:
        zre = [float(x) for x in args.zre.split(",")]
        if len(zre) != n * n:
            raise ConeThetaError(f"--zre: expected {n * n} entries for genus {n}")
        X = np.array(zre, dtype=float).reshape(n, n)
    return siegel_point(X, Y)


def _resolve_rule(args) -> str:
    rule = args.rule
    kind = rule.split(":")[0]
    if kind == "mc" and len(rule.split(":")) == 2:
        if args.seed is None:
            raise ConeThetaError("a seed is mandatory for Monte Carlo rules; pass --seed")
        rule = f"{rule}:{args.seed}"
    parse_rule(rule)
    return rule


def _need_frame(problem: Problem):
    if problem.frame is None:
        if problem.frame_error is not None:
            raise problem.frame_error
        raise ConeThetaError("problem file has no cone frame C")
    return problem.frame


def _cmd_inspect(problem, args):
    space = problem.space
    info = {
        "m": space.m,
        "signature": list(space.sig),
        "det": rl.rational_str(space.det),
        "abs_det": abs(int(space.det)),
    }
    if problem.frame is not None:
        frame = problem.frame
        info["frame"] = {
            "valid": True,
            "violations": [],
            "full_rank": frame.full_rank,
            "n": frame.n,
        }
        try:
            info["lambda_star"] = enum_bound(frame)
        except LinearlyDependent:
            info["lambda_star"] = None
    elif problem.frame_error is not None:
        info["frame"] = {
            "valid": False,
            "violations": [
                {"code": code, "indices": list(idx), "message": msg}
                for code, idx, msg in problem.frame_error.violations
            ],
        }
    if problem.c is not None:
        info["Q_c"] = rl.rational_str(problem.space.Q(problem.c))
    return 0, canonical_json(info)


def _cmd_f_eval(problem, args):
    frame = _need_frame(problem)
    U = _parse_matrix(args.U, "--U")
    fv = f_value(frame, U)
    xd = x_data(frame, U)
    return 0, canonical_json(
        {
            "value": rl.rational_str(fv.value),
            "in_component": fv.in_component,
            "x": [rl.rational_str(x) for x in xd.x],
        }
    )


def _cmd_g_eval(problem, args, rule):
    frame = _need_frame(problem)
    U = _parse_matrix(args.U, "--U")
    chart = simplex_chart(problem.space, frame)
    res = g_value(chart, U, rule=rule)
    return 0, canonical_json(
        {
            "value": res.value,
            "error_estimate": res.error_estimate,
            "rule_used": res.rule_used,
            "evaluations": res.evaluations,
        }
    )


def _theta_payload(tv):
    return canonical_json(
        {
            "value": [tv.value.real, tv.value.imag],
            "tail_bound": tv.tail_bound,
            "terms": tv.terms,
            "radius": tv.radius,
        }
    )


def _cmd_theta_f(problem, args):
    frame = _need_frame(problem)
    Z = _siegel_from_args(args, frame.n)
    tv = theta_f(problem.space, frame, H=problem.H, K=problem.K, Z=Z, eps=args.eps)
    return 0, _theta_payload(tv)


def _cmd_theta_g(problem, args, rule):
    frame = _need_frame(problem)
    Z = _siegel_from_args(args, frame.n)
    tv = theta_g(
        problem.space,
        frame,
        H=problem.H,
        K=problem.K,
        Z=Z,
        eps=args.eps,
        rule=rule,
        threads=args.threads,
    )
    return 0, _theta_payload(tv)


def _cmd_fourier(problem, args):
    frame = _need_frame(problem)
    if problem.H is not None and any(x != 0 for row in problem.H for x in row):
        raise ConeThetaError("fourier coefficients support H = 0 only")
    T = _parse_matrix(args.T, "--T")
    value = fourier_coefficient(problem.space, frame, problem.K, T)
    return 0, canonical_json({"value": [value.real, value.imag]})


def _cmd_cosets(problem, args):
    n = args.n if args.n else (problem.n or 1)
    cs = cosets(problem.space, n)
    reps = [
        [[rl.rational_str(x) for x in row] for row in J] for J in cs.representatives
    ]
    return 0, canonical_json({"count": len(cs.representatives), "representatives": reps})


def _finish_verify(report, args):
    payload = canonical_json(report.json_dict())
    if args.csv:
        append_report_csv(report, args.csv)
    elif args.out:
        append_report_csv(report, args.out + ".csv")
    code = 0 if (report.abs_err <= args.tol if args.tol is not None else report.passed) else 2
    return code, payload


def _cmd_verify_translate(problem, args, rule):
    frame = _need_frame(problem)
    S = _parse_matrix(args.S, "--S")
    Z = _siegel_from_args(args, frame.n)
    report = verify_translate(
        problem.space, frame, problem.H, problem.K, S, Z, eps=args.eps, rule=rule,
        threads=args.threads,
    )
    return _finish_verify(report, args)


def _cmd_verify_invert(problem, args, rule):
    frame = _need_frame(problem)
    Z = _siegel_from_args(args, frame.n)
    report = verify_invert(
        problem.space, frame, problem.H, problem.K, Z, eps=args.eps, rule=rule,
        threads=args.threads,
    )
    return _finish_verify(report, args)


def _cmd_verify_limit(problem, args, rule):
    frame = _need_frame(problem)
    U = _parse_matrix(args.U, "--U")
    ygrid = tuple(float(x) for x in args.ygrid.split(","))
    report = verify_limit(problem.space, frame, U, y_grid=ygrid, rule=rule)
    return _finish_verify(report, args)


def build_parser() -> _Parser:
    parser = _Parser(prog="conetheta", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--problem", required=True, help="problem definition JSON file")
        p.add_argument("--eps", type=float, default=1e-8, help="truncation target")
        p.add_argument("--rule", default="gm:7", help="cubature rule descriptor")
        p.add_argument("--ygrid", default=",".join(str(y) for y in DEFAULT_Y_GRID))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--csv", default=None, help="aggregate CSV path (verify commands)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tol", type=float, default=None, help="override pass tolerance")
        if name in ("f-eval", "g-eval", "verify-limit"):
            p.add_argument("--U", required=True, help="matrix, rows ';'-separated")
        if name in ("theta-f", "theta-g", "verify-translate", "verify-invert"):
            p.add_argument("--zre", default=None, help="row-major real part of Z")
            p.add_argument("--zim", default=None, help="row-major imaginary part of Z")
        if name == "verify-translate":
            p.add_argument("--S", required=True, help="integral symmetric matrix")
        if name == "fourier":
            p.add_argument("--T", required=True, help="semi-integral symmetric index")
        if name == "cosets":
            p.add_argument("--n", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.threads < 1:
            raise ConeThetaError("--threads must be >= 1")
        args.eps = max(args.eps, 1e-10)
        problem = load_problem(args.problem)
        rule = _resolve_rule(args)
        if args.command == "inspect":
            code, payload = _cmd_inspect(problem, args)
        elif args.command == "f-eval":
            code, payload = _cmd_f_eval(problem, args)
        elif args.command == "g-eval":
            code, payload = _cmd_g_eval(problem, args, rule)
        elif args.command == "theta-f":
            code, payload = _cmd_theta_f(problem, args)
        elif args.command == "theta-g":
            code, payload = _cmd_theta_g(problem, args, rule)
        elif args.command == "fourier":
            code, payload = _cmd_fourier(problem, args)
        elif args.command == "cosets":
            code, payload = _cmd_cosets(problem, args)
        elif args.command == "verify-translate":
            code, payload = _cmd_verify_translate(problem, args, rule)
        elif args.command == "verify-invert":
            code, payload = _cmd_verify_invert(problem, args, rule)
        else:
            code, payload = _cmd_verify_limit(problem, args, rule)
    except FrameError as exc:
        sys.stderr.write(f"invalid frame:\n")
        for _, _, msg in exc.violations:
            sys.stderr.write(f"  - {msg}\n")
        return 1
    except ConeThetaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    _emit(payload, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
