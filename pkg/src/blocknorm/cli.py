"""Command-line entry point: ``blocknorm reproduce | check | search | falsify``.

Exit codes: 0 inequality holds / normality certified, 1 reproduction
mismatch, 2 certified violation, 3 indeterminate, 64 bad input or flags,
65 mathematical precondition not met.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import blockineq as bi
from . import serialize as ser
from .errors import BlockNormError, EigenvalueCollision, NotHermitian, NotPositiveDefinite, NumericalDegeneracy
from .falsifier import Mode, SearchConfig, X_KINDS, planted_problem5, search
from .matcore import DEFAULT_TOL, ToleranceConfig, herm_eigen, operator_norm, pd_inverse, two_by_two_norm

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_VIOLATION = 2
EXIT_INDETERMINATE = 3
EXIT_USAGE = 64
EXIT_PRECONDITION = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _eprint(*args):
    print(*args, file=sys.stderr)


def _tol_from(args) -> ToleranceConfig:
    try:
        return ToleranceConfig(args.abs_tol, args.rel_tol, args.band)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _tol_echo(tol: ToleranceConfig) -> dict:
    return {"abs_tol": tol.abs_tol, "rel_tol": tol.rel_tol, "band": tol.indeterminate_band}


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# reproduce


def reproduction_rows(tol_override=None) -> list[tuple[str, float, float, str, float]]:
    """``(name, expected, computed, relation, tolerance)`` for each check."""

    def t(default):
        return default if tol_override is None else tol_override

    ce = bi.commuting_counterexample()
    block_norm = operator_norm(ce.instance.h)
    slack_min = herm_eigen(ce.c - pd_inverse(ce.instance.a)).min
    shift_d = np.diag([2.0, 3.0, 1.0]).astype(complex)
    shift_u = np.roll(np.eye(3, dtype=complex), 1, axis=1)
    ab = bi.alpha_beta(shift_d, shift_d @ shift_u)
    prop = bi.compare_inverse_sums(np.diag([1.0, 2.0, 3.0]), shift_u)
    d5, u5 = planted_problem5(3)
    planted = bi.peel_falsify(d5 @ u5)
    planted_gap = planted.certificate.gap if isinstance(planted, bi.Violation) else -math.inf
    golden = (5 + math.sqrt(5)) / 2
    return [
        ("sum_norm", 3.5, ce.sum_norm, "eq", t(1e-12)),
        ("block_lower_bound", golden, ce.block_lower_bound, "eq", t(1e-12)),
        ("two_by_two_identity", operator_norm(np.array([[3.0, 1.0], [1.0, 2.0]])), two_by_two_norm(3.0, 2.0), "eq", t(1e-10)),
        ("block_norm", golden, block_norm, "ge", t(1e-10)),
        ("counterexample_gap", 0.0, block_norm - ce.sum_norm, "gt", t(0.0)),
        ("slack_min_eigenvalue", 0.0, slack_min, "ge", t(1e-12)),
        ("inverse_sum_lhs", 10.0 / 3.0, prop.lhs, "eq", t(1e-12)),
        ("inverse_sum_rhs", 3.5, prop.rhs, "eq", t(1e-12)),
        ("weighted_shift_alpha", 5.0, ab.alpha, "eq", t(1e-10)),
        ("weighted_shift_beta", 12.0, ab.beta, "eq", t(1e-10)),
        ("planted_violation_gap", 1.0, planted_gap, "eq", t(1e-9)),
    ]


def _row_passes(expected, computed, relation, tol) -> bool:
    if relation == "eq":
        return abs(computed - expected) <= tol
    if relation == "ge":
        return computed >= expected - tol
    return computed > expected + tol


def cmd_reproduce(args) -> int:
    start = time.perf_counter()
    if args.tol is not None and not args.tol >= 0:
        raise UsageError("--tol must be nonnegative")
    rows = reproduction_rows(args.tol)
    ok = True
    print(f"{'quantity':<24}{'expected':>20}{'computed':>22}  {'rel':<3}{'tol':>9}  result")
    for name, expected, computed, relation, tol in rows:
        passed = _row_passes(expected, computed, relation, tol)
        ok &= passed
        print(f"{name:<24}{expected:>20.11g}{computed:>22.15g}  {relation:<3}{tol:>9.1e}  {'PASS' if passed else 'FAIL'}")
    _eprint(f"reproduce finished in {time.perf_counter() - start:.3f} s")
    return EXIT_OK if ok else EXIT_MISMATCH


# check


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ser.MalformedInput(path, f"cannot read file ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ser.MalformedInput(path, f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _instance_object(obj, index: int):
    if isinstance(obj, dict) and "schema_version" in obj:
        certs = ser.embedded_certificates(ser.read_report(obj))
        if not 0 <= index < len(certs):
            raise ser.MalformedInput("results", f"no certificate at index {index} ({len(certs)} present)")
        return ser.certificate_instance(certs[index], f"certificate[{index}]"), f"certificate[{index}].instance"
    if isinstance(obj, dict) and "instance" in obj:
        return ser.certificate_instance(obj), "certificate.instance"
    return obj, "instance"


def _witness_json(inst, tol):
    try:
        w = bi.resolvent_witness(inst, tol)
    except NumericalDegeneracy as exc:
        return {"status": "degenerate", "reason": str(exc)}
    if w is None:
        return None
    return {
        "status": "ok",
        "lambda": w.lam,
        "resolvent_residual": w.resolvent_residual,
        "beta": w.beta,
        "xi": ser.matrix_to_json(w.xi.reshape(-1, 1)),
        "eta": ser.matrix_to_json(w.eta.reshape(-1, 1)),
    }


def cmd_check(args) -> int:
    tol = _tol_from(args)
    obj, field = _instance_object(_load_json(args.input), args.index)
    a, x, b = ser.instance_matrices(obj, field)
    try:
        inst = bi.make_instance(a, x, b, tol)
    except NotHermitian as exc:
        raise ser.MalformedInput(field, str(exc)) from exc
    except NotPositiveDefinite as exc:
        _eprint(f"precondition: {exc}")
        return EXIT_PRECONDITION
    block_norm = operator_norm(inst.h)
    sum_norm = operator_norm(inst.a + inst.b)
    g = block_norm - sum_norm
    ab = bi.alpha_beta(inst.a, inst.x, tol)
    cert = bi.certify(inst, tol) if inst.feasible else None
    if not inst.feasible:
        verdict, code = "infeasible", EXIT_PRECONDITION
    elif cert is not None:
        verdict, code = "violation", EXIT_VIOLATION
    elif g <= tol.bound(max(1.0, sum_norm)):
        verdict, code = "holds", EXIT_OK
    else:
        verdict, code = "indeterminate", EXIT_INDETERMINATE
    results = {
        "feasible": inst.feasible,
        "block_norm": block_norm,
        "sum_norm": sum_norm,
        "gap": g,
        "alpha": ab.alpha,
        "beta": ab.beta,
        "trichotomy": bi.classify_trichotomy(inst.a, inst.x, tol).value,
        "both_arrangements_psd": bi.both_arrangements_psd(inst, tol),
        "witness": _witness_json(inst, tol) if g > 0 else None,
        "certificate": None if cert is None else ser.certificate_to_json(cert),
        "verdict": verdict,
    }
    command = {"name": "check", "input": args.input, "index": args.index, **_tol_echo(tol)}
    _write(ser.dumps(ser.make_report(command, results, code == EXIT_OK)), None)
    return code


# search


def cmd_search(args) -> int:
    tol = _tol_from(args)
    try:
        cfg = SearchConfig(
            mode=Mode(args.mode),
            dim=args.dim,
            trials=args.trials,
            seed=args.seed,
            hill_climb_steps=args.hill_climb_steps,
            condition_cap=args.cond_cap,
            x_kind=args.x_kind,
            k_max=args.k_max,
            workers=args.workers,
            tol=tol,
        )
    except (ValueError, BlockNormError) as exc:
        raise UsageError(str(exc)) from exc
    report = search(cfg)
    command = {"name": "search", **cfg.echo(), **_tol_echo(tol)}
    text = ser.dumps(ser.make_report(command, ser.search_results(report), report.alpha_greater_violations == 0))
    _write(text, args.out)
    _eprint(
        f"search: {cfg.trials} trials, {len(report.violations)} certified violations, "
        f"best gap {report.best_gap}, {report.elapsed:.2f} s"
    )
    return EXIT_OK


# falsify


def cmd_falsify(args) -> int:
    tol = _tol_from(args)
    x = ser.matrix_from_json(_load_json(args.input), "X")
    if x.shape[0] != x.shape[1]:
        raise ser.MalformedInput("X", f"must be square, got {x.shape[0]}x{x.shape[1]}")
    if not args.k_max >= 1:
        raise UsageError("--k-max must be at least 1")
    command = {"name": "falsify", "input": args.input, "k_max": args.k_max, **_tol_echo(tol)}
    results = dict.fromkeys(sorted(ser.FALSIFY_RESULT_KEYS))
    try:
        outcome = bi.peel_falsify(x, tol, k_max=args.k_max)
    except EigenvalueCollision as exc:
        _eprint(f"precondition: {exc}")
        results.update(outcome="eigenvalue_collision", reason=str(exc))
        _write(ser.dumps(ser.make_report(command, results, False)), args.out)
        return EXIT_PRECONDITION
    if isinstance(outcome, bi.Violation):
        results.update(
            outcome="violation",
            stage=outcome.stage,
            k=outcome.k,
            certificate=ser.certificate_to_json(outcome.certificate),
        )
        code = EXIT_VIOLATION
    elif isinstance(outcome, bi.NormalCertified):
        results.update(outcome="normal_certified", commutator_defect=outcome.commutator_defect)
        code = EXIT_OK
    else:
        results.update(
            outcome="indeterminate",
            stage=outcome.stage,
            margin_shortfall=ser._finite_or_none(outcome.margin_shortfall),
            reason=outcome.reason,
        )
        code = EXIT_INDETERMINATE
    _write(ser.dumps(ser.make_report(command, results, code == EXIT_OK)), args.out)
    return code


def build_parser() -> argparse.ArgumentParser:
    tol_flags = _Parser(add_help=False)
    tol_flags.add_argument("--abs-tol", type=float, default=DEFAULT_TOL.abs_tol)
    tol_flags.add_argument("--rel-tol", type=float, default=DEFAULT_TOL.rel_tol)
    tol_flags.add_argument("--band", type=float, default=DEFAULT_TOL.indeterminate_band)

    parser = _Parser(prog="blocknorm", description="Check and falsify ||[[A,X],[X*,B]]|| <= ||A+B||.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reproduce", help="recompute the known closed-form values")
    p.add_argument("--tol", type=float, default=None, help="override every comparison tolerance")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("check", parents=[tol_flags], help="evaluate an (A, X, B) triple")
    p.add_argument("input", help="instance, certificate, or search/falsify report JSON")
    p.add_argument("--index", type=int, default=0, help="which certificate of a report to check")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", parents=[tol_flags], help="seeded random search for violations")
    p.add_argument("--mode", choices=[m.value for m in Mode], required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--hill-climb-steps", type=int, default=50)
    p.add_argument("--cond-cap", type=float, default=1e4)
    p.add_argument("--x-kind", choices=X_KINDS, default="gaussian")
    p.add_argument("--k-max", type=float, default=bi.K_MAX)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("falsify", parents=[tol_flags], help="certify normality of X or find a violation")
    p.add_argument("input", help="MatrixFile JSON holding a square X")
    p.add_argument("--k-max", type=float, default=bi.K_MAX)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_falsify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _eprint(f"usage error: {exc}")
        return EXIT_USAGE
    except ser.MalformedInput as exc:
        _eprint(f"malformed input: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
