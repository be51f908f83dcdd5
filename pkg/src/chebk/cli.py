"""Command-line front end.

    chebk run SPEC [--task T] [--out RESULT] [--samples M] [--grid CSV] ...
    chebk sample RESULT --samples M [--out CSV]

Problem specs and results use the canonical text format of
:mod:`chebk.serialization`. Exit codes: 0 success, 1 unreadable or invalid
input, 2 infeasible problem or solver failure, 3 a verification check failed
(the result is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import chebyshev as cb
from . import serialization as ser
from .capacity import l2_monic_min, sandwich
from .chebyshev import ChebPoly, RationalWeight
from .errors import (
    AllPatternsInfeasible,
    ChebkError,
    IntervalError,
    QuadratureNonConvergence,
    SolverFailure,
    SpecParseError,
    WeightInvalid,
)
from .first_kind import solve_first_kind, solve_first_kind_restricted
from .intervals import IntervalUnion, parse_scalar, validate
from .second_kind import auto_degree, default_degree, solve_second_kind

log = logging.getLogger("chebk")

TASKS = ("cheb1", "cheb1-restricted", "cheb2", "capacity", "sample")
FORMAT = "chebk-result"
VERSION = 1
MOMENT_HEAD = 10

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


@dataclass
class ProblemSpec:
    task: str
    K: IntervalUnion
    intervals_raw: list
    weight: RationalWeight | None
    weight_raw: dict | None
    N: int
    d: int | None = None
    delta_target: float | None = None
    d_max: int = 200
    samples: int | None = None
    precision: int = 17
    result: str | None = None


def _scalar_list(values, what):
    if not isinstance(values, list) or not values:
        raise SpecParseError(f"{what} must be a nonempty list")
    try:
        return [parse_scalar(v) for v in values]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad scalar in {what}: {exc}") from None


def parse_weight(raw):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise SpecParseError("weight must be a map with sigma, omega and basis")
    basis = raw.get("basis", "monomial")
    sigma = _scalar_list(raw.get("sigma"), "weight.sigma")
    omega = _scalar_list(raw.get("omega", [1]), "weight.omega")
    if basis == "monomial":
        return RationalWeight.from_monomial(sigma, omega)
    if basis == "chebyshev":
        return RationalWeight(ChebPoly(sigma), ChebPoly(omega))
    raise SpecParseError(f"unknown weight basis {basis!r}")


def parse_spec(doc, task=None) -> ProblemSpec:
    """Validate a problem document (already decoded) into a ProblemSpec."""
    if not isinstance(doc, dict):
        raise SpecParseError("a problem spec must be a map")
    task = task or doc.get("task")
    if task not in TASKS:
        raise SpecParseError(f"task must be one of {', '.join(TASKS)}")
    if task == "sample":
        if "result" not in doc:
            raise SpecParseError("a sample spec needs a 'result' path")
        samples = int(doc.get("samples", 100))
        return ProblemSpec(task, validate([(-1, 1)]), [], None, None, 0,
                           samples=samples, precision=int(doc.get("precision", 17)),
                           result=str(doc["result"]))
    raw = doc.get("intervals")
    if not isinstance(raw, list):
        raise SpecParseError("intervals must be a list of pairs")
    try:
        K = validate(raw)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"invalid intervals: {exc}") from None
    try:
        weight = parse_weight(doc.get("weight"))
        if weight is not None:
            weight.validate_on(K)
    except WeightInvalid as exc:
        raise SpecParseError(f"invalid weight: {exc}") from None
    N = doc.get("N", doc.get("degree"))
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise SpecParseError("N must be a positive integer")
    d = doc.get("d")
    if d is not None and (not isinstance(d, int) or d < N):
        raise SpecParseError("d must be an integer >= N")
    dt = doc.get("delta_target")
    try:
        dt = None if dt is None else parse_scalar(dt)
    except (TypeError, ValueError) as exc:
        raise SpecParseError(f"bad delta_target: {exc}") from None
    if dt is not None and not dt > 0:
        raise SpecParseError("delta_target must be positive")
    return ProblemSpec(
        task=task, K=K, intervals_raw=raw, weight=weight, weight_raw=doc.get("weight"),
        N=N, d=d, delta_target=dt, d_max=int(doc.get("d_max", 200)),
        samples=doc.get("samples"), precision=int(doc.get("precision", 17)))


# ---------------------------------------------------------------------------
# result documents


def _endpoint_record(raw, value):
    text = raw if isinstance(raw, str) else repr(raw)
    try:
        exact = Fraction(text.strip()) == Fraction(value)
    except (ValueError, ZeroDivisionError):
        exact = False
    return {"input": text, "value": value, "exact": exact}


def _poly_doc(P: ChebPoly):
    return {"chebyshev_T": [float(v) for v in P.to_T().coeffs],
            "monomial": [float(v) for v in cb.cheb_to_monomial(P)]}


def _input_doc(spec: ProblemSpec):
    rounding = [[_endpoint_record(r, v) for r, v in zip(raw, pair)]
                for raw, pair in zip(sorted(spec.intervals_raw, key=lambda p: parse_scalar(p[0])),
                                     spec.K.intervals)]
    w = None
    if spec.weight is not None:
        w = {"sigma_T": [float(v) for v in spec.weight.sigma.coeffs],
             "omega_T": [float(v) for v in spec.weight.omega.coeffs]}
    return {"intervals": spec.K.as_lists(), "endpoint_rounding": rounding, "weight": w}


def _task_echo(spec: ProblemSpec, opts):
    echo = {"task": spec.task, "N": spec.N}
    if spec.weight_raw is not None:
        echo["weight"] = spec.weight_raw
    echo["intervals"] = spec.intervals_raw
    if spec.task == "cheb2":
        echo["d"] = spec.d
        echo["delta_target"] = spec.delta_target
        echo["d_max"] = spec.d_max
    echo["tol"] = opts["tol"]
    echo["max_iter"] = opts["max_iter"]
    return echo


def _weight(spec):
    return spec.weight if spec.weight is not None else RationalWeight.unit()


def _run_first_kind(spec, opts):
    restricted = spec.task == "cheb1-restricted"
    fn = solve_first_kind_restricted if restricted else solve_first_kind
    res = fn(spec.K, spec.weight, spec.N, tol=opts["tol"], max_iter=opts["max_iter"])
    value = {"t_value": res.t_value, "attained_sup_norm": res.residuals["attained_sup_norm"]}
    cert = {
        "equioscillation": [{"x": x, "sign": s} for x, s in res.equioscillation],
        "alternation_count": res.alternation_count,
        "gap_roots": res.gap_roots(),
    }
    if restricted:
        cert["pattern"] = list(res.pattern)
        cert["verified"] = res.verified
        cert["patterns"] = [{"pattern": list(p), "status": s, "t_value": v}
                            for p, s, v in res.pattern_values]
    checks = {}
    failed = []
    if restricted and not res.verified:
        failed.append("restricted_roots")
    if opts["verify"]:
        attained = res.residuals["attained_sup_norm"]
        checks["sup_norm_matches"] = abs(attained - res.t_value) <= 1e-6 * res.t_value
        if not restricted:
            # gap sign constraints void the alternation count of the free problem
            checks["alternations"] = res.alternation_count >= spec.N + 1
        checks["monic"] = res.poly.padded(spec.N + 1)[spec.N] == cb.monic_leading(spec.N)
        failed += [k for k, v in checks.items() if not v]
    resid = {k: v for k, v in res.residuals.items() if k != "attained_sup_norm"}
    return res.poly, value, cert, resid, checks, failed, {"c": res.t_value}


def _run_second_kind(spec, opts):
    kw = dict(tol=opts["tol"], max_iter=opts["max_iter"])
    if spec.delta_target is not None:
        res = auto_degree(spec.K, spec.weight, spec.N, spec.delta_target, d0=spec.d,
                          d_max=spec.d_max, **kw)
    else:
        d = spec.d if spec.d is not None else default_degree(spec.N)
        res = solve_second_kind(spec.K, spec.weight, spec.N, d, **kw)
    value = {"ersatz_value": res.ersatz_value, "l1_value": res.l1_value,
             "delta": res.delta, "d": res.d}
    head = min(res.d, MOMENT_HEAD) + 1
    cert = {
        "moment_heads": [{"y_plus": list(yp[:head]), "y_minus": list(ym[:head])}
                         for yp, ym in res.moment_vectors],
        "roots": res.roots_report,
        "uniqueness_certified": res.uniqueness_certified,
    }
    if res.history:
        cert["history"] = [{"d": d, "delta": dl} for d, dl in res.history]
    checks = {}
    failed = []
    if spec.delta_target is not None and not res.target_reached:
        failed.append("delta_target")
    if opts["verify"]:
        checks["sandwich"] = res.ersatz_value <= res.l1_value * (1 + 1e-9)
        checks["delta_range"] = 0.0 <= res.delta < 1.0
        checks["roots_simple_inside"] = res.roots_report["all_simple_real_inside"]
        failed += [k for k, v in checks.items() if not v]
    return res.poly, value, cert, res.residuals, checks, failed, {}


def _run_capacity(spec, opts):
    kw = dict(tol=opts["tol"], max_iter=opts["max_iter"])
    P, l2 = l2_monic_min(spec.K, spec.N)
    sw = sandwich(spec.K, spec.N, **kw)
    N = spec.N
    value = {
        "l2_norm": l2, "l2_estimate": l2 ** (1.0 / N),
        "t_value": sw["t_value"], "sup_norm_estimate": sw["t_value"] ** (1.0 / N),
    }
    cert = {"bounds": {"lower": sw["lower"], "upper": sw["upper"]}}
    checks = {}
    failed = []
    if opts["verify"]:
        slack = 1e-9 + 10 * opts["tol"] * sw["upper"]
        checks["sandwich"] = sw["lower"] - slack <= l2 <= sw["upper"] + slack
        failed += [k for k, v in checks.items() if not v]
    return P, value, cert, {}, checks, failed, {}


def run_spec(spec: ProblemSpec, opts) -> tuple[dict, int]:
    """Solve a parsed spec; returns (result document, exit code)."""
    runner = {"cheb1": _run_first_kind, "cheb1-restricted": _run_first_kind,
              "cheb2": _run_second_kind, "capacity": _run_capacity}[spec.task]
    P, value, cert, resid, checks, failed, extra = runner(spec, opts)
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "task": _task_echo(spec, opts),
        "input": _input_doc(spec),
        "poly": _poly_doc(P),
        "value": value,
        "certificate": cert,
        "solver": resid,
        "checks": checks,
        "status": "verification_failed" if failed else "ok",
        "failed_checks": failed,
    }
    if "c" in extra:
        doc["sample_scale"] = extra["c"]
    return doc, (EXIT_VERIFY if failed else EXIT_OK)


# ---------------------------------------------------------------------------
# sample grids


def sample_grid(doc, samples: int):
    """Rows of the plot grid for a result document: header and float rows."""
    if doc.get("format") != FORMAT:
        raise SpecParseError("not a chebk result document")
    if samples < 1:
        raise SpecParseError("samples must be positive")
    try:
        K = IntervalUnion(tuple(tuple(ser.to_float(v) for v in pair)
                                for pair in doc["input"]["intervals"]))
        P = ChebPoly([ser.to_float(v) for v in doc["poly"]["chebyshev_T"]])
        w = doc["input"].get("weight")
        weight = RationalWeight.unit() if w is None else RationalWeight(
            ChebPoly([ser.to_float(v) for v in w["sigma_T"]]),
            ChebPoly([ser.to_float(v) for v in w["omega_T"]]))
        task = doc["task"]["task"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"incomplete result document: {exc}") from None
    xs = np.concatenate([np.linspace(a, b, samples) for a, b in K])
    cols = [xs, np.asarray(cb.evaluate(P, xs), dtype=float).reshape(-1)]
    header = ["x", "P"]
    if task in ("cheb1", "cheb1-restricted"):
        c = ser.to_float(doc["value"]["t_value"])
        cw = c * np.asarray(weight(xs), dtype=float).reshape(-1)
        cols += [cw, -cw]
        header += ["+c*w", "-c*w"]
    return header, np.column_stack(cols)


def format_grid(header, rows, precision: int = 17) -> str:
    fmt = "%%.%dg" % precision
    lines = [",".join(header)]
    lines += [",".join(fmt % v for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _grid_path(out, explicit):
    if explicit:
        return explicit
    if out in (None, "-"):
        return None
    return (out[:-5] if out.endswith(".json") else out) + ".csv"


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebk", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a problem spec")
    run.add_argument("spec", help="problem spec file")
    run.add_argument("--task", choices=TASKS, help="override the task in the spec")
    run.add_argument("--out", help="result document path (default: stdout)")
    run.add_argument("--samples", type=int, help="also write a grid with this many points per interval")
    run.add_argument("--grid", help="grid file path (default: derived from --out)")
    run.add_argument("--delta-target", type=float, help="second kind: raise d until delta <= target")
    run.add_argument("--d", type=int, help="second kind: moment degree (initial degree with --delta-target)")
    run.add_argument("--tol", type=float, default=1e-8, help="solver tolerance (default 1e-8)")
    run.add_argument("--max-iter", type=int, default=200, help="solver iteration cap (default 200)")
    run.add_argument("--verify", action="store_true", help="run post-hoc checks, exit 3 on violation")

    sample = sub.add_parser("sample", help="evaluate a result on a grid")
    sample.add_argument("result", help="result document")
    sample.add_argument("--samples", type=int, default=100, help="points per interval (default 100)")
    sample.add_argument("--out", help="CSV path (default: stdout)")
    sample.add_argument("--precision", type=int, default=17, help="significant digits (default 17)")
    return parser


def _cmd_sample(result_path, samples, out, precision):
    doc = ser.load(result_path)
    header, rows = sample_grid(doc, samples)
    _write(format_grid(header, rows, precision), out)
    return EXIT_OK


def _cmd_run(args):
    doc = ser.load(args.spec)
    spec = parse_spec(doc, args.task)
    if spec.task == "sample":
        return _cmd_sample(spec.result, args.samples or spec.samples, args.out, spec.precision)
    if args.d is not None:
        if args.d < spec.N:
            raise SpecParseError("--d must be at least N")
        spec.d = args.d
    if args.delta_target is not None:
        if not args.delta_target > 0:
            raise SpecParseError("--delta-target must be positive")
        spec.delta_target = args.delta_target
    samples = args.samples if args.samples is not None else spec.samples
    grid = _grid_path(args.out, args.grid)
    if samples is not None and grid is None:
        raise SpecParseError("sample grids need --grid or a file --out")
    opts = {"tol": args.tol, "max_iter": args.max_iter, "verify": args.verify}
    start = time.perf_counter()
    try:
        result, code = run_spec(spec, opts)
    finally:
        # wall time stays out of the document so reruns are byte-identical
        print(f"chebk: wall time {time.perf_counter() - start:.3f} s", file=sys.stderr)
    _write(ser.dumps(result), args.out)
    if samples is not None:
        header, rows = sample_grid(result, int(samples))
        _write(format_grid(header, rows, spec.precision), grid)
    if code == EXIT_VERIFY:
        print("chebk: verification failed: " + ", ".join(result["failed_checks"]), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "sample":
            return _cmd_sample(args.result, args.samples, args.out, args.precision)
        return _cmd_run(args)
    except (SpecParseError, IntervalError, WeightInvalid) as exc:
        print(f"chebk: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverFailure, AllPatternsInfeasible, QuadratureNonConvergence) as exc:
        print(f"chebk: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ChebkError as exc:
        print(f"chebk: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
