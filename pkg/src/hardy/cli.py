"""Command-line entry point.

    hardy constant|check|sharp|suite [--instance PATH] [--p X --q Y]
          [--mode strict|closed] [--f PATH] [--seed N]
          [--format json|csv|text] [--verbose]

Exit codes: 0 success, 2 unreadable input (bad file, parse error, missing
point id), 3 ``q < p``, 4 inequality violation or failing suite.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .core import (STRICT, ExponentError, ExponentOrderError, Exponents,
                   candidate_products, cb_constant, compute_B_line,
                   compute_constant, parse_exponent)
from .instance import (DiscreteInstance, FunctionOnX, InstanceError,
                       LineInstance, build_conjugate_hardy,
                       build_continuous_hardy, build_discrete_hardy,
                       discretize, dump_instance, load_instance)
from .measure import CLOSED
from .operator import lhs, ratio, rhs
from .sharpness import (UNBOUNDED, DEFAULT_MAX_ITER, DEFAULT_RESTARTS,
                        DEFAULT_TOL, detect_unbounded, sandwich_report)
from .suites import SUITES, gap_instance, pathology_instance, run_all

EXIT_OK, EXIT_INPUT, EXIT_ORDER, EXIT_VIOLATION = 0, 2, 3, 4


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    return json.dumps(x)


def to_json(obj, indent=2, _depth=0) -> str:
    """JSON with every float written to 17 significant digits; infinities
    become the strings ``"inf"`` / ``"-inf"``."""
    pad = " " * (indent * (_depth + 1))
    end = " " * (indent * _depth)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _depth + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _fmt(obj)


def _scalar_text(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, dict)):
        return json.dumps(v, default=str)
    return str(v)


def _flat_verdicts(verdicts):
    return ";".join(f"{v['name']}={'pass' if v['passed'] else 'fail'}"
                    for v in verdicts)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report) + "\n"
    rows = report.get("rows")
    if fmt == "csv":
        rows = rows if rows is not None else [report]
        flat = []
        for row in rows:
            r = {}
            for k, v in row.items():
                if k == "verdicts":
                    r[k] = _flat_verdicts(v)
                elif isinstance(v, (dict, list)):
                    continue
                else:
                    r[k] = _scalar_text(v) if v is not None else ""
            flat.append(r)
        keys = list(dict.fromkeys(k for r in flat for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(flat)
        return buf.getvalue()
    lines = []
    for row in (rows if rows is not None else [report]):
        for k, v in row.items():
            if k == "verdicts":
                for vd in v:
                    mark = "PASS" if vd["passed"] else "FAIL"
                    lines.append(f"  [{mark}] {vd['name']}: {vd.get('detail', '')}")
            elif isinstance(v, dict) and k != "witness_f":
                lines.append(f"{k}:")
                lines.extend(f"  {kk}: {_scalar_text(vv)}" for kk, vv in v.items())
            elif k == "witness_f" or (isinstance(v, list) and len(v) > 8):
                lines.append(f"{k}: <{len(v)} entries>")
            else:
                lines.append(f"{k}: {_scalar_text(v) if v is not None else '-'}")
        lines.append("")
    return "\n".join(lines)


def _verdict(name, passed, detail=""):
    return {"name": name, "passed": bool(passed), "detail": detail}


# ---------------------------------------------------------------------------
# inputs


def _exponents(args) -> Exponents:
    return Exponents(args.p, args.q)


def _load(args):
    """``(discrete instance, line instance or None)``."""
    if not args.instance:
        raise InputError("--instance is required for this command")
    try:
        inst = load_instance(args.instance)
    except OSError as exc:
        raise InputError(f"cannot read instance file: {exc}") from exc
    except InstanceError as exc:
        raise InputError(f"{args.instance}: {exc}") from exc
    if isinstance(inst, LineInstance):
        return discretize(inst, args.resolution), inst
    return inst, None


def load_function(path, inst: DiscreteInstance) -> FunctionOnX:
    """Read ``{"id": value}`` (optionally nested under ``"values"``)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read function file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc
    if isinstance(doc, dict) and isinstance(doc.get("values"), dict):
        doc = doc["values"]
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected an object mapping point ids to values")
    missing = [i for i in inst.ids if i not in doc]
    if missing:
        raise InputError(f"{path}: missing value for point id {missing[0]!r}")
    unknown = sorted(set(doc) - set(inst.ids))
    if unknown:
        raise InputError(f"{path}: unknown point id {unknown[0]!r}")
    vals = []
    for i in inst.ids:
        try:
            v = parse_exponent(doc[i]) if isinstance(doc[i], str) else float(doc[i])
        except (TypeError, ValueError) as exc:
            raise InputError(f"{path}: value for {i!r} is not a number") from exc
        if not (v >= 0 and math.isfinite(v)):
            raise InputError(f"{path}: value for {i!r} must be finite and >= 0")
        vals.append(v)
    return FunctionOnX(inst.ids, np.array(vals))


# ---------------------------------------------------------------------------
# commands


def _base(inst, e, mode):
    rep = compute_constant(inst, e, mode)
    other = compute_constant(inst, e, CLOSED if mode == STRICT else STRICT)
    b, bp = (rep, other) if mode == STRICT else (other, rep)
    c_b = cb_constant(e)
    return rep, {
        "p": e.p, "q": e.q, "mode": mode, "points": inst.size,
        "B": b.value, "B_witness_r": b.witness_r, "B_witness_side": b.witness_side,
        "B_prime": bp.value, "B_prime_witness_r": bp.witness_r,
        "C_B": c_b,
        "C_B*B": c_b * b.value if b.value else 0.0,
        "C_B*B_prime": c_b * bp.value if bp.value else 0.0,
    }


def _candidates(inst, e, mode):
    s, at, above = candidate_products(inst, e, mode)
    return [{"r": float(r), "at": float(a), "just_above": float(b)}
            for r, a, b in zip(s, at, above)]


def cmd_constant(args, timings):
    inst, line = _load(args)
    e = _exponents(args)
    t0 = time.perf_counter()
    rep, out = _base(inst, e, args.mode)
    if line is not None:
        out["B_line"] = compute_B_line(line, e).value
    cert = detect_unbounded(inst, e, args.mode)
    verdicts = []
    if cert is not None or rep.value == math.inf:
        detail = (f"certificate point {cert.point_id!r} at r = {cert.r!r}"
                  if cert else "B is infinite")
        verdicts.append(_verdict(UNBOUNDED, True, detail))
        if cert is not None:
            out["certificate"] = {"point_id": cert.point_id, "r": cert.r}
    upper = out["C_B*B"] if args.mode == STRICT else out["C_B*B_prime"]
    out.update({"C_hat": None, "C_upper": math.inf if verdicts else upper,
                "verdicts": verdicts})
    if args.verbose:
        out["candidates"] = _candidates(inst, e, args.mode)
    timings["constant"] = time.perf_counter() - t0
    return out, EXIT_OK


def cmd_check(args, timings):
    inst, _ = _load(args)
    e = _exponents(args)
    if not args.f:
        raise InputError("check needs --f PATH")
    f = load_function(args.f, inst)
    t0 = time.perf_counter()
    rep, out = _base(inst, e, args.mode)
    left, right = lhs(inst, e, f, args.mode), rhs(inst, e, f)
    r = ratio(left, right)
    upper = out["C_B*B"] if args.mode == STRICT else out["C_B*B_prime"]
    ok = upper == math.inf or left <= upper * right * (1 + 1e-12)
    out.update({"lhs": left, "rhs": right, "ratio": r, "C_hat": None,
                "C_upper": upper,
                "verdicts": [_verdict("ratio<=C_B*B", ok,
                                      f"ratio {r!r}, bound {upper!r}")]})
    timings["check"] = time.perf_counter() - t0
    return out, EXIT_OK if ok else EXIT_VIOLATION


def cmd_sharp(args, timings):
    inst, _ = _load(args)
    e = _exponents(args)
    t0 = time.perf_counter()
    _, out = _base(inst, e, args.mode)
    rep = sandwich_report(inst, e, args.mode, seed=args.seed,
                          max_iter=args.max_iter, tol=args.tol,
                          restarts=args.restarts)
    out.update({
        "B_witness_side": rep.B_witness_side, "C_hat": rep.C_hat,
        "C_upper": rep.C_upper, "witness_ratio": rep.witness_ratio,
        "iterations": rep.iterations, "converged": rep.converged,
        "verdicts": [_verdict(v.name, v.passed, v.detail) for v in rep.verdicts],
    })
    if rep.certificate is not None:
        out["certificate"] = {"point_id": rep.certificate.point_id,
                              "r": rep.certificate.r}
    out["witness_f"] = rep.witness_f.as_dict() if rep.witness_f is not None else None
    timings["sharp"] = time.perf_counter() - t0
    return out, EXIT_OK if rep.passed else EXIT_VIOLATION


def cmd_suite(args, timings):
    names = args.only or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise InputError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES)}")
    results = run_all(names, seed=args.seed, cb_scale=args.inject_bad_constant)
    rows = []
    first_fail = None
    for res in results:
        timings[res.name] = res.seconds
        row = {"suite": res.name, "passed": res.passed}
        row.update({k: v for k, v in res.details.items() if not isinstance(v, (dict, list))})
        if args.verbose:
            row["details"] = res.details
        rows.append(row)
        if not res.passed and first_fail is None:
            first_fail = res
    out = {"seed": args.seed, "passed": first_fail is None,
           "verdicts": [_verdict(r.name, r.passed) for r in results], "rows": rows}
    if first_fail is not None:
        out["first_failure"] = {"suite": first_fail.name,
                                "details": first_fail.details,
                                "counterexample": first_fail.counterexample}
    return out, EXIT_OK if first_fail is None else EXIT_VIOLATION


def cmd_generate(args, timings):
    kind = args.kind
    if kind == "discrete-hardy":
        inst = build_discrete_hardy(args.p, args.n_max)
    elif kind == "continuous-hardy":
        inst = build_continuous_hardy(args.p, args.delta, args.R, args.cells)
    elif kind == "conjugate-hardy":
        inst = build_conjugate_hardy(args.p, args.delta, args.R, args.cells)
    elif kind == "gap":
        inst = gap_instance()
    else:
        inst = pathology_instance()
    return dump_instance(inst), EXIT_OK


COMMANDS = {"constant": cmd_constant, "check": cmd_check, "sharp": cmd_sharp,
            "suite": cmd_suite}


# ---------------------------------------------------------------------------
# parser


def _exponent_arg(text):
    try:
        return parse_exponent(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file")
    common.add_argument("--p", type=_exponent_arg, default=2.0,
                        help="exponent p in [1, inf] (default 2)")
    common.add_argument("--q", type=_exponent_arg, default=2.0,
                        help="exponent q >= p (default 2)")
    common.add_argument("--mode", choices=[STRICT, CLOSED], default=STRICT,
                        help="strict sublevel N < r (B) or closed N <= r (B')")
    common.add_argument("--f", help="function file for `check`")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--verbose", action="store_true",
                        help="include per-candidate products and suite details")
    common.add_argument("--timings", action="store_true",
                        help="report wall-clock timings (output is then not reproducible)")
    common.add_argument("--resolution", type=int, default=1,
                        help="subcells per density piece when discretizing line instances")

    parser = argparse.ArgumentParser(
        prog="hardy", description="Constants and sharpness checks for weighted Hardy inequalities")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constant", parents=[common], help="B, B' and the upper constant")
    sub.add_parser("check", parents=[common], help="test the inequality for one f")
    sh = sub.add_parser("sharp", parents=[common], help="lower bound C_hat and sandwich verdicts")
    sh.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    sh.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sh.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    su = sub.add_parser("suite", parents=[common], help="run the acceptance suites")
    su.add_argument("--only", nargs="+", metavar="SUITE",
                    help=f"subset of: {', '.join(SUITES)}")
    su.add_argument("--inject-bad-constant", type=float, default=1.0,
                    help=argparse.SUPPRESS)
    gen = sub.add_parser("generate", help="write a canonical instance as JSON")
    gen.add_argument("kind", choices=["discrete-hardy", "continuous-hardy",
                                      "conjugate-hardy", "gap", "pathology"])
    gen.add_argument("--p", type=float, default=2.0)
    gen.add_argument("--n-max", type=int, default=10)
    gen.add_argument("--delta", type=float, default=1e-3)
    gen.add_argument("--R", type=float, default=1e3)
    gen.add_argument("--cells", type=int, default=64)
    gen.add_argument("--out", help="output path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    timings = {}
    try:
        if args.command == "generate":
            text, code = cmd_generate(args, timings)
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return code
        report, code = COMMANDS[args.command](args, timings)
    except ExponentOrderError as exc:
        print(f"hardy: {exc}", file=sys.stderr)
        return EXIT_ORDER
    except (InputError, ExponentError, InstanceError) as exc:
        print(f"hardy: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report["timings"] = timings if args.timings else None
    sys.stdout.write(render(report, args.format))
    if code == EXIT_VIOLATION and report.get("first_failure"):
        ff = report["first_failure"]
        print(f"hardy: suite {ff['suite']!r} failed; counterexample:\n"
              + to_json(ff["counterexample"]), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
