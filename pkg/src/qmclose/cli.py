"""Command-line front end: every subcommand prints one JSON report.

Exit codes: 0 when a report was computed (whatever its verdict), 1 on usage
errors (bad flags, malformed JSON, unknown instance, unparsable polynomial),
2 when a desk-scale limit is exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from . import fiberlab, qmodule, seqlab
from .instances import UnknownInstance, instance, instance_names
from .numkernel import DimensionOverflow, Tolerances
from .polyring import ParseError, Polynomial, parse_polynomial
from .qmodule import DegreeOverflow, PseudoMoments, QuadraticModuleSpec

SCHEMA = "qmclose/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Resolved configuration, echoed verbatim in every report."""
    subcommand: str
    options: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# argument helpers

def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {v}")
    return v


def _positive_fraction(text: str) -> Fraction:
    v = _fraction(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return v


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from exc
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _module(args) -> QuadraticModuleSpec:
    if args.instance and args.problem:
        raise UsageError("give either --instance or --problem, not both")
    if args.instance:
        return instance(args.instance)
    if args.problem:
        obj = _load_json(args.problem)
        if not isinstance(obj, dict) or "vars" not in obj or "generators" not in obj:
            raise UsageError("problem JSON needs 'vars' and 'generators'")
        unknown = set(obj) - {"vars", "kind", "generators", "name"}
        if unknown:
            raise UsageError(f"unknown problem fields: {sorted(unknown)}")
        try:
            return QuadraticModuleSpec.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid problem JSON: {exc}") from exc
    raise UsageError("a module is required: --instance NAME or --problem FILE")


def _poly(text: Optional[str], M: QuadraticModuleSpec, flag="--poly") -> Polynomial:
    if text is None:
        raise UsageError(f"{flag} is required")
    p = parse_polynomial(text, M.varnames)
    return p.with_varnames(M.varnames)


def _tolerances(args) -> Tolerances:
    if getattr(args, "tol", None) is not None:
        return Tolerances(feas=args.tol, psd=args.tol)
    return Tolerances.default()


def _status_at(status: str, d: int) -> str:
    # "infeasible_at_d" -> "infeasible_at_6"; the degree qualifies every negative verdict
    return status[:-1] + str(d) if status.endswith("_at_d") else status


def _note(status: str) -> Optional[str]:
    if status == qmodule.INFEASIBLE_AT_D:
        return "no representation with degree bound d exists; membership at higher degree is not excluded"
    if status == qmodule.NO_CERTIFICATE:
        return "no certificate found at this degree; this is not a non-membership claim"
    return None


def _membership_json(r: qmodule.MembershipResult) -> dict:
    out = {"status": _status_at(r.status, r.degree), "degree": r.degree,
           "target": str(r.target), "solver": r.solver}
    if r.certificate is not None:
        out["certificate"] = r.certificate.to_json()
    if r.dual is not None:
        out["dual_ray"] = r.dual.to_json()
        out["dual_margin"] = r.dual_margin
    note = _note(r.status)
    if note:
        out["note"] = note
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_member(args, tol):
    M = _module(args)
    r = qmodule.member(_poly(args.poly, M), M, args.degree, tol)
    return {"module": M.to_json(), **_membership_json(r)}


def cmd_seq_member(args, tol):
    M = _module(args)
    f = _poly(args.poly, M)
    e = args.e if args.e is not None else f.degree() // 2 + 1
    eps = args.eps or qmodule.DEFAULT_EPS
    r = qmodule.seq_member(f, M, args.degree, e, eps, tol)
    out = r.to_json()
    out["per_eps"] = [{"eps": str(x), **_membership_json(m)}
                      for x, m in zip(r.schedule, r.results)]
    out["schedule"] = [str(x) for x in r.schedule]
    return {"module": M.to_json(), "e": e, **out}


def cmd_pos_semi(args, tol):
    M = _module(args)
    f = _poly(args.poly, M)
    if args.m is not None:
        r = qmodule.pos_semiordering(f, M, args.m, args.degree, tol)
    else:
        r = qmodule.pos_semiordering_search(f, M, args.degree, args.m_max, tol)
    return {"module": M.to_json(), "f": str(f), "status": _status_at(r.status, r.degree),
            "m": r.m, "degree": r.degree,
            "certificate": None if r.certificate is None else r.certificate.to_json()}


def cmd_archimedean(args, tol):
    M = _module(args)
    ks = args.k or [Fraction(1), Fraction(10), Fraction(100), Fraction(10 ** 4)]
    degrees = args.degree or [2, 4]
    r = qmodule.archimedean_probe(M, ks, degrees, tol)
    out = r.to_json()
    if r.status == "unknown":
        out["note"] = "one-sided test: 'unknown' does not assert that M is not archimedean"
    return {"module": M.to_json(), **out}


def cmd_support(args, tol):
    M = _module(args)
    cands = [_poly(t, M) for t in args.poly]
    found = qmodule.support_probe(M, args.degree, cands, tol)
    return {"module": M.to_json(), "degree": args.degree,
            "candidates": [str(c) for c in cands],
            "in_support": [str(h) for h in found]}


def cmd_stable(args, tol):
    M = _module(args)
    rad = [_poly(t, M) for t in args.radical]
    N = qmodule.stable_closure(M, rad)
    return {"module": M.to_json(), "radical_generators": [str(h) for h in rad],
            "closure": N.to_json(),
            "note": "equals the closure only if M is stable (caller assertion)"}


def cmd_closure_stable(args, tol):
    M = _module(args)
    forms = [_poly(t, M) for t in args.form]
    r = qmodule.poly_stability(M, forms)
    return {"module": M.to_json(), **r.to_json()}


def cmd_fiber(args, tol):
    M = _module(args)
    if args.var not in M.varnames:
        raise UsageError(f"--var must be one of {list(M.varnames)}")
    if args.a > args.b:
        raise UsageError("--a must not exceed --b")
    out = {"module": M.to_json()}
    if not args.no_certify:
        w = fiberlab.certify_bounds(Polynomial.var(args.var, M.varnames), M,
                                    args.a, args.b, args.degree, tol=tol)
        out["bounds"] = w.to_json()
    dec = fiberlab.fiber_decompose(M, args.var, args.a, args.b, args.grid)
    out["decomposition"] = dec.to_json()
    if args.poly is not None:
        out["fiber_member"] = fiberlab.fiber_member(_poly(args.poly, M), dec,
                                                    args.degree, tol).to_json()
    return out


def _bounds(items, M) -> dict:
    out = {}
    for item in items or []:
        parts = item.split(":")
        if len(parts) != 3 or parts[0] not in M.varnames:
            raise UsageError(f"--bounds expects VAR:A:B with VAR in {list(M.varnames)}")
        a, b = _fraction(parts[1]), _fraction(parts[2])
        if a > b:
            raise UsageError(f"empty interval in --bounds {item}")
        out[parts[0]] = (a, b)
    return out


def cmd_weak_closure(args, tol):
    M = _module(args)
    r = fiberlab.weak_closure_member(_poly(args.poly, M), M, args.depth, args.degree,
                                     args.grid, tol=tol, seed=args.seed,
                                     bounds=_bounds(args.bounds, M))
    return {"module": M.to_json(), **r.to_json()}


def _moments(args, M) -> PseudoMoments:
    if args.dirac is not None:
        pt = [_fraction(t) for t in args.dirac.split(",")]
        if len(pt) != M.nvars:
            raise UsageError(f"--dirac needs {M.nvars} coordinates")
        return PseudoMoments.dirac(pt, M.varnames, 2 * args.degree)
    if args.moments is None:
        raise UsageError("give --moments FILE or --dirac POINT")
    obj = _load_json(args.moments)
    try:
        vals = {tuple(int(e) for e in item["exps"]): Fraction(str(item["value"]))
                for item in obj["moments"]}
        degree = int(obj["degree"])
        names = tuple(obj.get("vars", M.varnames))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid moments JSON: {exc}") from exc
    if names != M.varnames:
        raise UsageError("moment variables differ from the module's")
    return PseudoMoments(names, degree, vals)


def cmd_moment_dual(args, tol):
    M = _module(args)
    L = _moments(args, M)
    try:
        r = qmodule.dual_moment_check(L, M, args.degree, tol)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return {"module": M.to_json(), "degree": args.degree, **r.to_json()}


def cmd_appendix(args, tol):
    if args.m < args.n:
        raise UsageError("--m must be at least --n")
    if args.n == 1:
        rep = seqlab.terminal_check(args.m, args.samples, args.seed, cone=args.cone)
        return {"report": rep.to_json()}
    verify = seqlab.cc_seq_step_verify if args.cone else seqlab.seq_step_verify
    rep = verify(args.n, args.m, args.samples, args.seed)
    return {"report": rep.to_json(with_points=not args.summary)}


def cmd_instances(args, tol):
    return {"instances": instance_names()}


# ---------------------------------------------------------------------------

def _module_flags(p):
    p.add_argument("--instance", help="named instance, e.g. ball:2 or example_3_4:3,1/4")
    p.add_argument("--problem", help="problem JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmclose", description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=float, default=None,
                        help="feasibility and PSD tolerance (default from QMCLOSE_TOL or 1e-8)")
    parser.add_argument("--output", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("member", help="bounded-degree membership certificate")
    _module_flags(p)
    p.add_argument("--poly")
    p.add_argument("--degree", type=_nonneg_int, required=True)
    p.set_defaults(run=cmd_member)

    p = sub.add_parser("seq-member", help="f + eps (1+|x|^2)^e over an eps schedule")
    _module_flags(p)
    p.add_argument("--poly")
    p.add_argument("--degree", type=_nonneg_int, required=True)
    p.add_argument("--e", type=_positive_int)
    p.add_argument("--eps", type=_positive_fraction, nargs="+")
    p.set_defaults(run=cmd_seq_member)

    p = sub.add_parser("pos-semi", help="p f = f^(2m) + q certificate")
    _module_flags(p)
    p.add_argument("--poly")
    p.add_argument("--degree", type=_nonneg_int, required=True)
    p.add_argument("--m", type=_nonneg_int)
    p.add_argument("--m-max", type=_positive_int, default=3)
    p.set_defaults(run=cmd_pos_semi)

    p = sub.add_parser("archimedean", help="k - |x|^2 membership probe")
    _module_flags(p)
    p.add_argument("--k", type=_positive_fraction, nargs="+")
    p.add_argument("--degree", type=_positive_int, nargs="+")
    p.set_defaults(run=cmd_archimedean)

    p = sub.add_parser("support", help="candidates h with +-h in M")
    _module_flags(p)
    p.add_argument("--poly", action="append", required=True)
    p.add_argument("--degree", type=_nonneg_int, required=True)
    p.set_defaults(run=cmd_support)

    p = sub.add_parser("stable", help="M plus caller-supplied radical generators")
    _module_flags(p)
    p.add_argument("--radical", action="append", default=[])
    p.set_defaults(run=cmd_stable)

    p = sub.add_parser("closure-stable", help="stability LP for linear generators")
    _module_flags(p)
    p.add_argument("--form", action="append", default=[])
    p.set_defaults(run=cmd_closure_stable)

    p = sub.add_parser("fiber", help="fibre decomposition over a coordinate")
    _module_flags(p)
    p.add_argument("--var", required=True)
    p.add_argument("--a", type=_fraction, required=True)
    p.add_argument("--b", type=_fraction, required=True)
    p.add_argument("--grid", type=_positive_int, default=fiberlab.DEFAULT_GRID)
    p.add_argument("--degree", type=_nonneg_int, default=4)
    p.add_argument("--poly", help="test polynomial checked on every fibre")
    p.add_argument("--no-certify", action="store_true", help="skip the bound certificates")
    p.set_defaults(run=cmd_fiber)

    p = sub.add_parser("weak-closure", help="recursive fibre membership")
    _module_flags(p)
    p.add_argument("--poly")
    p.add_argument("--degree", type=_nonneg_int, default=4)
    p.add_argument("--depth", type=_nonneg_int, default=fiberlab.DEFAULT_DEPTH)
    p.add_argument("--grid", type=_positive_int, default=fiberlab.DEFAULT_GRID)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bounds", action="append", help="VAR:A:B asserted by the caller")
    p.set_defaults(run=cmd_weak_closure)

    p = sub.add_parser("moment-dual", help="PSD checks of a moment functional")
    _module_flags(p)
    p.add_argument("--degree", type=_nonneg_int, required=True)
    p.add_argument("--moments", help="moments JSON file")
    p.add_argument("--dirac", help="comma-separated point for a point evaluation")
    p.set_defaults(run=cmd_moment_dual)

    p = sub.add_parser("appendix", help="peeling verification on the appendix sets")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cone", action="store_true", help="use the conic hulls")
    p.add_argument("--summary", action="store_true", help="omit per-point records")
    p.set_defaults(run=cmd_appendix)

    p = sub.add_parser("instances", help="list the named instances")
    p.set_defaults(run=cmd_instances)
    return parser


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run(argv=None) -> tuple:
    """Return (exit code, report dict)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("a subcommand is required")
        tol = _tolerances(args)
        options = {k: v for k, v in vars(args).items() if k not in ("run", "subcommand")}
        config = RunConfig(args.subcommand, options, tol.to_json())
        result = args.run(args, tol)
        return 0, {"schema": SCHEMA, "config": config.to_json(), "result": result}
    except (UsageError, UnknownInstance, ParseError, argparse.ArgumentTypeError) as exc:
        msg = exc.args[0] if isinstance(exc, UnknownInstance) else str(exc)
        return 1, {"schema": SCHEMA, "error": "usage", "message": msg}
    except (DimensionOverflow, DegreeOverflow) as exc:
        return 2, {"schema": SCHEMA, "error": "limit_exceeded", "message": str(exc)}


def main(argv=None) -> int:
    code, report = run(argv)
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    out_path = None
    if code == 0:
        out_path = report["config"]["options"].get("output")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stdout if code == 0 else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
