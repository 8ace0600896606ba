"""Fibre decompositions of quadratic modules and the recursive weak closure.

A coordinate ``x_i`` that is certified bounded, ``a <= x_i <= b``, splits a
module into fibres ``M + (x_i - lam)``, realized by substituting ``x_i := lam``
into every generator.  The weak closure recursion intersects the fibres over
a uniform grid of ``lam`` values.  Every positive verdict produced here is
qualified by that grid and by the recursion depth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .numkernel import Tolerances
from .polyring import Polynomial
from .qmodule import (DEFAULT_EPS, IN_MDAGGER, MembershipResult, QuadraticModuleSpec,
                      SeqMemberResult, member, seq_member)

DEFAULT_GRID = 33
DEFAULT_DEPTH = 4
SAMPLE_RADIUS = 4

MEMBER_ON_GRID = "member_on_all_grid_fibers"
FAILS_AT = "fails_at"

WC_MEMBER = "member_on_grid"
WC_NO_CERT = "no_certificate"
WC_DEPTH = "depth_exhausted"

CHOICE_RULE = "lowest-index certified bounded coordinate"


# ---------------------------------------------------------------------------
# sampling the basic closed set

def eval_many(p: Polynomial, X: np.ndarray) -> np.ndarray:
    """Float evaluation of p at every row of X."""
    out = np.zeros(X.shape[0])
    for exps, c in p.items():
        term = np.full(X.shape[0], float(c))
        for j, e in enumerate(exps):
            if e:
                term = term * X[:, j] ** e
        out += term
    return out


def sample_K(M: QuadraticModuleSpec, samples: int = 4000, seed=0,
             radius: int = SAMPLE_RADIUS) -> np.ndarray:
    """Points of [-radius, radius]^n where every generator is nonnegative.

    The sample mixes a rational grid (containing 0 and the integers, so
    that thin sets such as single points are hit) with uniform draws.
    """
    n = M.nvars
    if n == 0:
        return np.zeros((1, 0))
    rng = np.random.default_rng(seed)
    per_axis = max(3, int(round(min(8 * radius + 1, samples ** (1.0 / n)))))
    axis = np.unique(np.concatenate([np.linspace(-radius, radius, per_axis),
                                     np.arange(-radius, radius + 1)]))
    if axis.size ** n <= 4 * samples:
        grid = np.array(np.meshgrid(*([axis] * n), indexing="ij")).reshape(n, -1).T
    else:
        grid = rng.choice(axis, size=(samples, n))
    X = np.vstack([grid, rng.uniform(-radius, radius, size=(samples, n))])
    keep = np.ones(X.shape[0], dtype=bool)
    for g in M.generators:
        keep &= eval_many(g, X) >= -1e-9
    return X[keep]


@dataclass(frozen=True)
class SampledRange:
    lo: Optional[float]
    hi: Optional[float]
    count: int
    touches_box: bool

    @property
    def empty(self) -> bool:
        return self.count == 0

    def outward(self) -> tuple:
        return Fraction(math.floor(self.lo + 1e-9)), Fraction(math.ceil(self.hi - 1e-9))


def sampled_range(f: Polynomial, M: QuadraticModuleSpec, samples: int = 4000, seed=0,
                  radius: int = SAMPLE_RADIUS) -> SampledRange:
    X = sample_K(M, samples, seed, radius)
    if X.shape[0] == 0:
        return SampledRange(None, None, 0, False)
    v = eval_many(f, X)
    # an extreme value attained only on the sampling box suggests unboundedness
    on_box = np.any(np.abs(X) >= radius - 1e-9, axis=1)
    at_min, at_max = v <= v.min() + 1e-9, v >= v.max() - 1e-9
    touches = bool(np.all(on_box[at_min]) or np.all(on_box[at_max]))
    return SampledRange(float(v.min()), float(v.max()), int(X.shape[0]), touches)


# ---------------------------------------------------------------------------
# bounds

@dataclass
class BoundSide:
    target: Polynomial
    method: Optional[str]            # member | seq_member | None
    status: str
    result: object = None

    @property
    def certified(self) -> bool:
        return self.method is not None

    def to_json(self):
        out = {"target": str(self.target), "method": self.method, "status": self.status}
        if isinstance(self.result, MembershipResult) and self.result.certificate is not None:
            out["certificate"] = self.result.certificate.to_json()
        elif isinstance(self.result, SeqMemberResult):
            out["seq"] = self.result.to_json()
        return out


@dataclass
class BoundedElementWitness:
    f: Polynomial
    a: Fraction
    b: Fraction
    upper: BoundSide
    lower: BoundSide

    @property
    def certified(self) -> bool:
        return self.a <= self.b and self.upper.certified and self.lower.certified

    def to_json(self):
        return {"f": str(self.f), "a": str(self.a), "b": str(self.b),
                "certified": self.certified,
                "upper": self.upper.to_json(), "lower": self.lower.to_json()}


def _certify_side(h: Polynomial, M, d, eps_schedule, tol) -> BoundSide:
    r = member(h, M, d, tol)
    if r.is_member:
        return BoundSide(h, "member", r.status, r)
    e = max(1, h.degree() // 2 + 1)
    if 2 * e > d:
        return BoundSide(h, None, r.status, r)
    s = seq_member(h, M, d, e, eps_schedule, tol)
    if s.verdict == IN_MDAGGER:
        return BoundSide(h, "seq_member", s.verdict, s)
    return BoundSide(h, None, s.verdict, s)


def certify_bounds(f: Polynomial, M: QuadraticModuleSpec, a, b, d: int,
                   eps_schedule=DEFAULT_EPS, tol: Tolerances | None = None) -> BoundedElementWitness:
    """Certify b - f and f - a in M, or in M's sequential closure at the schedule."""
    a, b = Fraction(a), Fraction(b)
    if a > b:
        raise ValueError("need a <= b")
    f = f.with_varnames(M.varnames) if f.varnames != M.varnames else f
    upper = _certify_side(f.scale(-1) + b, M, d, eps_schedule, tol)
    lower = _certify_side(f - a, M, d, eps_schedule, tol)
    return BoundedElementWitness(f, a, b, upper, lower)


# ---------------------------------------------------------------------------
# fibres

def fiber_spec(M: QuadraticModuleSpec, var: str, lam) -> QuadraticModuleSpec:
    """M + (var - lam) as a module over the remaining variables.

    The generator list is the substituted list verbatim (constants and
    zeros included)."""
    if var not in M.varnames:
        raise ValueError(f"{var!r} is not a coordinate of the module")
    lam = Fraction(lam)
    gens = tuple(g.substitute(var, lam) for g in M.generators)
    rest = tuple(v for v in M.varnames if v != var)
    name = f"{M.name}|{var}={lam}" if M.name else f"{var}={lam}"
    return QuadraticModuleSpec(rest, gens, M.kind, name)


def uniform_grid(a, b, grid_size: int) -> list:
    if grid_size < 1:
        raise ValueError("grid_size must be at least 1")
    a, b = Fraction(a), Fraction(b)
    if a == b or grid_size == 1:
        return [a] if a == b else [a + (b - a) / 2]
    pts = [a + (b - a) * Fraction(k, grid_size - 1) for k in range(grid_size)]
    return list(dict.fromkeys(pts))


@dataclass
class FiberDecomposition:
    base: QuadraticModuleSpec
    var: str
    a: Fraction
    b: Fraction
    grid: list
    fibers: list

    def to_json(self):
        return {"base": self.base.to_json(), "var": self.var, "a": str(self.a), "b": str(self.b),
                "grid": [str(l) for l in self.grid],
                "fibers": [{"lambda": str(l), "generators": [str(g) for g in F.generators]}
                           for l, F in zip(self.grid, self.fibers)]}


def fiber_decompose(M: QuadraticModuleSpec, var: str, a, b,
                    grid_size: int = DEFAULT_GRID) -> FiberDecomposition:
    grid = uniform_grid(a, b, grid_size)
    return FiberDecomposition(M, var, Fraction(a), Fraction(b), grid,
                              [fiber_spec(M, var, l) for l in grid])


@dataclass
class FiberMemberResult:
    f_test: Polynomial
    var: str
    grid: list
    statuses: list
    aggregate: str
    failing: list
    label: str = "grid_sampled"

    def to_json(self):
        return {"f_test": str(self.f_test), "var": self.var, "label": self.label,
                "grid": [str(l) for l in self.grid], "aggregate": self.aggregate,
                "failing": [str(l) for l in self.failing],
                "per_fiber": [{"lambda": str(l), "status": s}
                              for l, s in zip(self.grid, self.statuses)]}


def fiber_member(f_test: Polynomial, decomp: FiberDecomposition, d: int,
                 tol: Tolerances | None = None) -> FiberMemberResult:
    """Membership of f_test restricted to each grid fibre."""
    f_test = f_test.with_varnames(decomp.base.varnames) \
        if f_test.varnames != decomp.base.varnames else f_test
    statuses, failing = [], []
    for lam, F in zip(decomp.grid, decomp.fibers):
        r = member(f_test.substitute(decomp.var, lam), F, d, tol)
        statuses.append(r.status)
        if not r.is_member:
            failing.append(lam)
    agg = MEMBER_ON_GRID if not failing else FAILS_AT
    return FiberMemberResult(f_test, decomp.var, list(decomp.grid), statuses, agg, failing)


# ---------------------------------------------------------------------------
# weak closure

@dataclass
class WeakClosureNode:
    module: QuadraticModuleSpec
    f_test: Polynomial
    depth: int
    case: str = ""
    verdict: str = ""
    member_status: str = ""
    coordinate: Optional[str] = None
    interval: Optional[tuple] = None
    grid: list = field(default_factory=list)
    bounds: Optional[BoundedElementWitness] = None
    support_checks: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    children: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"module": self.module.to_json(), "f_test": str(self.f_test),
                "depth": self.depth, "case": self.case, "verdict": self.verdict,
                "member_status": self.member_status, "coordinate": self.coordinate,
                "interval": None if self.interval is None else [str(v) for v in self.interval],
                "grid": [str(l) for l in self.grid],
                "bounds": None if self.bounds is None else self.bounds.to_json(),
                "support_checks": self.support_checks, "skipped": self.skipped,
                "notes": self.notes,
                "fibers": [{"lambda": str(l), "node": c.to_json()} for l, c in self.children]}


@dataclass
class WeakClosureResult:
    verdict: str
    trace: WeakClosureNode
    d: int
    grid_size: int
    depth_limit: int

    @property
    def is_member(self) -> bool:
        return self.verdict == WC_MEMBER

    def to_json(self):
        return {"verdict": self.verdict, "d": self.d, "grid_size": self.grid_size,
                "depth_limit": self.depth_limit, "choice_rule": CHOICE_RULE,
                "trace": self.trace.to_json()}


def _support_certified(h: Polynomial, M, d, tol) -> Optional[bool]:
    if h.degree() > d:
        return None
    return member(h, M, d, tol).is_member and member(-h, M, d, tol).is_member


def weak_closure_member(f_test: Polynomial, M: QuadraticModuleSpec, depth_limit: int = DEFAULT_DEPTH,
                        d: int = 4, grid_size: int = DEFAULT_GRID, eps_schedule=DEFAULT_EPS,
                        tol: Tolerances | None = None, samples: int = 4000,
                        seed=0, bounds: Optional[dict] = None) -> WeakClosureResult:
    """Grid- and depth-qualified membership of f_test in the weak closure.

    ``bounds`` maps a coordinate to an interval (a, b) that the caller asserts
    contains its values on the semiorderings over M; such a coordinate is
    fibred without a bound certificate, and the trace says so.
    """
    bounds = {v: (Fraction(a), Fraction(b)) for v, (a, b) in (bounds or {}).items()}
    if depth_limit < 0:
        raise ValueError("depth_limit must be nonnegative")
    if grid_size < 1:
        raise ValueError("grid_size must be at least 1")
    f_test = f_test.with_varnames(M.varnames) if f_test.varnames != M.varnames else f_test

    def visit(M, f, depth) -> WeakClosureNode:
        node = WeakClosureNode(M, f, depth)
        r = member(f, M, d, tol)
        node.member_status = r.status
        if r.is_member:
            node.case, node.verdict = "in_module", WC_MEMBER
            return node
        if member(Polynomial.constant(-1, M.varnames), M, d, tol).is_member:
            node.case, node.verdict = "whole_ring", WC_MEMBER
            return node
        chosen = None
        for v in M.varnames:
            x = Polynomial.var(v, M.varnames)
            if v in bounds:
                a, b = bounds[v]
                chosen = (v, a, b, None, a if a == b else None)
                node.notes.append(f"bounds {a} <= {v} <= {b} asserted by the caller")
                break
            rng = sampled_range(x, M, samples, seed)
            if rng.empty:
                node.skipped.append({"coordinate": v, "reason": "no sampled points"})
                continue
            if rng.touches_box:
                node.skipped.append({"coordinate": v, "reason": "sampled range reaches the sampling box"})
                continue
            a, b = rng.outward()
            w = certify_bounds(x, M, a, b, d, eps_schedule, tol)
            if not w.certified:
                node.skipped.append({"coordinate": v, "reason": "bounds not certified",
                                     "interval": [str(a), str(b)]})
                continue
            lam0 = a if a == b else None
            for lam in ([] if a == b else dict.fromkeys([a, b, (a + b) / 2])):
                s = _support_certified(x - lam, M, d, tol)
                node.support_checks.append({"coordinate": v, "lambda": str(lam),
                                            "in_support": s})
                if s:
                    lam0 = lam
                    break
            chosen = (v, a, b, w, lam0)
            break
        if chosen is None:
            node.case, node.verdict = "no_bounded_coordinate", WC_NO_CERT
            return node
        v, a, b, w, lam0 = chosen
        node.coordinate, node.interval, node.bounds = v, (a, b), w
        if lam0 is not None:
            node.case = "collapsed"
            node.notes.append(f"{v} - {lam0} lies in the support; only the fibre {v} = {lam0} remains")
            grid = [lam0]
        else:
            node.case = "fibred"
            grid = uniform_grid(a, b, grid_size)
        node.grid = grid
        if depth >= depth_limit:
            node.verdict = WC_DEPTH
            return node
        verdicts = []
        for lam in grid:
            child = visit(fiber_spec(M, v, lam), f.substitute(v, lam), depth + 1)
            node.children.append((lam, child))
            verdicts.append(child.verdict)
            if child.verdict == WC_NO_CERT:
                break
        if WC_NO_CERT in verdicts:
            node.verdict = WC_NO_CERT
        elif WC_DEPTH in verdicts:
            node.verdict = WC_DEPTH
        else:
            node.verdict = WC_MEMBER
        return node

    root = visit(M, f_test, 0)
    return WeakClosureResult(root.verdict, root, d, grid_size, depth_limit)
