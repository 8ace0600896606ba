"""Finite-dimensional convex cones: duals, interiors, sequential closure.

Polyhedral cones are handled exactly over the rationals with the double
description method.  A cone may be given by generators (``cone(G)``), by
halfspaces (``{x : H x >= 0}``), as a semispace described by an ordered list
of functionals (lexicographic sign rule), or as a bare membership oracle
(for instance a spectrahedral slice); the last kind supports membership
only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional, Sequence

from .numkernel import DimensionOverflow

MAX_DIM = 12
MAX_GENERATORS = 200
DEFAULT_EPS = tuple(Fraction(1, 10 ** k) for k in range(7))

GENERATORS = "generators"
HALFSPACES = "halfspaces"
SEMISPACE = "semispace"
ORACLE = "oracle"

IN_CLOSURE = "in_closure"
NOT_DETECTED = "not_detected"
INCONCLUSIVE = "inconclusive"


class UnsupportedRepresentation(TypeError):
    """Operation needs a polyhedral cone."""


class PreconditionError(ValueError):
    pass


class SemispaceHypothesisError(ValueError):
    """The cone does not satisfy C u -C = V."""


# ---------------------------------------------------------------------------
# exact linear algebra

Vec = tuple


def _vec(v) -> Vec:
    return tuple(Fraction(x) for x in v)


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def primitive(v) -> Vec:
    """Positive rescaling of ``v`` to a primitive integer vector."""
    v = _vec(v)
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    if g == 0:
        return tuple(Fraction(0) for _ in v)
    return tuple(Fraction(x // g) for x in ints)


def rref(rows, ncols: int):
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    M = [list(_vec(r)) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return [tuple(row) for row in M[:r]], pivots


def nullspace(rows, ncols: int) -> list:
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(primitive(v))
    return basis


def rank(rows, ncols: int) -> int:
    return len(rref(rows, ncols)[0])


def _inverse(B) -> list:
    n = len(B)
    aug = [list(B[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def extreme_rays(A, n: int) -> tuple:
    """Double description of ``{y in Q^n : A y >= 0}``.

    Returns ``(lineality, rays)``: a basis of the lineality space and the
    extreme rays of the pointed part, which lies in the orthogonal
    complement of the lineality space.  All vectors are primitive.
    """
    A = [_vec(a) for a in A]
    if any(len(a) != n for a in A):
        raise ValueError("row width does not match the dimension")
    lineality = nullspace(A, n)
    R, _ = rref(A, n)
    r = len(R)
    if r == 0:
        return lineality, []
    # coordinates z on the row space: y = sum_j z_j R_j
    B = [tuple(_dot(a, Rj) for Rj in R) for a in A]
    chosen, basis_rows = [], []
    for i, b in enumerate(B):
        if rank(basis_rows + [b], r) > len(basis_rows):
            chosen.append(i)
            basis_rows.append(b)
            if len(chosen) == r:
                break
    inv = _inverse(basis_rows)
    rays = []
    for j in range(r):
        z = tuple(inv[i][j] for i in range(r))
        tight = frozenset(chosen[k] for k in range(r) if k != j)
        rays.append((primitive(z), tight))
    done = set(chosen)
    for i, b in enumerate(B):
        if i in done:
            continue
        vals = [_dot(b, z) for z, _ in rays]
        pos = [k for k, s in enumerate(vals) if s > 0]
        neg = [k for k, s in enumerate(vals) if s < 0]
        zero = [k for k, s in enumerate(vals) if s == 0]
        new = [rays[k] for k in pos] + [(rays[k][0], rays[k][1] | {i}) for k in zero]
        for p in pos:
            for q in neg:
                common = rays[p][1] & rays[q][1]
                if len(common) < r - 2:
                    continue
                if any(k not in (p, q) and common <= rays[k][1] for k in range(len(rays))):
                    continue
                w = tuple(vals[p] * zq - vals[q] * zp
                          for zp, zq in zip(rays[p][0], rays[q][0]))
                new.append((primitive(w), common | {i}))
        rays = new
        done.add(i)
    out = []
    seen = set()
    for z, _ in rays:
        y = primitive(tuple(sum((z[j] * R[j][c] for j in range(r)), Fraction(0))
                            for c in range(n)))
        if any(y) and y not in seen:
            seen.add(y)
            out.append(y)
    return lineality, sorted(out)


def _as_generators(lineality, rays) -> list:
    return list(rays) + list(lineality) + [tuple(-x for x in v) for v in lineality]


# ---------------------------------------------------------------------------
# cones

@dataclass(frozen=True)
class TruncatedCone:
    dim: int
    kind: str
    vectors: tuple = ()
    oracle: Optional[Callable] = field(default=None, compare=False)
    known_dual: tuple = field(default=(), compare=False)

    @classmethod
    def from_generators(cls, gens, dim: Optional[int] = None) -> "TruncatedCone":
        gens = tuple(_vec(g) for g in gens)
        dim = len(gens[0]) if dim is None and gens else dim
        if dim is None:
            raise ValueError("dimension required for an empty generator list")
        return cls(dim, GENERATORS, gens)

    @classmethod
    def from_halfspaces(cls, funcs, dim: Optional[int] = None) -> "TruncatedCone":
        funcs = tuple(_vec(h) for h in funcs)
        dim = len(funcs[0]) if dim is None and funcs else dim
        if dim is None:
            raise ValueError("dimension required for an empty halfspace list")
        return cls(dim, HALFSPACES, funcs)

    @classmethod
    def semispace(cls, funcs, dim: Optional[int] = None) -> "TruncatedCone":
        """``{v : the first nonzero L_i(v) is positive} u {common kernel}``."""
        funcs = tuple(_vec(h) for h in funcs)
        if dim is None:
            if not funcs:
                raise ValueError("dim is required when no functionals are given")
            dim = len(funcs[0])
        return cls(dim, SEMISPACE, funcs)

    @classmethod
    def from_oracle(cls, dim: int, oracle: Callable) -> "TruncatedCone":
        return cls(dim, ORACLE, (), oracle)

    @classmethod
    def orthant(cls, dim: int) -> "TruncatedCone":
        return cls.from_generators([tuple(int(i == j) for j in range(dim)) for i in range(dim)])

    def __post_init__(self):
        for v in self.vectors:
            if len(v) != self.dim:
                raise ValueError("vector width does not match the dimension")

    @property
    def is_polyhedral(self) -> bool:
        return self.kind in (GENERATORS, HALFSPACES)

    def _check_limits(self):
        if not self.is_polyhedral:
            raise UnsupportedRepresentation(f"{self.kind} cones support membership only")
        if self.dim > MAX_DIM or len(self.vectors) > MAX_GENERATORS:
            raise DimensionOverflow(
                f"polyhedral conversion limited to dim <= {MAX_DIM} and "
                f"<= {MAX_GENERATORS} vectors")

    @cached_property
    def facets(self) -> tuple:
        """Functionals H with closure(C) = {x : H x >= 0}: extreme rays and
        +-lineality of the dual cone."""
        self._check_limits()
        if self.kind == HALFSPACES:
            return tuple(_as_generators(*extreme_rays(
                _as_generators(*extreme_rays(self.vectors, self.dim)), self.dim)))
        return tuple(_as_generators(*extreme_rays(self.vectors, self.dim)))

    @cached_property
    def canonical(self) -> tuple:
        """(lineality basis in rref, sorted primitive extreme rays)."""
        self._check_limits()
        lin, rays = extreme_rays(self.facets, self.dim)
        R, _ = rref(lin, self.dim)
        return tuple(R), tuple(rays)

    @property
    def generators(self) -> tuple:
        if self.kind == GENERATORS:
            return self.vectors
        lin, rays = self.canonical
        return tuple(_as_generators([primitive(v) for v in lin], rays))

    def contains(self, v) -> bool:
        if self.kind == ORACLE:
            return bool(self.oracle(v))
        v = _vec(v)
        if self.kind == SEMISPACE:
            for L in self.vectors:
                s = _dot(L, v)
                if s != 0:
                    return s > 0
            return True
        return all(_dot(h, v) >= 0 for h in self.facets)

    def same_as(self, other: "TruncatedCone") -> bool:
        return self.dim == other.dim and self.canonical == other.canonical

    def to_json(self):
        if self.kind == ORACLE:
            raise UnsupportedRepresentation("oracle cones have no JSON form")
        return {"dim": self.dim, "kind": self.kind,
                "vectors": [[str(x) for x in v] for v in self.vectors]}

    @classmethod
    def from_json(cls, obj) -> "TruncatedCone":
        kind = obj["kind"]
        if kind not in (GENERATORS, HALFSPACES, SEMISPACE):
            raise ValueError(f"unknown cone kind {kind!r}")
        vecs = tuple(tuple(Fraction(x) for x in v) for v in obj["vectors"])
        return cls(int(obj["dim"]), kind, vecs)


def dual_cone(C: TruncatedCone) -> TruncatedCone:
    """C^v = {L : L(c) >= 0 for c in C}, returned in generator form."""
    C._check_limits()
    if C.kind == GENERATORS:
        return TruncatedCone(C.dim, GENERATORS, C.facets)
    # {x : Hx >= 0} has dual cone(H) by Farkas
    return TruncatedCone(C.dim, GENERATORS, C.vectors)


@dataclass(frozen=True)
class InteriorResult:
    interior: bool
    witness: Optional[Vec] = None

    def __bool__(self):
        return self.interior

    def to_json(self):
        return {"interior": self.interior,
                "witness": None if self.witness is None else [str(x) for x in self.witness]}


def is_interior(C: TruncatedCone, v) -> InteriorResult:
    """True iff every nonzero extreme functional of C^v is positive at v."""
    v = _vec(v)
    for h in C.facets:
        if _dot(h, v) <= 0:
            return InteriorResult(False, h)
    return InteriorResult(True)


def interior_shift(C: TruncatedCone, q_interior, v, eps) -> bool:
    """Check that v + eps q is interior, for q interior and v in the closure."""
    if not is_interior(C, q_interior):
        raise PreconditionError("q is not an interior point")
    if not C.contains(v):
        raise PreconditionError("v is not in the closure of the cone")
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    shifted = tuple(a + eps * b for a, b in zip(_vec(v), _vec(q_interior)))
    return is_interior(C, shifted).interior


@dataclass(frozen=True)
class SeqClosureWitness:
    v: Vec
    q: Vec
    eps_schedule: tuple
    verdicts: tuple

    def to_json(self):
        return {"v": [str(x) for x in self.v], "q": [str(x) for x in self.q],
                "eps_schedule": [str(e) for e in self.eps_schedule],
                "verdicts": list(self.verdicts)}


def check_schedule(eps_schedule) -> tuple:
    eps = tuple(Fraction(e) for e in eps_schedule)
    if not eps:
        raise ValueError("empty eps schedule")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps schedule must be positive and strictly decreasing")
    return eps


def seq_closure_member(oracle, v, q, eps_schedule=DEFAULT_EPS) -> tuple:
    """One-sided test of v in C^sequential-closure through v + eps q in C.

    ``oracle`` is a cone or a callable returning True, False or None
    (inconclusive).  Returns ``(verdict, witness)``; ``in_closure`` means
    "at this schedule" and a negative answer is only ``not_detected``.
    """
    eps = check_schedule(eps_schedule)
    test = oracle.contains if isinstance(oracle, TruncatedCone) else oracle
    v, q = _vec(v), _vec(q)
    verdicts = []
    for e in eps:
        r = test(tuple(a + e * b for a, b in zip(v, q)))
        verdicts.append(None if r is None else bool(r))
    if any(r is None for r in verdicts):
        verdict = INCONCLUSIVE
    else:
        verdict = IN_CLOSURE if all(verdicts) else NOT_DETECTED
    return verdict, SeqClosureWitness(v, q, eps, tuple(verdicts))


def semispace_closed(C: TruncatedCone) -> bool:
    """For C with C u -C = V: is dim V/(C n -C) <= 1 (equivalently, C closed)?"""
    if C.kind == SEMISPACE:
        return rank(C.vectors, C.dim) <= 1
    if not C.is_polyhedral:
        raise UnsupportedRepresentation("need a polyhedral or semispace cone")
    H = [h for h in C.facets if any(h)]
    # a polyhedral C with C u -C = V is V itself or a closed halfspace
    if H:
        base = H[0]
        if rank(H, C.dim) > 1 or any(_dot(h, base) < 0 for h in H):
            raise SemispaceHypothesisError("C u -C != V")
    support = nullspace(H, C.dim) if H else [None] * C.dim
    return C.dim - len(support) <= 1
