"""Degree-truncated computations with finitely generated quadratic modules.

A membership question ``f in M`` at degree ``d`` is turned into an SDP over
Gram matrices: one for the implicit generator 1 and one for every generator
``g`` with ``deg g <= d``, each over the monomials of degree at most
``(d - deg g) // 2``.  Positive answers are rationalized and re-expanded
with exact arithmetic before they are reported; negative answers carry a
pseudo-moment functional (the Farkas ray) that is checked on its own.

Vocabulary: ``member`` is a proof, ``infeasible_at_d`` says only that no
representation exists at this truncation, ``no_certificate_at_d`` means the
numerics were inconclusive.  Neither negative status is a statement about
``f`` not lying in ``M``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .numkernel import (FEASIBLE, INFEASIBLE, SdpProblem, Tolerances, is_psd_exact,
                        entry_list, forced_zero_rows, lp_optimize, min_eigenvalue, sdp_feasible)
from .polyring import Polynomial, monomial_basis, perturber, sum_of_squares_of_vars

MEMBER = "member"
INFEASIBLE_AT_D = "infeasible_at_d"
NO_CERTIFICATE = "no_certificate_at_d"

DENOMINATOR_CAP = 10 ** 6
# Gram diagonal entries below this are treated as an exact zero row
FACE_THRESHOLD = 1e-7
FACE_THRESHOLDS = (1e-6, 1e-5, 1e-4, 1e-3)
KERNEL_DENOMINATOR = 10 ** 4
PROJECTION_GRID = 2 ** 20
KERNEL_THRESHOLDS = (1e-7, 1e-5, 1e-3)
MAX_DEGREE = 24

QM = "qm"
PREORDERING = "preordering"


class DegreeOverflow(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticModuleSpec:
    varnames: tuple
    generators: tuple
    kind: str = QM
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "varnames", tuple(self.varnames))
        gens = tuple(self.generators)
        for g in gens:
            if g.varnames != self.varnames:
                raise ValueError(f"generator {g} is not over {self.varnames}")
        object.__setattr__(self, "generators", gens)
        if self.kind not in (QM, PREORDERING):
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def nvars(self):
        return len(self.varnames)

    def poly(self, text: str) -> Polynomial:
        from .polyring import parse_polynomial
        return parse_polynomial(text, self.varnames)

    def effective_generators(self, d: int) -> list:
        """Generators used at degree ``d``; preorderings add products of
        distinct generators whose degree fits."""
        gens = [g for g in self.generators if not g.is_zero()]
        if self.kind == PREORDERING:
            out = []
            for r in range(1, len(gens) + 1):
                for combo in combinations(gens, r):
                    if sum(g.degree() for g in combo) > d:
                        continue
                    p = combo[0]
                    for g in combo[1:]:
                        p = p * g
                    out.append(p)
            gens = out
        seen, uniq = set(), []
        for g in gens:
            if g.degree() <= d and g not in seen:
                seen.add(g)
                uniq.append(g)
        return uniq

    def with_generators(self, gens, name=None) -> "QuadraticModuleSpec":
        return replace(self, generators=tuple(gens),
                       name=self.name if name is None else name)

    def to_json(self):
        return {"vars": list(self.varnames),
                "kind": self.kind,
                "name": self.name,
                "generators": [g.to_json() for g in self.generators]}

    @classmethod
    def from_json(cls, obj) -> "QuadraticModuleSpec":
        varnames = tuple(obj["vars"])
        gens = []
        for g in obj["generators"]:
            p = Polynomial.from_json(g) if isinstance(g, dict) else None
            if p is None:
                from .polyring import parse_polynomial
                p = parse_polynomial(g, varnames)
            gens.append(p.with_varnames(varnames))
        return cls(varnames, tuple(gens), obj.get("kind", QM), obj.get("name", ""))


# ---------------------------------------------------------------------------
# Gram-matrix identities

@dataclass
class _Block:
    multiplier: Polynomial
    basis: list


@dataclass
class _Layout:
    blocks: list
    monos: list
    index: dict
    target: Polynomial
    prob: SdpProblem

    def polys(self, mats) -> list:
        """Exact expansions  b^T G b  of each block (before the multiplier)."""
        vn = self.target.varnames
        out = []
        for blk, G in zip(self.blocks, mats):
            terms: dict = {}
            n = len(blk.basis)
            for i in range(n):
                for j in range(n):
                    c = G[i][j]
                    if c:
                        m = tuple(a + b for a, b in zip(blk.basis[i], blk.basis[j]))
                        terms[m] = terms.get(m, 0) + c
            out.append(Polynomial(terms, vn))
        return out

    def residual_poly(self, mats) -> Polynomial:
        total = self.target
        for blk, s in zip(self.blocks, self.polys(mats)):
            total = total - blk.multiplier * s
        return total


def _layout(target: Polynomial, blocks: list) -> _Layout:
    monos: list = []
    index: dict = {}

    def row_of(m):
        if m not in index:
            index[m] = len(monos)
            monos.append(m)
        return index[m]

    for m in target.monomials():
        row_of(m)
    cols = []
    for blk in blocks:
        mult = list(blk.multiplier.items())
        for (i, j) in entry_list(len(blk.basis)):
            col = {}
            bb = tuple(a + b for a, b in zip(blk.basis[i], blk.basis[j]))
            w = 1 if i == j else 2
            for mono, c in mult:
                r = row_of(tuple(a + b for a, b in zip(bb, mono)))
                col[r] = col.get(r, 0) + w * c
            cols.append(col)
    rows = np.zeros((len(monos), len(cols)))
    for e, col in enumerate(cols):
        for r, c in col.items():
            rows[r, e] = float(c)
    rhs = np.array([float(target.coeff(m)) for m in monos])
    keep = np.any(rows != 0, axis=1) | (rhs != 0)
    if not keep.all():
        rows, rhs = rows[keep], rhs[keep]
        kept = [m for m, k in zip(monos, keep) if k]
        monos = kept
        index = {m: r for r, m in enumerate(kept)}
    prob = SdpProblem([len(b.basis) for b in blocks], rows, rhs)
    return _Layout(blocks, monos, index, target, prob)


def _module_blocks(M: QuadraticModuleSpec, d: int, sign: int = 1) -> list:
    n = M.nvars
    one = Polynomial.constant(sign, M.varnames)
    blocks = [_Block(one, monomial_basis(n, d // 2))]
    for g in M.effective_generators(d):
        k = (d - g.degree()) // 2
        blocks.append(_Block(g if sign > 0 else -g, monomial_basis(n, k)))
    return blocks


def _rationalize(mats, grid: Optional[int] = None) -> list:
    """Nearby rationals with small denominators, or on the common grid
    1/``grid``, which keeps exact elimination from growing denominators."""
    out = []
    for X in mats:
        X = (np.asarray(X) + np.asarray(X).T) / 2
        n = X.shape[0]
        if grid:
            Q = [[Fraction(round(float(X[i, j]) * grid), grid) for j in range(n)]
                 for i in range(n)]
        else:
            Q = [[Fraction(0) if abs(X[i, j]) < 1e-11 else
                  Fraction(float(X[i, j])).limit_denominator(DENOMINATOR_CAP)
                  for j in range(n)] for i in range(n)]
        out.append(Q)
    return out


def _absorb(layout: _Layout, mats, into: int) -> bool:
    """Push the exact residual into block ``into`` (constant multiplier).

    Each monomial's residual is spread evenly over the Gram entries that
    produce it, which is the orthogonal projection for that block.  Returns
    False if some residual monomial cannot be reached from the block.
    """
    blk = layout.blocks[into]
    scale = blk.multiplier.constant_term()
    if not blk.multiplier.is_constant() or scale == 0:
        return False
    r = layout.residual_poly(mats)
    if r.is_zero():
        return True
    pairs: dict = {}
    n = len(blk.basis)
    for i in range(n):
        for j in range(n):
            m = tuple(a + b for a, b in zip(blk.basis[i], blk.basis[j]))
            pairs.setdefault(m, []).append((i, j))
    G = mats[into]
    for m, c in r.items():
        if m not in pairs:
            return False
        share = c / (scale * len(pairs[m]))
        for i, j in pairs[m]:
            G[i][j] += share
    return layout.residual_poly(mats).is_zero()


def _exact_project(layout: _Layout, mats, frozen=frozenset(), kernels=None) -> bool:
    """Least-norm exact correction of the Gram entries (fallback path).

    Rows/columns listed in ``frozen`` as (block, index) are held at zero.
    ``kernels`` maps a block index to rational vectors that the corrected
    Gram matrix must annihilate exactly.
    """
    kernels = kernels or {}
    for b, i in frozen:
        n = len(mats[b])
        for j in range(n):
            mats[b][i][j] = Fraction(0)
            mats[b][j][i] = Fraction(0)
    r = layout.residual_poly(mats)
    kernel_rows = []  # (block, vector, row index, current value of (G v)_i)
    for b, vecs in kernels.items():
        G = mats[b]
        for v in vecs:
            for i in range(len(G)):
                kernel_rows.append((b, v, i, sum((G[i][j] * v[j] for j in range(len(G))),
                                                 Fraction(0))))
    if r.is_zero() and not any(k[3] for k in kernel_rows):
        return True
    monos = sorted(set(layout.monos) | set(r.monomials()),
                   key=lambda m: (sum(m), m))
    ridx = {m: k for k, m in enumerate(monos)}
    npoly = len(monos)
    kidx: dict = {}
    for k, (b, _, i, _) in enumerate(kernel_rows):
        kidx.setdefault(b, []).append((npoly + k, kernel_rows[k][1], i))
    cols = []  # (block, i, j, {row: coeff})
    for b, blk in enumerate(layout.blocks):
        for (i, j) in entry_list(len(blk.basis)):
            if (b, i) in frozen or (b, j) in frozen:
                continue
            bb = tuple(a + c for a, c in zip(blk.basis[i], blk.basis[j]))
            w = 1 if i == j else 2
            col = {}
            for mono, c in blk.multiplier.items():
                k = ridx.get(tuple(a + e for a, e in zip(bb, mono)))
                if k is None:
                    continue
                col[k] = col.get(k, 0) + w * c
            # raising G[i][j] (and G[j][i]) moves (G v)_i by v_j and (G v)_j by v_i
            for k, v, row in kidx.get(b, ()):
                c = (v[j] if row == i else 0) + (v[i] if row == j and i != j else 0)
                if c:
                    col[k] = col.get(k, 0) + c
            cols.append((b, i, j, col))
    m = npoly + len(kernel_rows)
    # normal equations (A A^T) z = r
    AAt = [[Fraction(0)] * m for _ in range(m)]
    for _, _, _, col in cols:
        items = list(col.items())
        for r1, c1 in items:
            for r2, c2 in items:
                AAt[r1][r2] += c1 * c2
    rhs = [r.coeff(mono) for mono in monos] + [-k[3] for k in kernel_rows]
    z = _solve_exact(AAt, rhs)
    if z is None:
        return False
    for b, i, j, col in cols:
        delta = sum((c * z[k] for k, c in col.items()), Fraction(0))
        if delta:
            mats[b][i][j] += delta
            if i != j:
                mats[b][j][i] += delta
    return layout.residual_poly(mats).is_zero()


def _rational_kernel(X, rel: float) -> list:
    """Rational basis (in reduced row echelon form) of the eigenvectors of
    ``X`` whose eigenvalues fall below ``rel`` times its spectral scale."""
    X = (np.asarray(X, dtype=float) + np.asarray(X, dtype=float).T) / 2
    w, V = np.linalg.eigh(X)
    small = w < rel * max(1.0, float(np.max(np.abs(w))))
    if not small.any() or small.all():
        return []
    K = V[:, small].T.copy()
    vecs, col = [], 0
    for r in range(K.shape[0]):
        while col < K.shape[1] and np.max(np.abs(K[r:, col])) < 1e-3:
            col += 1
        if col == K.shape[1]:
            break
        p = r + int(np.argmax(np.abs(K[r:, col])))
        K[[r, p]] = K[[p, r]]
        K[r] /= K[r, col]
        for q in range(K.shape[0]):
            if q != r:
                K[q] -= K[q, col] * K[r]
        col += 1
    for row in K:
        vecs.append([Fraction(0) if abs(c) < 1e-9 else
                     Fraction(float(c)).limit_denominator(KERNEL_DENOMINATOR) for c in row])
    return [v for v in vecs if any(v)]


def _solve_exact(A, b):
    """One exact solution of the square system A z = b, or None if it is
    inconsistent.

    Rows are scaled to integers and eliminated fraction-free, each row
    divided by the gcd of its entries, which is far cheaper than Fraction
    arithmetic.  A float least-squares screen rejects clearly inconsistent
    systems first.
    """
    n = len(b)
    if n == 0:
        return []
    Af = np.array([[float(v) for v in row] for row in A])
    bf = np.array([float(v) for v in b])
    zf = np.linalg.lstsq(Af, bf, rcond=1e-9)[0]
    # the right-hand side is a tiny residual, so measure relative to it
    if np.max(np.abs(Af @ zf - bf)) > 1e-6 * float(np.max(np.abs(bf))):
        return None
    remaining = []
    for i in range(n):
        entries = {j: Fraction(v) for j, v in enumerate(A[i]) if v}
        rhs = Fraction(b[i])
        den = math.lcm(rhs.denominator, *(v.denominator for v in entries.values()))
        remaining.append(({j: int(v * den) for j, v in entries.items()}, int(rhs * den)))
    pivots = []  # (column, integer row, integer rhs)
    for c in range(n):
        cands = [k for k, (row, _) in enumerate(remaining) if c in row]
        if not cands:
            continue
        k = min(cands, key=lambda k: len(remaining[k][0]))
        prow, prhs = remaining.pop(k)
        p = prow[c]
        nxt = []
        for row, rhs in remaining:
            f = row.get(c)
            if f:
                new = {j: p * v for j, v in row.items()}
                for j, v in prow.items():
                    w = new.get(j, 0) - f * v
                    if w:
                        new[j] = w
                    else:
                        new.pop(j, None)
                rhs = p * rhs - f * prhs
                g = math.gcd(rhs, *new.values())
                if g > 1:
                    new = {j: v // g for j, v in new.items()}
                    rhs //= g
                row = new
            nxt.append((row, rhs))
        remaining = nxt
        pivots.append((c, prow, prhs))
    if any(rhs != 0 for _, rhs in remaining):
        return None
    z = [Fraction(0)] * n
    for c, prow, prhs in reversed(pivots):
        acc = Fraction(prhs) - sum((v * z[j] for j, v in prow.items() if j != c), Fraction(0))
        z[c] = acc / prow[c]
    return z


# ---------------------------------------------------------------------------
# results

@dataclass
class PseudoMoments:
    """A linear functional on polynomials of degree <= ``degree``."""
    varnames: tuple
    degree: int
    values: dict

    def __call__(self, p: Polynomial):
        total = 0
        for m, c in p.items():
            if m not in self.values:
                raise KeyError(f"moment of {m} not available")
            total += c * self.values[m]
        return total

    @property
    def mass(self):
        return self.values.get((0,) * len(self.varnames), 0)

    @classmethod
    def dirac(cls, point, varnames, degree) -> "PseudoMoments":
        vals = {}
        for m in monomial_basis(len(varnames), degree):
            v = 1
            for x, e in zip(point, m):
                v *= x ** e
            vals[m] = v
        return cls(tuple(varnames), degree, vals)

    @classmethod
    def from_sequence(cls, varnames, degree, seq) -> "PseudoMoments":
        basis = monomial_basis(len(varnames), degree)
        if len(seq) != len(basis):
            raise ValueError(f"expected {len(basis)} moments, got {len(seq)}")
        return cls(tuple(varnames), degree, dict(zip(basis, seq)))

    def to_json(self):
        return {"vars": list(self.varnames), "degree": self.degree,
                "moments": [{"exps": list(m), "value": float(v)}
                            for m, v in sorted(self.values.items(),
                                               key=lambda t: (sum(t[0]), t[0]))]}


# Symmetric eigensolvers are backward stable with error about n * 1e-16 * |G|,
# so a float eigenvalue above this relative margin is certainly positive.
PD_MARGIN = 1e-10


def gram_is_psd(G) -> bool:
    """PSD test for a rational Gram: float fast path when clearly positive
    definite, exact LDL^T otherwise."""
    A = np.array([[float(x) for x in row] for row in G])
    if A.size and np.all(np.isfinite(A)):
        scale = max(1.0, float(np.linalg.norm(A)))
        if np.linalg.eigvalsh(A)[0] > PD_MARGIN * len(A) * scale:
            return True
    return is_psd_exact(G)


@dataclass
class MembershipCertificate:
    """f = sum_k multiplier_k * b_k^T G_k b_k  with exact rational G_k."""
    degree: int
    target: Polynomial
    multipliers: list
    bases: list
    grams: list
    residual: Fraction = Fraction(0)
    mineig: float = float("nan")
    tol: Tolerances = field(default_factory=Tolerances)
    labels: list = field(default_factory=list)

    def sos_parts(self) -> list:
        layout = _Layout([_Block(m, b) for m, b in zip(self.multipliers, self.bases)],
                         [], {}, self.target, None)
        return layout.polys(self.grams)

    def expand(self) -> Polynomial:
        total = Polynomial({}, self.target.varnames)
        for mult, s in zip(self.multipliers, self.sos_parts()):
            total = total + mult * s
        return total

    def verify(self) -> tuple:
        """Independent re-check: (exact residual, smallest Gram eigenvalue)."""
        diff = self.target - self.expand()
        res = max((abs(c) for _, c in diff.items()), default=Fraction(0))
        eig = min((min_eigenvalue(np.array(G, dtype=float))
                   for G in self.grams if len(G)), default=float("inf"))
        return res, eig

    def grams_exactly_psd(self) -> bool:
        return all(gram_is_psd(G) for G in self.grams if len(G))

    def is_valid(self) -> bool:
        if not self.grams_exactly_psd():
            return False
        res, eig = self.verify()
        degs_ok = all(
            (2 * max((sum(b) for b in B), default=0) + max(m.degree(), 0)) <= self.degree
            for m, B in zip(self.multipliers, self.bases))
        return res <= self.tol.feas and eig >= -self.tol.psd and degs_ok

    def to_json(self):
        return {
            "degree": self.degree,
            "target": self.target.to_json(),
            "blocks": [{
                "label": lab,
                "multiplier": m.to_json(),
                "basis": [list(b) for b in B],
                "gram": [[f"{c.numerator}/{c.denominator}" for c in row] for row in G],
            } for lab, m, B, G in zip(self.labels or [""] * len(self.grams),
                                      self.multipliers, self.bases, self.grams)],
            "residual": float(self.residual),
            "mineig": self.mineig,
            **self.tol.to_json(),
        }


@dataclass
class MembershipResult:
    status: str
    degree: int
    target: Polynomial
    certificate: Optional[MembershipCertificate] = None
    dual: Optional[PseudoMoments] = None
    dual_margin: float = float("nan")
    solver: str = ""

    @property
    def is_member(self):
        return self.status == MEMBER

    def to_json(self):
        return {"status": self.status, "degree": self.degree,
                "target": str(self.target),
                "certificate": None if self.certificate is None
                else self.certificate.to_json(),
                "dual_ray": None if self.dual is None else self.dual.to_json(),
                "dual_margin": self.dual_margin,
                "solver": self.solver}


def _rational_certificate(target, blocks, sol_blocks, d, absorb_into, tol, labels):
    """Round a float solution to an exact certificate, or return None."""
    layout = _layout(target, blocks)
    # the last attempts pin the near-null eigenvectors of each Gram matrix,
    # for solutions on a face of the PSD cone not aligned with the basis
    for attempt in ("absorb", "face") + KERNEL_THRESHOLDS:
        mats = _rationalize(sol_blocks, None if attempt == "absorb" else PROJECTION_GRID)
        if attempt == "absorb":
            if absorb_into is None:
                continue
            ok = _absorb(layout, mats, absorb_into)
        elif attempt == "face":
            frozen = frozenset(
                (b, i) for b, X in enumerate(sol_blocks)
                for i in range(len(X)) if X[i][i] < FACE_THRESHOLD)
            ok = _exact_project(layout, mats, frozen)
        else:
            kernels = {b: k for b, X in enumerate(sol_blocks)
                       if (k := _rational_kernel(X, attempt))}
            if not kernels:
                continue
            ok = _exact_project(layout, mats, kernels=kernels)
        if not ok:
            continue
        cert = MembershipCertificate(
            d, target, [b.multiplier for b in blocks],
            [b.basis for b in blocks], mats, tol=tol, labels=list(labels))
        res, eig = cert.verify()
        cert.residual, cert.mineig = res, eig
        # a float eigenvalue within tolerance is not enough: Grams with
        # large entries can be indefinite while their smallest eigenvalue
        # rounds into the tolerance band
        if res <= tol.feas and eig >= -tol.psd and cert.grams_exactly_psd():
            return cert
    return None


def _restrict(blocks, sol_blocks, labels, absorb_into, threshold):
    """Drop Gram rows whose diagonal is below ``threshold`` (a face of the
    PSD cone that the solution sits on) and empty blocks."""
    out, out_labels, new_absorb = [], [], None
    for k, (blk, X, lab) in enumerate(zip(blocks, sol_blocks, labels)):
        keep = [i for i in range(len(blk.basis)) if X[i][i] >= threshold]
        if not keep:
            continue
        if k == absorb_into:
            new_absorb = len(out)
        out.append(_Block(blk.multiplier, [blk.basis[i] for i in keep]))
        out_labels.append(lab)
    return out, out_labels, new_absorb


def _certify_from(target, blocks, sol, d, absorb_into, tol, labels):
    """MEMBER result from a float solution, trying smaller faces if needed."""
    cert = _rational_certificate(target, blocks, sol.blocks, d, absorb_into, tol, labels)
    if cert is not None:
        return MEMBER, cert, None, float("nan"), sol.solver_status
    seen = set()
    for thr in FACE_THRESHOLDS:
        rb, rl, ra = _restrict(blocks, sol.blocks, labels, absorb_into, thr)
        key = tuple(tuple(map(tuple, b.basis)) for b in rb)
        if not rb or key in seen:
            continue
        seen.add(key)
        sub = sdp_feasible(_layout(target, rb).prob, tol)
        if sub.status != FEASIBLE:
            continue
        cert = _rational_certificate(target, rb, sub.blocks, d, ra, tol, rl)
        if cert is not None:
            return MEMBER, cert, None, float("nan"), sub.solver_status + "; face-restricted"
    return None


def _solve_identity(target: Polynomial, blocks: list, d: int, absorb_into: int,
                    tol: Tolerances, labels=None):
    labels = labels or [str(b.multiplier) for b in blocks]
    layout = _layout(target, blocks)
    sol = sdp_feasible(layout.prob, tol)
    if sol.status == FEASIBLE:
        found = _certify_from(target, blocks, sol, d, absorb_into, tol, labels)
        if found is not None:
            return found
    if sol.status != INFEASIBLE:
        # no interior point: solve again on the face cut out by forced zeros
        zeros = forced_zero_rows(layout.prob)
        if zeros:
            marks = [[0.0 if (b, i) in zeros else 1.0 for i in range(len(blk.basis))]
                     for b, blk in enumerate(blocks)]
            rb, rl, ra = _restrict(blocks, [np.diag(v) for v in marks], labels, absorb_into, 0.5)
            sub = sdp_feasible(_layout(target, rb).prob, tol) if rb else None
            if sub is not None and sub.status == FEASIBLE:
                found = _certify_from(target, rb, sub, d, ra, tol, rl)
                if found is not None:
                    return found[:4] + (found[4] + "; facially reduced",)
        if sol.status == FEASIBLE:
            return (NO_CERTIFICATE, None, None, float("nan"),
                    sol.solver_status + "; rationalization failed")
    if sol.status == INFEASIBLE:
        vals = {m: 0.0 for m in monomial_basis(target.nvars, d)}
        for m, y in zip(layout.monos, sol.ray):
            vals[m] = float(y)
        L = PseudoMoments(target.varnames, d, vals)
        margin = _check_identity_ray(L, target, blocks, tol)
        if margin is not None:
            return INFEASIBLE_AT_D, None, L, margin, sol.solver_status
    return NO_CERTIFICATE, None, None, float("nan"), sol.solver_status


def _exact_localizing(values: dict, g: Polynomial, basis) -> list:
    n = len(basis)
    H = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            bb = tuple(a + b for a, b in zip(basis[i], basis[j]))
            v = sum((c * values[tuple(a + e for a, e in zip(bb, mono))]
                     for mono, c in g.items()), Fraction(0))
            H[i][j] = H[j][i] = v
    return H


def _check_identity_ray(L: PseudoMoments, target, blocks, tol) -> Optional[float]:
    """Re-derive the separating inequality from the functional alone.

    The float moments are read as exact binary fractions; the functional
    must be exactly negative on the target and exactly nonnegative on every
    block, so a near-feasible problem never yields an infeasibility claim.
    """
    exact = {m: Fraction(float(v)) for m, v in L.values.items()}
    margin = -sum((c * exact[m] for m, c in target.items()), Fraction(0))
    if float(margin) <= tol.feas:
        return None
    for blk in blocks:
        if blk.basis and not is_psd_exact(_exact_localizing(exact, blk.multiplier, blk.basis)):
            return None
    return float(margin)


def localizing_matrix(L: PseudoMoments, g: Polynomial, basis) -> np.ndarray:
    n = len(basis)
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            bb = tuple(a + b for a, b in zip(basis[i], basis[j]))
            v = 0.0
            for mono, c in g.items():
                v += float(c) * float(L.values[tuple(a + e for a, e in zip(bb, mono))])
            H[i, j] = H[j, i] = v
    return H


# ---------------------------------------------------------------------------
# operations

def _check_degree(f: Polynomial, d: int):
    if d > MAX_DEGREE:
        raise DegreeOverflow(f"degree {d} above configured limit {MAX_DEGREE}")
    if f.degree() > d:
        raise DegreeOverflow(f"deg f = {f.degree()} exceeds truncation degree {d}")


def member(f: Polynomial, M: QuadraticModuleSpec, d: int,
           tol: Tolerances | None = None) -> MembershipResult:
    """Search for f = sigma_0 + sum sigma_i g_i with every term of degree <= d."""
    tol = tol or Tolerances.default()
    f = f.with_varnames(M.varnames) if f.varnames != M.varnames else f
    _check_degree(f, d)
    blocks = _module_blocks(M, d)
    labels = ["1"] + [str(g) for g in M.effective_generators(d)]
    status, cert, L, margin, info = _solve_identity(f, blocks, d, 0, tol, labels)
    return MembershipResult(status, d, f, cert, L, margin, info)


@dataclass
class SeqMemberResult:
    verdict: str  # in_Mddagger_at_schedule | not_detected
    base: Polynomial
    perturbation: Polynomial
    schedule: list
    results: list

    def to_json(self):
        return {"verdict": self.verdict, "base": str(self.base),
                "perturbation": str(self.perturbation),
                "schedule": [float(e) for e in self.schedule],
                "per_eps": [{"eps": float(e), "status": r.status}
                            for e, r in zip(self.schedule, self.results)]}


IN_MDAGGER = "in_Mddagger_at_schedule"
NOT_DETECTED = "not_detected"
DEFAULT_EPS = [Fraction(1, 10 ** k) for k in range(0, 7)]


def seq_member(f: Polynomial, M: QuadraticModuleSpec, d: int, e: int,
               eps_schedule: Sequence = DEFAULT_EPS, tol: Tolerances | None = None,
               stop_early: bool = True) -> SeqMemberResult:
    """Test f + eps * (1 + |x|^2)^e in M for every eps of the schedule."""
    if 2 * e <= f.degree():
        raise ValueError("need 2e > deg f")
    if 2 * e > d:
        raise DegreeOverflow("degree bound too small for the perturbation")
    q = perturber(M.varnames, e)
    eps = sorted((Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 12)
                  for x in eps_schedule), reverse=True)
    if any(x <= 0 for x in eps):
        raise ValueError("epsilons must be positive")
    results = []
    for x in eps:
        r = member(f + q.scale(x), M, d, tol)
        results.append(r)
        if stop_early and not r.is_member:
            break
    ok = len(results) == len(eps) and all(r.is_member for r in results)
    return SeqMemberResult(IN_MDAGGER if ok else NOT_DETECTED, f, q, eps, results)


@dataclass
class PosYResult:
    status: str
    m: int
    degree: int
    certificate: Optional[MembershipCertificate] = None

    def multiplier_gram(self):
        return None if self.certificate is None else self.certificate.grams[0]

    def to_json(self):
        return {"status": self.status, "m": self.m, "degree": self.degree,
                "certificate": None if self.certificate is None
                else self.certificate.to_json()}


def pos_semiordering(f: Polynomial, M: QuadraticModuleSpec, m: int, d: int,
                     tol: Tolerances | None = None) -> PosYResult:
    """Search for p*f = f^(2m) + q with p a sum of squares and q in M.

    The certificate stores the identity as  f^(2m) = p*f - q, i.e. the first
    block carries multiplier f (the Gram of p) and the remaining blocks carry
    the negated module generators.
    """
    tol = tol or Tolerances.default()
    if m < 0:
        raise ValueError("m must be >= 0")
    target = f ** (2 * m)
    _check_degree(target, d)
    if f.is_zero():
        return PosYResult(NO_CERTIFICATE, m, d)
    kp = (d - f.degree()) // 2
    if kp < 0:
        raise DegreeOverflow("degree bound below deg f")
    blocks = [_Block(f, monomial_basis(M.nvars, kp))] + _module_blocks(M, d, sign=-1)
    labels = ["p (times f)"] + ["-q: 1"] + [f"-q: {g}" for g in M.effective_generators(d)]
    status, cert, _, _, _ = _solve_identity(target, blocks, d, 1, tol, labels)
    return PosYResult(status, m, d, cert)


def pos_semiordering_search(f, M, d, m_max: int = 3, tol=None) -> PosYResult:
    last = None
    for m in range(1, m_max + 1):
        if (f ** (2 * m)).degree() > d:
            break
        last = pos_semiordering(f, M, m, d, tol)
        if last.status == MEMBER:
            return last
    return last or PosYResult(NO_CERTIFICATE, 0, d)


# --- bounded powers ---------------------------------------------------------

@dataclass
class PowerRepresentation:
    """target = sum weight_k * element_k, weights are squares, elements in M."""
    kind: str  # "claim1" | "claim2"
    i: int
    target: Polynomial
    terms: list  # (weight, element, label)

    def expand(self) -> Polynomial:
        total = Polynomial({}, self.target.varnames)
        for w, el, _ in self.terms:
            total = total + w * el
        return total

    def is_exact(self) -> bool:
        return self.expand() == self.target


class IdentityPreconditionError(ValueError):
    pass


def bounded_power_certificates(p: Polynomial, q: Polynomial, f: Polynomial,
                               ell, i_max: int) -> list:
    """Explicit representations of l^(2i) p - f^(2i) p and l^(2i+2) p - f^(2i).

    Requires (l^2 - f^2) p = 1 + q exactly.  Module elements used are
    ``1 + q`` (= l^2 p - f^2 p) and ``q + f^2 p`` (= l^2 p - 1); weights are
    powers of l^2 and of f^2.
    """
    ell = Fraction(ell)
    vn = p.varnames
    one = Polynomial.constant(1, vn)
    l2 = ell * ell
    if (one.scale(l2) - f * f) * p != one + q:
        raise IdentityPreconditionError("(l^2 - f^2) p != 1 + q")
    base1 = ("1+q", one + q)
    base2 = ("q+f^2p", q + f * f * p)
    out = []
    # claim 1 terms for i: list of (weight, element, label)
    c1 = [(one, base1[1], f"1*({base1[0]})")]
    f2 = f * f
    f2i = f2  # f^(2i) for current i
    for i in range(1, i_max + 1):
        target1 = p.scale(l2 ** i) - f2i * p
        out.append(PowerRepresentation("claim1", i, target1, list(c1)))
        # claim 2 at i: l^2 * (claim1_i) + f^(2i) * (l^2 p - 1)
        c2 = [(w.scale(l2), el, f"l^2*{lab}") for w, el, lab in c1]
        c2.append((f2i, base2[1], f"f^{2 * i}*({base2[0]})"))
        target2 = p.scale(l2 ** (i + 1)) - f2i
        out.append(PowerRepresentation("claim2", i, target2, c2))
        # claim 1 recursion to i+1: l^2 * (claim1_i) + f^(2i) * (l^2 p - f^2 p)
        c1 = [(w.scale(l2), el, f"l^2*{lab}") for w, el, lab in c1]
        c1.append((f2i, base1[1], f"f^{2 * i}*({base1[0]})"))
        f2i = f2i * f2
    return out


# --- archimedean, support, stable closure ------------------------------------

@dataclass
class ArchimedeanResult:
    status: str  # archimedean_certified | unknown
    k: Optional[Fraction] = None
    attempts: list = field(default_factory=list)
    certificate: Optional[MembershipCertificate] = None

    def to_json(self):
        return {"status": self.status,
                "k": None if self.k is None else str(self.k),
                "attempts": [{"k": str(k), "degree": d, "status": s}
                             for k, d, s in self.attempts],
                "certificate": None if self.certificate is None
                else self.certificate.to_json()}


def archimedean_probe(M: QuadraticModuleSpec, k_schedule: Iterable, d,
                      tol: Tolerances | None = None) -> ArchimedeanResult:
    """One-sided: k - sum x_i^2 in M certifies archimedean; otherwise unknown."""
    degrees = [d] if isinstance(d, int) else list(d)
    s = sum_of_squares_of_vars(M.varnames)
    attempts = []
    for deg in degrees:
        for k in k_schedule:
            k = Fraction(k)
            r = member(s.scale(-1) + k, M, deg, tol)
            attempts.append((k, deg, r.status))
            if r.is_member:
                return ArchimedeanResult("archimedean_certified", k, attempts,
                                         r.certificate)
    return ArchimedeanResult("unknown", None, attempts)


def support_probe(M: QuadraticModuleSpec, d: int, candidates: Iterable,
                  tol: Tolerances | None = None) -> list:
    """Candidates h with both h and -h certified in M at degree d."""
    out = []
    for h in candidates:
        if member(h, M, d, tol).is_member and member(-h, M, d, tol).is_member:
            out.append(h)
    return out


def stable_closure(M: QuadraticModuleSpec, radical_gens: Iterable) -> QuadraticModuleSpec:
    """M + sqrt(M cap -M) given generators of the radical (ideal part as +-h)."""
    gens = list(M.generators)
    seen = set(gens)
    for h in radical_gens:
        for s in (h, -h):
            if s not in seen:
                gens.append(s)
                seen.add(s)
    return M.with_generators(gens, name=(M.name + "+rad") if M.name else "")


# --- polyhedral stability -----------------------------------------------------

@dataclass
class StabilityResult:
    status: str  # stable | hypothesis_failed | not_applicable | empty
    base_point: Optional[list] = None
    direction: Optional[list] = None
    equalities: list = field(default_factory=list)
    positive_at_base: list = field(default_factory=list)
    zero_at_base: list = field(default_factory=list)
    bounded_witness: Optional[Polynomial] = None
    witness_range: Optional[tuple] = None
    dependence: Optional[list] = None
    probes: list = field(default_factory=list)

    def to_json(self):
        return {"status": self.status,
                "base_point": self.base_point, "direction": self.direction,
                "equalities": [str(g) for g in self.equalities],
                "positive_at_base": [str(g) for g in self.positive_at_base],
                "zero_at_base": [str(g) for g in self.zero_at_base],
                "bounded_witness": None if self.bounded_witness is None
                else str(self.bounded_witness),
                "witness_range": self.witness_range,
                "dependence": self.dependence,
                "probes": self.probes}


def _linear_data(g: Polynomial):
    n = g.nvars
    a = np.zeros(n)
    for i in range(n):
        e = [0] * n
        e[i] = 1
        a[i] = float(g.coeff(tuple(e)))
    return a, float(g.constant_term())


def poly_stability(M: QuadraticModuleSpec, extra_forms: Iterable = (),
                   tol: float = 1e-9) -> StabilityResult:
    """Stability test for modules generated by polynomials of degree <= 1."""
    gens = [g for g in M.generators if not g.is_zero()]
    if any(g.degree() > 1 for g in gens):
        return StabilityResult("not_applicable")
    n = M.nvars
    lin = [_linear_data(g) for g in gens]
    A_ub = np.array([-a for a, _ in lin]) if lin else None
    b_ub = np.array([c for _, c in lin]) if lin else None
    free = [(None, None)] * n
    status, x0, _ = lp_optimize(np.zeros(n), A_ub, b_ub, bounds=free)
    if status != "optimal":
        return StabilityResult("empty")

    def value_range(a, c):
        lo_s, _, lo = lp_optimize(a, A_ub, b_ub, bounds=free)
        hi_s, _, hi = lp_optimize(-a, A_ub, b_ub, bounds=free)
        lo = lo + c if lo_s == "optimal" else None
        hi = -hi + c if hi_s == "optimal" else None
        return lo, hi

    # boundedness probes: coordinates, generators, user forms
    probes = []
    vn = M.varnames
    candidates = [Polynomial.var(v, vn) for v in vn] + gens + list(extra_forms)
    result = StabilityResult("stable", base_point=list(map(float, x0)))
    for h in candidates:
        a, c = _linear_data(h)
        if not np.any(a):
            continue
        lo, hi = value_range(a, c)
        probes.append({"form": str(h), "min": lo, "max": hi})
        if lo is not None and hi is not None and hi - lo > tol:
            result.status = "hypothesis_failed"
            result.bounded_witness = h
            result.witness_range = (lo, hi)
            result.probes = probes
            return result
    result.probes = probes

    # implicit equalities: generators vanishing identically on K_M
    eqs, ineqs = [], []
    for g, (a, c) in zip(gens, lin):
        if not np.any(a):
            continue
        _, hi = value_range(a, c)
        (eqs if hi is not None and abs(hi) <= tol else ineqs).append((g, a, c))
    result.equalities = [g for g, _, _ in eqs]
    if eqs:
        E = np.array([a for _, a, _ in eqs])
        _, sv, vt = np.linalg.svd(E)
        rank = int(np.sum(sv > 1e-10))
        N = vt[rank:].T
    else:
        N = np.eye(n)
    x0 = np.asarray(x0, float)
    pos, zero, homog = [], [], []
    for g, a, c in ineqs:
        val = a @ x0 + c
        h = a @ N
        if np.allclose(h, 0):
            continue
        (pos if val > tol else zero).append(g)
        homog.append(h)
    result.positive_at_base = pos
    result.zero_at_base = zero
    k = N.shape[1]
    if not homog or k == 0:
        result.direction = [0.0] * n
        return result
    H = np.array(homog)
    # positive linear dependence: lambda >= 0, sum lambda = 1, H^T lambda = 0
    st, lam, _ = lp_optimize(np.zeros(len(H)), A_eq=np.vstack([H.T, np.ones(len(H))]),
                             b_eq=np.concatenate([np.zeros(k), [1.0]]),
                             bounds=[(0, None)] * len(H))
    if st == "optimal":
        ineq_gens = pos + zero
        j = int(np.argmax(lam))
        result.status = "hypothesis_failed"
        result.dependence = [float(v) for v in lam]
        result.bounded_witness = ineq_gens[j] if j < len(ineq_gens) else None
        return result
    # strictly positive direction: max s with H z >= s, -1 <= z <= 1, s <= 1
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A = np.hstack([-H, np.ones((len(H), 1))])
    st, z, _ = lp_optimize(c, A, np.zeros(len(H)),
                           bounds=[(-1, 1)] * k + [(None, 1)])
    if st != "optimal" or z[-1] <= tol:
        result.status = "hypothesis_failed"
        return result
    result.direction = list(map(float, N @ z[:k]))
    return result


# --- dual moment check ----------------------------------------------------------

@dataclass
class DualCheckResult:
    status: str  # psd_pass | psd_fail
    mineigs: list
    witness: Optional[Polynomial] = None
    witness_value: Optional[float] = None
    failing_block: Optional[str] = None

    def to_json(self):
        return {"status": self.status, "mineigs": self.mineigs,
                "witness": None if self.witness is None else str(self.witness),
                "witness_value": self.witness_value,
                "failing_block": self.failing_block}


def dual_moment_check(L: PseudoMoments, M: QuadraticModuleSpec, d: int,
                      tol: Tolerances | None = None) -> DualCheckResult:
    """Moment matrix and one localizing matrix per generator must be PSD."""
    tol = tol or Tolerances.default()
    if tuple(L.varnames) != M.varnames:
        raise ValueError("functional and module use different variables")
    if L.degree < 2 * d:
        raise ValueError(f"need moments up to degree {2 * d}, have {L.degree}")
    n = M.nvars
    one = Polynomial.constant(1, M.varnames)
    blocks = [("1", one, monomial_basis(n, d))]
    for g in M.effective_generators(2 * d):
        blocks.append((str(g), g, monomial_basis(n, (2 * d - g.degree()) // 2)))
    eigs = []
    for label, g, basis in blocks:
        H = localizing_matrix(L, g, basis)
        w, V = np.linalg.eigh(H)
        eigs.append(float(w[0]))
        if w[0] < -tol.psd:
            v = V[:, 0]
            s = Polynomial({b: Fraction(float(c)).limit_denominator(10 ** 9)
                            for b, c in zip(basis, v)}, M.varnames)
            witness = g * s * s
            return DualCheckResult("psd_fail", eigs, witness, float(L(witness)), label)
    return DualCheckResult("psd_pass", eigs)
