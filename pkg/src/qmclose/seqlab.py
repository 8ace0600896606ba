"""A countable-dimensional cone whose sequential closures peel one step at a time.

Points of ``E`` are finite coordinate vectors with implicit trailing zeros.
For ``l = (l_0, ..., l_n)`` the set ``U(l)`` consists of the points whose
first ``l_0`` coordinates lie in ``[1/l_1, 1]``, next ``l_1`` in
``[1/l_2, 1]``, ..., next ``l_{n-1}`` in ``[1/l_n, 1]``, and all later
coordinates in ``[0, 1]``.  ``M_n`` is the union of all ``U(l)``, and
``cc(M_n)`` its conic hull.

Membership tests here are exact decision procedures on a slice ``W_m``.
Limit (sequential-closure) detection is constructive: the approximating
sequences raise one block of coordinates to ``1/k``.  They may need a
larger slice ``W_m'`` than the point itself lives in.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

FLOAT_TOL = 1e-12
LP_TOL = 1e-9
DEFAULT_K = (1, 10, 100, 1000, 10 ** 4, 10 ** 6)
DEFAULT_CC_EPS = (Fraction(1, 10), Fraction(1, 1000), Fraction(1, 10 ** 6))


class MalformedSignature(ValueError):
    pass


# ---------------------------------------------------------------------------
# points and signatures

@dataclass(frozen=True)
class AppendixPoint:
    coords: tuple
    m: int = -1

    def __post_init__(self):
        coords = tuple(c if isinstance(c, (Fraction, float)) else Fraction(c)
                       for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if self.m < 0:
            object.__setattr__(self, "m", len(coords))
        if self.m < len(coords):
            raise ValueError("m must be at least the number of explicit coordinates")

    def __getitem__(self, i):
        return self.coords[i] if i < len(self.coords) else Fraction(0)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    def padded(self, m: int) -> tuple:
        return tuple(self[i] for i in range(m))

    def to_json(self):
        return {"coords": [str(c) for c in self.coords], "m": self.m}


def as_point(x) -> AppendixPoint:
    return x if isinstance(x, AppendixPoint) else AppendixPoint(tuple(x))


def check_signature(l, n: int) -> tuple:
    l = tuple(l)
    if len(l) != n + 1:
        raise MalformedSignature(f"signature needs {n + 1} entries, got {len(l)}")
    if any(not isinstance(v, int) or isinstance(v, bool) or v < 1 for v in l):
        raise MalformedSignature("signature entries must be positive integers")
    return l


def _ge(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a >= b
    return float(a) >= float(b) - FLOAT_TOL


def _in_unit(a) -> bool:
    return _ge(a, Fraction(0)) and _ge(Fraction(1), a)


def in_U(x, l, n: int) -> bool:
    """Is x in U(l)?"""
    x = as_point(x)
    l = check_signature(l, n)
    pos = 0
    for j in range(n):
        lo = Fraction(1, l[j + 1])
        for i in range(pos, pos + l[j]):
            c = x[i]
            if not (_ge(c, lo) and _ge(Fraction(1), c)):
                return False
        pos += l[j]
    return all(_in_unit(x[i]) for i in range(pos, len(x.coords)))


def _min_pos(coords) -> Optional[object]:
    pos = [c for c in coords if c > 0]
    return min(pos) if pos else None


def _ceil_recip(c) -> int:
    if isinstance(c, Fraction):
        return math.ceil(1 / c)
    return math.ceil(1 / float(c) - 1e-9)


def default_search_bound(x) -> int:
    mp = _min_pos(as_point(x).coords)
    return 10 if mp is None else max(10, _ceil_recip(mp))


def compositions(total_max: int, parts: int, part_max: int):
    """Tuples of ``parts`` positive integers <= part_max with sum <= total_max."""
    if parts == 0:
        yield ()
        return
    for first in range(1, min(part_max, total_max - parts + 1) + 1):
        for rest in compositions(total_max - first, parts - 1, part_max):
            yield (first,) + rest


@dataclass(frozen=True)
class MnResult:
    member: bool
    signature: Optional[tuple] = None

    def __bool__(self):
        return self.member

    def to_json(self):
        return {"member": self.member,
                "signature": None if self.signature is None else list(self.signature)}


def in_Mn(x, n: int, search_bound: Optional[int] = None) -> MnResult:
    """Exhaustive signature search for x in M_n restricted to W_m."""
    x = as_point(x)
    if n < 1:
        raise ValueError("n >= 1")
    bound = default_search_bound(x) if search_bound is None else int(search_bound)
    if bound < 1:
        raise ValueError("search_bound >= 1")
    for prefix in compositions(x.m, n, bound):
        start = sum(prefix[:-1])
        last = [x[i] for i in range(start, start + prefix[-1])]
        mp = min(last)
        if not mp > 0:
            continue
        # U(prefix, l_n) grows with l_n; the smallest admissible l_n decides
        ln = _ceil_recip(mp)
        if ln > bound:
            continue
        sig = prefix + (ln,)
        if in_U(x, sig, n):
            return MnResult(True, sig)
    return MnResult(False)


# ---------------------------------------------------------------------------
# limits of M_n

@dataclass(frozen=True)
class LimitResult:
    detected: bool
    prefix: Optional[tuple] = None
    m_prime: Optional[int] = None
    ks: tuple = ()

    def to_json(self):
        return {"detected": self.detected,
                "prefix": None if self.prefix is None else list(self.prefix),
                "m_prime": self.m_prime, "k_schedule": list(self.ks)}


def _raise_block(x: AppendixPoint, start: int, length: int, k: int) -> tuple:
    m_prime = max(x.m, start + length)
    lo = Fraction(1, k)
    out = list(x.padded(m_prime))
    for i in range(start, start + length):
        c = out[i]
        out[i] = lo if (c < lo if isinstance(c, Fraction) else float(c) < float(lo)) else c
    return tuple(out)


def limit_of_Mn(x, n: int, k_schedule=DEFAULT_K) -> LimitResult:
    """Detect x as a limit of points of M_n.

    For each admissible choice of the first n-1 blocks, the n-th block is
    raised to at least 1/k; each such point is checked to lie in
    U(l_0, ..., l_{n-1}, k) and within 1/k of x for every k in the schedule.
    """
    x = as_point(x)
    if n < 1:
        raise ValueError("n >= 1")
    ks = tuple(int(k) for k in k_schedule)
    for prefix in compositions(x.m, n - 1, x.m):
        start = sum(prefix)
        if n == 1:
            length = 1
        else:
            block = [x[i] for i in range(start - prefix[-1], start)]
            mp = min(block)
            if not mp > 0:
                continue
            length = _ceil_recip(mp)
        ok = True
        for k in ks:
            xk = _raise_block(x, start, length, k)
            dist = max(abs(float(a) - float(b)) for a, b in zip(xk, x.padded(len(xk))))
            if dist > 1 / k + FLOAT_TOL or not in_U(xk, prefix + (length, k), n):
                ok = False
                break
        if ok:
            return LimitResult(True, prefix + (length,), max(x.m, start + length), ks)
    return LimitResult(False, ks=ks)


# ---------------------------------------------------------------------------
# conic hull

@dataclass(frozen=True)
class ConicCombination:
    coefficients: tuple
    atoms: tuple
    signatures: tuple

    @property
    def support(self) -> int:
        return len(self.coefficients)

    def total(self, m: int) -> np.ndarray:
        out = np.zeros(m)
        for lam, a in zip(self.coefficients, self.atoms):
            out[:len(a)] += lam * np.asarray(a, dtype=float)
        return out

    def to_json(self):
        return {"coefficients": list(self.coefficients),
                "atoms": [list(a) for a in self.atoms],
                "signatures": [list(s) for s in self.signatures]}


@dataclass(frozen=True)
class CcResult:
    member: bool
    combination: Optional[ConicCombination] = None
    boxes_considered: int = 0

    def __bool__(self):
        return self.member

    def to_json(self):
        return {"member": self.member, "boxes_considered": self.boxes_considered,
                "combination": None if self.combination is None else self.combination.to_json()}


def _boxes(xs: np.ndarray, m: int, n: int):
    """Prefixes (l_0..l_{n-1}) whose strictly positive region fits supp(x)."""
    out = []
    for prefix in compositions(m, n, m):
        S = sum(prefix)
        if np.all(xs[:S] > 0):
            out.append(prefix)
    return out


def _support_lp(xs, m, n, boxes):
    """Maximize theta plus the number of last-block variables that can be
    positive, over the homogenized box cones summing to theta * x."""
    nb = len(boxes)
    per = m + 1                               # y_B (m entries) then t_B
    last_idx = []
    for b, prefix in enumerate(boxes):
        start = sum(prefix[:-1])
        for i in range(start, start + prefix[-1]):
            last_idx.append((b, i))
    ns = len(last_idx)
    nv = nb * per + ns + 2                    # ..., s_j, capped theta, theta
    th = nv - 1
    rows, cols, vals, rhs = [], [], [], []
    r = 0

    def add(entries, b_):
        nonlocal r
        for c, v in entries:
            rows.append(r)
            cols.append(c)
            vals.append(v)
        rhs.append(b_)
        r += 1

    for b, prefix in enumerate(boxes):
        base = b * per
        t = base + m
        lo = np.zeros(m)
        pos = 0
        for j in range(n - 1):
            lo[pos:pos + prefix[j]] = 1.0 / prefix[j + 1]
            pos += prefix[j]
        for i in range(m):
            add([(base + i, 1.0), (t, -1.0)], 0.0)               # y <= t
            if lo[i] > 0:
                add([(base + i, -1.0), (t, lo[i])], 0.0)         # y >= lo t
    for j, (b, i) in enumerate(last_idx):
        add([(nb * per + j, 1.0), (b * per + i, -1.0)], 0.0)     # s_j <= y
    add([(th - 1, 1.0), (th, -1.0)], 0.0)                        # capped <= theta
    A_ub = sparse.csr_matrix((vals, (rows, cols)), shape=(r, nv))
    b_ub = np.array(rhs)
    er, ec, ev = [], [], []
    for i in range(m):
        for b in range(nb):
            er.append(i)
            ec.append(b * per + i)
            ev.append(1.0)
        er.append(i)
        ec.append(th)
        ev.append(-xs[i])
    A_eq = sparse.csr_matrix((ev, (er, ec)), shape=(m, nv))
    c = np.zeros(nv)
    c[nb * per:th] = -1.0
    bounds = [(0, None)] * (nb * per) + [(0, 1)] * ns + [(0, 1), (0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.zeros(m),
                  bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return res.x, last_idx, per


def caratheodory_reduce(coefs, atoms, tol=1e-12):
    """Drop atoms along null directions until they are linearly independent."""
    coefs = [float(c) for c in coefs]
    atoms = [np.asarray(a, dtype=float) for a in atoms]
    keep = list(range(len(atoms)))
    while len(keep) > 1:
        A = np.column_stack([atoms[i] for i in keep])
        _, s, vt = np.linalg.svd(A)
        rnk = int(np.sum(s > tol * max(1.0, s[0])))
        if rnk == len(keep):
            break
        mu = vt[-1]
        if mu.max() <= 0:
            mu = -mu
        lam = np.array([coefs[i] for i in keep])
        ratios = [lam[j] / mu[j] if mu[j] > tol else np.inf for j in range(len(keep))]
        jstar = int(np.argmin(ratios))
        step = ratios[jstar]
        for j, i in enumerate(keep):
            coefs[i] = coefs[i] - step * mu[j]
        keep = [i for j, i in enumerate(keep) if j != jstar and coefs[i] > tol]
    return [coefs[i] for i in keep], keep


def in_ccMn(x, n: int, search_bound: Optional[int] = None) -> CcResult:
    """Decide x in cc(M_n) restricted to W_m by LP over box cones.

    Each signature prefix gives a box whose conic hull is
    ``{y : lo t <= y <= t}``; the last block has the open lower bound
    ``y > 0`` (the union over l_n).  Boxes that cannot carry a strictly
    positive last block are discarded iteratively, after which a maximal
    support solution is a valid representation whenever one exists.
    ``search_bound`` only caps the signature attached to reported atoms.
    """
    x = as_point(x)
    m = x.m
    xs = np.array([float(c) for c in x.padded(m)])
    if np.any(xs < -FLOAT_TOL):
        return CcResult(False)
    if np.all(np.abs(xs) <= FLOAT_TOL):
        return CcResult(True, ConicCombination((), (), ()))
    boxes = _boxes(xs, m, n)
    considered = len(boxes)
    while boxes:
        sol = _support_lp(xs, m, n, boxes)
        if sol is None:
            return CcResult(False, boxes_considered=considered)
        z, last_idx, per = sol
        bad = {b for j, (b, _) in enumerate(last_idx) if z[len(boxes) * per + j] < 0.5}
        if bad:
            boxes = [p for b, p in enumerate(boxes) if b not in bad]
            continue
        theta = z[-1]
        if z[-2] < 0.5:
            return CcResult(False, boxes_considered=considered)
        coefs, atoms, sigs = [], [], []
        for b, prefix in enumerate(boxes):
            t = z[b * per + m]
            if t <= LP_TOL:
                continue
            a = np.clip(z[b * per:b * per + m] / t, 0.0, 1.0)
            start = sum(prefix[:-1])
            ln = max(1, math.ceil(1.0 / a[start:start + prefix[-1]].min() - 1e-9))
            coefs.append(t / theta)
            atoms.append(a)
            sigs.append(prefix + (ln,))
        red, keep = caratheodory_reduce(coefs, atoms)
        combo = ConicCombination(tuple(red), tuple(tuple(atoms[i]) for i in keep),
                                 tuple(sigs[i] for i in keep))
        return CcResult(True, combo, considered)
    return CcResult(False, boxes_considered=considered)


def cc_M1_closed_form(x) -> bool:
    """cc(M_1) = {x >= 0 : x_0 = 0 implies x = 0}."""
    x = as_point(x)
    if any(float(c) < -FLOAT_TOL for c in x.coords):
        return False
    return float(x[0]) > FLOAT_TOL or all(abs(float(c)) <= FLOAT_TOL for c in x.coords)


@dataclass(frozen=True)
class CcLimitResult:
    detected: bool
    m_prime: Optional[int] = None
    eps: tuple = ()
    max_coefficient: Optional[float] = None
    coefficient_bound: Optional[float] = None

    def to_json(self):
        return {"detected": self.detected, "m_prime": self.m_prime,
                "eps": [str(e) for e in self.eps], "max_coefficient": self.max_coefficient,
                "coefficient_bound": self.coefficient_bound}


def limit_of_ccMn(x, n: int, eps_schedule=DEFAULT_CC_EPS, extra_dims: Optional[int] = None) -> CcLimitResult:
    """Detect x in cc(M_n)^seq-closure through x + eps * (1,...,1) in cc(M_n) n W_m'.

    Success is monotone in m': an extra coordinate eps can be spread over the
    atoms' tails because their total weight is at least x_0 + eps.  So only
    m' = m and the largest slice m + extra_dims are tried, smallest eps first.  For each accepted decomposition the atoms'
    first coordinates are at least 1/m', which bounds every coefficient by
    m' (x_0 + eps) when n >= 2.
    """
    x = as_point(x)
    eps = tuple(sorted((Fraction(e) for e in eps_schedule)))
    if extra_dims is None:
        mp = _min_pos(x.coords)
        mx = max((float(c) for c in x.coords), default=0.0)
        extra_dims = n + (0 if mp is None else math.ceil(mx / float(mp)))
    base = [float(c) for c in x.coords]
    for m_prime in sorted({x.m, x.m + extra_dims}):
        worst = 0.0
        bound = 0.0
        ok = True
        for e in eps:
            pt = [c + float(e) for c in base] + [float(e)] * (m_prime - len(base))
            res = in_ccMn(AppendixPoint(tuple(pt)), n)
            if not res.member:
                ok = False
                break
            combo = res.combination
            worst = max([worst] + list(combo.coefficients))
            if n >= 2:
                if combo.atoms and min(a[0] for a in combo.atoms) < 1.0 / m_prime - 1e-9:
                    ok = False
                    break
                bound = max(bound, m_prime * pt[0])
            else:
                bound = float("inf")
        if ok:
            return CcLimitResult(True, m_prime, eps, worst, bound)
    return CcLimitResult(False, eps=eps)


# ---------------------------------------------------------------------------
# sampled verification

def _frac(num: int, den: int) -> Fraction:
    return Fraction(int(num), int(den))


def _sample_in_Mn(rng, m: int, n: int, den: int) -> tuple:
    prefixes = list(compositions(m, n, m))
    prefix = prefixes[rng.integers(len(prefixes))]
    ln = int(rng.integers(1, 21))
    sig = prefix + (ln,)
    out = []
    for j in range(n):
        lo = math.ceil(den / sig[j + 1])
        out += [_frac(rng.integers(lo, den + 1), den) for _ in range(sig[j])]
    out += [_frac(rng.integers(0, den + 1), den) for _ in range(m - len(out))]
    return tuple(out[:m])


def sample_points(n: int, m: int, samples: int, seed, den: int = 1000) -> list:
    """Deterministic mix of uniform, sparse, boundary and crafted points of W_m."""
    rng = np.random.default_rng(seed)
    pts = []
    for s in range(samples):
        kind = s % 6
        if kind == 0:
            x = tuple(_frac(rng.integers(0, den + 1), den) for _ in range(m))
        elif kind == 1:
            x = list(_frac(rng.integers(0, den + 1), den) for _ in range(m))
            for i in range(int(rng.integers(1, m + 1))):
                x[i] = Fraction(0)
            x = tuple(x)
        elif kind == 2:
            x = _sample_in_Mn(rng, m, n, den)
        elif kind == 3:
            x = list(_sample_in_Mn(rng, m, max(1, n - 1), den))
            x[int(rng.integers(n - 1, m)) if n - 1 < m else m - 1] = Fraction(0)
            x = tuple(x)
        elif kind == 4:
            x = tuple(Fraction(0) if rng.random() < 0.5 else _frac(rng.integers(1, den + 1), den)
                      for _ in range(m))
        else:
            x = list(_sample_in_Mn(rng, m, max(1, n - 1), den))
            i = int(rng.integers(0, m))
            x[i] = _frac(den + 1, den) if rng.random() < 0.5 else _frac(-1, den)
            x = tuple(x)
        pts.append(x)
    return pts


def strictness_witness(n: int, m: int) -> tuple:
    """A point of M_{n-1} outside M_n, inside W_m."""
    if n < 2 or m < n:
        raise ValueError("need n >= 2 and m >= n")
    return tuple([Fraction(1)] * (n - 1) + [Fraction(0)] * (m - n + 1))


@dataclass
class PeelingReport:
    n: int
    m: int
    samples: int
    seed: object
    cone: bool
    agreements: int = 0
    discrepancies: list = field(default_factory=list)
    strict_points: int = 0
    strictness_witness: Optional[tuple] = None
    strictness_verified: bool = False
    points: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.discrepancies and self.strictness_verified

    def to_json(self, with_points: bool = True):
        out = {"n": self.n, "m": self.m, "samples": self.samples, "seed": self.seed,
               "cone": self.cone, "agreements": self.agreements,
               "discrepancies": self.discrepancies, "strict_points": self.strict_points,
               "strictness_witness": None if self.strictness_witness is None
               else [str(c) for c in self.strictness_witness],
               "strictness_verified": self.strictness_verified, "ok": self.ok}
        if with_points:
            out["points"] = self.points
        return out


def _check_args(n, m, samples, min_n=2):
    if n < min_n:
        raise ValueError(f"n >= {min_n}")
    if m < n:
        raise ValueError("m >= n")
    if samples < 1:
        raise ValueError("sample budget must be positive")


def seq_step_verify(n: int, m: int, samples: int, seed=0) -> PeelingReport:
    """Compare membership in M_{n-1} with limit detection for M_n on samples."""
    _check_args(n, m, samples)
    rep = PeelingReport(n, m, samples, seed, cone=False)
    for x in sample_points(n, m, samples, seed):
        prev = in_Mn(x, n - 1)
        cur = in_Mn(x, n)
        lim = limit_of_Mn(x, n)
        agree = prev.member == lim.detected and (not cur.member or lim.detected)
        rep.strict_points += int(prev.member and not cur.member)
        rec = {"x": [str(c) for c in x], "in_prev": prev.member, "in_cur": cur.member,
               "limit": lim.detected,
               "signature": None if prev.signature is None else list(prev.signature),
               "limit_prefix": None if lim.prefix is None else list(lim.prefix),
               "m_prime": lim.m_prime}
        rep.points.append(rec)
        if agree:
            rep.agreements += 1
        else:
            rep.discrepancies.append(rec)
    w = strictness_witness(n, m)
    rep.strictness_witness = w
    rep.strictness_verified = (in_Mn(w, n - 1).member and not in_Mn(w, n).member
                               and limit_of_Mn(w, n).detected)
    return rep


def cc_strictness_witness(n: int, m: int) -> tuple:
    """A point of cc(M_{n-1}) outside cc(M_n)."""
    return strictness_witness(n, m)


def cc_sample_points(n: int, m: int, samples: int, seed, den: int = 20) -> list:
    """Samples with coordinate ratios bounded by ``den`` so limit slices stay small."""
    rng = np.random.default_rng(seed)
    pts = []
    for s in range(samples):
        kind = s % 5
        scale = Fraction(int(rng.integers(1, 6)))
        if kind == 0:
            x = [_frac(rng.integers(1, den + 1), den) for _ in range(m)]
        elif kind == 1:
            x = [_frac(rng.integers(1, den + 1), den) if rng.random() < 0.6 else Fraction(0)
                 for _ in range(m)]
        elif kind == 2:
            x = [_frac(rng.integers(1, den + 1), den) for _ in range(m)]
            for i in range(int(rng.integers(1, m + 1))):
                x[i] = Fraction(0)
        elif kind == 3:
            x = list(strictness_witness(max(n, 2), m))
            x[int(rng.integers(0, m))] = _frac(rng.integers(1, den + 1), den)
        else:
            x = [_frac(rng.integers(1, den + 1), den) for _ in range(m)]
            x[int(rng.integers(0, m))] = _frac(-1, den)
        pts.append(tuple(c * scale for c in x))
    return pts


def cc_seq_step_verify(n: int, m: int, samples: int, seed=0) -> PeelingReport:
    """Compare membership in cc(M_{n-1}) with limit detection for cc(M_n)."""
    _check_args(n, m, samples)
    rep = PeelingReport(n, m, samples, seed, cone=True)
    for x in cc_sample_points(n, m, samples, seed):
        prev = in_ccMn(x, n - 1)
        cur = in_ccMn(x, n)
        lim = limit_of_ccMn(x, n)
        agree = prev.member == lim.detected and (not cur.member or lim.detected)
        if n == 2:
            agree = agree and prev.member == cc_M1_closed_form(x)
        if lim.detected and lim.max_coefficient > lim.coefficient_bound + 1e-6:
            agree = False
        rep.strict_points += int(prev.member and not cur.member)
        rec = {"x": [str(c) for c in x], "in_prev": prev.member, "in_cur": cur.member,
               "limit": lim.detected, "m_prime": lim.m_prime}
        rep.points.append(rec)
        if agree:
            rep.agreements += 1
        else:
            rep.discrepancies.append(rec)
    w = tuple(5 * c for c in cc_strictness_witness(n, m))
    rep.strictness_witness = w
    rep.strictness_verified = (in_ccMn(w, n - 1).member and not in_ccMn(w, n).member
                               and limit_of_ccMn(w, n).detected)
    return rep


@dataclass
class TerminalReport:
    m: int
    samples: int
    seed: object
    cone: bool
    agreements: int = 0
    discrepancies: list = field(default_factory=list)
    idempotent: bool = True

    @property
    def ok(self) -> bool:
        return not self.discrepancies and self.idempotent

    def to_json(self):
        return {"m": self.m, "samples": self.samples, "seed": self.seed, "cone": self.cone,
                "agreements": self.agreements, "discrepancies": self.discrepancies,
                "idempotent": self.idempotent, "ok": self.ok}


def _in_box(x, cone: bool) -> bool:
    if cone:
        return all(float(c) >= -FLOAT_TOL for c in x)
    return all(_in_unit(c) for c in x)


def terminal_check(m: int, samples: int, seed=0, cone: bool = False) -> TerminalReport:
    """n = 1: the sequential closure of M_1 (resp. cc(M_1)) is the unit box
    (resp. the nonnegative orthant).  Points pushed just outside must not be
    detected as limits, which is closedness checked on samples."""
    if m < 1 or samples < 1:
        raise ValueError("m >= 1 and a positive sample budget required")
    rep = TerminalReport(m, samples, seed, cone)
    pts = (cc_sample_points(1, m, samples, seed) if cone else sample_points(1, m, samples, seed))
    rng = np.random.default_rng(seed)
    for x in pts:
        if cone:
            lim = limit_of_ccMn(x, 1).detected
        else:
            lim = limit_of_Mn(x, 1).detected
        expect = _in_box(x, cone)
        rec = {"x": [str(c) for c in x], "limit": lim, "expected": expect}
        if lim == expect:
            rep.agreements += 1
        else:
            rep.discrepancies.append(rec)
        # a closed set contains its limits: points outside must be rejected
        y = list(x)
        y[int(rng.integers(0, m))] = Fraction(-1, 100)
        outside = limit_of_ccMn(y, 1).detected if cone else limit_of_Mn(y, 1).detected
        if outside:
            rep.idempotent = False
    return rep


def n1_examples() -> dict:
    """Closed-form checks: (0, 3) outside cc(M_1); positive points with
    zero first coordinate inside its closure."""
    return {"zero_head_excluded": not in_ccMn((0, 3), 1).member,
            "closure_contains": limit_of_ccMn((0, 3), 1).detected}
