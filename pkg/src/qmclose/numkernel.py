"""Dense SDP and LP feasibility with checkable certificates.

The interior-point work is delegated to Clarabel (SDP) and HiGHS through
``scipy.optimize.linprog`` (LP).  Everything returned from here is re-checked
with plain numpy after the solver finishes: a ``feasible`` answer carries
matrices whose constraint residual and smallest eigenvalue are recomputed,
an ``infeasible`` answer carries a Farkas ray whose aggregated constraint is
recomputed.  Anything that fails those checks is reported as
``inconclusive``; solver stalls are never turned into claims.
"""
from __future__ import annotations

import os
from fractions import Fraction
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Optional, Sequence

import clarabel
import numpy as np
from scipy import sparse
from scipy.optimize import linprog

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
INCONCLUSIVE = "inconclusive"

MAX_BLOCK = 300
MAX_LP_VARS = 10_000
TRACE_PENALTY = 1e-7

_SQRT2 = np.sqrt(2.0)


class DimensionOverflow(ValueError):
    """Problem exceeds the configured desk-scale limits."""


def _env_tol(default: float) -> float:
    raw = os.environ.get("QMCLOSE_TOL")
    return float(raw) if raw else default


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-8
    psd: float = 1e-8

    @classmethod
    def default(cls) -> "Tolerances":
        t = _env_tol(1e-8)
        return cls(feas=t, psd=t)

    def to_json(self):
        return {"tol_feas": self.feas, "tol_psd": self.psd}


def min_eigenvalue(S) -> float:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    if S.size == 0:
        return float("inf")
    scale = max(1.0, float(np.max(np.abs(S))))
    if np.max(np.abs(S - S.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return float(np.linalg.eigvalsh((S + S.T) / 2)[0])


# ---------------------------------------------------------------------------
# SDP

def entry_list(n: int) -> list:
    """Distinct entries (i, j), i <= j, of an n x n symmetric block."""
    return [(i, j) for i in range(n) for j in range(i, n)]


@dataclass
class SdpProblem:
    """Find PSD blocks X_k with  sum_e rows[r, e] * X[e] = rhs[r].

    Column ``e`` of ``rows`` indexes the distinct symmetric entries of all
    blocks stacked in order, each block enumerated by :func:`entry_list`.
    An optional ``objective`` over the same entries is minimized.
    """
    block_sizes: list
    rows: np.ndarray
    rhs: np.ndarray
    objective: Optional[np.ndarray] = None

    def __post_init__(self):
        self.block_sizes = [int(b) for b in self.block_sizes]
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        if self.rows.shape[0] == 0:
            self.rows = self.rows.reshape(0, self.n_entries)
        if self.rows.shape[1] != self.n_entries:
            raise ValueError(
                f"constraint width {self.rows.shape[1]} != {self.n_entries} entries")
        if self.rows.shape[0] != self.rhs.size:
            raise ValueError("rows and rhs disagree in length")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("rhs must be finite")
        if any(b > MAX_BLOCK for b in self.block_sizes):
            raise DimensionOverflow(f"block side above {MAX_BLOCK}")

    @property
    def n_entries(self) -> int:
        return sum(b * (b + 1) // 2 for b in self.block_sizes)

    def offsets(self) -> list:
        out, k = [], 0
        for b in self.block_sizes:
            out.append(k)
            k += b * (b + 1) // 2
        return out

    def unpack(self, u) -> list:
        mats = []
        for b, off in zip(self.block_sizes, self.offsets()):
            X = np.zeros((b, b))
            for e, (i, j) in enumerate(entry_list(b)):
                X[i, j] = X[j, i] = u[off + e]
            mats.append(X)
        return mats

    def pack(self, mats) -> np.ndarray:
        u = np.zeros(self.n_entries)
        for X, b, off in zip(mats, self.block_sizes, self.offsets()):
            for e, (i, j) in enumerate(entry_list(b)):
                u[off + e] = X[i][j]
        return u

    def aggregate(self, y) -> list:
        """Blocks of sum_r y_r A_r, A_r the symmetric matrix of row r."""
        w = self.rows.T @ np.asarray(y, dtype=float)
        mats = []
        for b, off in zip(self.block_sizes, self.offsets()):
            Z = np.zeros((b, b))
            for e, (i, j) in enumerate(entry_list(b)):
                if i == j:
                    Z[i, i] = w[off + e]
                else:
                    Z[i, j] = Z[j, i] = w[off + e] / 2
            mats.append(Z)
        return mats

    def permuted(self, perm, scales=None) -> "SdpProblem":
        scales = np.ones(len(perm)) if scales is None else np.asarray(scales)
        return SdpProblem(self.block_sizes, self.rows[perm] * scales[:, None],
                          self.rhs[perm] * scales, self.objective)


@dataclass
class SdpSolution:
    status: str
    blocks: list = field(default_factory=list)
    residual: float = float("nan")
    mineig: float = float("nan")
    ray: Optional[np.ndarray] = None
    ray_margin: float = float("nan")
    ray_mineig: float = float("nan")
    objective: Optional[float] = None
    tol: Tolerances = field(default_factory=Tolerances)
    solver_status: str = ""

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "blocks": [np.asarray(B).tolist() for B in self.blocks],
            "residual": self.residual,
            "mineig": self.mineig,
            "ray": None if self.ray is None else np.asarray(self.ray).tolist(),
            "ray_margin": self.ray_margin,
            "ray_mineig": self.ray_mineig,
            "objective": self.objective,
            "solver_status": self.solver_status,
            **self.tol.to_json(),
        }


def _psd_rows(n: int, col_of_entry, ncols: int, t_col: Optional[int]):
    """Clarabel rows for  svec(X - t I) in the PSD triangle cone.

    Clarabel wants ``s = b - A x``; with b = 0 this is  A x = -svec(...).
    ``col_of_entry(i, j)`` returns the variable column feeding entry (i, j)
    as a list of (column, coefficient) pairs.
    """
    data, ri, ci = [], [], []
    r = 0
    for j in range(n):
        for i in range(j + 1):
            scale = 1.0 if i == j else _SQRT2
            for col, coef in col_of_entry(i, j):
                data.append(-scale * coef)
                ri.append(r)
                ci.append(col)
            if i == j and t_col is not None:
                data.append(1.0)
                ri.append(r)
                ci.append(t_col)
            r += 1
    return sparse.csc_matrix((data, (ri, ci)), shape=(r, ncols))


def _clarabel(P, q, A, b, cones):
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = 200
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    settings.tol_feas = 1e-10
    solver = clarabel.DefaultSolver(P, q, A, b, cones, settings)
    try:
        return solver.solve()
    except BaseException as exc:  # pyo3 panics derive from BaseException
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        # an all-NaN point fails every acceptance check downstream
        return SimpleNamespace(x=[float("nan")] * A.shape[1], status="SolverPanic")


def _solve_primal(prob: SdpProblem, penalty: float = TRACE_PENALTY,
                  t_floor: Optional[float] = None):
    """Maximize the eigenvalue slack t <= 1, less ``penalty`` times the trace.

    With ``t_floor`` the slack is instead constrained to t >= t_floor and
    only the trace is minimized."""
    n_e = prob.n_entries
    with_obj = prob.objective is not None
    ncols = n_e + (0 if with_obj else 1)
    t_col = None if with_obj else n_e
    blocks_A, blocks_b, cones = [], [], []
    m = prob.rows.shape[0]
    if m:
        blocks_A.append(sparse.hstack(
            [sparse.csc_matrix(prob.rows),
             sparse.csc_matrix((m, ncols - n_e))]).tocsc())
        blocks_b.append(prob.rhs)
        cones.append(clarabel.ZeroConeT(m))
    if t_col is not None:
        row = sparse.csc_matrix(([1.0], ([0], [t_col])), shape=(1, ncols))
        blocks_A.append(row)
        blocks_b.append(np.array([1.0]))
        cones.append(clarabel.NonnegativeConeT(1))
        if t_floor is not None:
            blocks_A.append(-row)
            blocks_b.append(np.array([-t_floor]))
            cones.append(clarabel.NonnegativeConeT(1))
    for b, off in zip(prob.block_sizes, prob.offsets()):
        if b == 0:
            continue
        index = {ij: off + e for e, ij in enumerate(entry_list(b))}
        A = _psd_rows(b, lambda i, j: [(index[(i, j)], 1.0)], ncols, t_col)
        blocks_A.append(A)
        blocks_b.append(np.zeros(A.shape[0]))
        cones.append(clarabel.PSDTriangleConeT(b))
    q = np.zeros(ncols)
    if with_obj:
        q[:n_e] = prob.objective
    else:
        q[t_col] = -1.0 if t_floor is None else 0.0
        # a small trace penalty keeps iterates finite on unbounded optimal faces
        for b, off in zip(prob.block_sizes, prob.offsets()):
            for e, (i, j) in enumerate(entry_list(b)):
                if i == j:
                    q[off + e] = penalty
    A = sparse.vstack(blocks_A).tocsc()
    bvec = np.concatenate(blocks_b)
    P = sparse.csc_matrix((ncols, ncols))
    sol = _clarabel(P, q, A, bvec, cones)
    x = np.asarray(sol.x)
    t = float(x[t_col]) if t_col is not None and x.size else float("nan")
    return x[:n_e], str(sol.status), t


def _solve_farkas(prob: SdpProblem):
    """Maximize s subject to  rhs . y = -1,  s <= 1,  sum_r y_r A_r - s I >= 0."""
    m = prob.rows.shape[0]
    ncols = m + 1
    s_col = m
    blocks_A = [sparse.csc_matrix(np.concatenate([prob.rhs, [0.0]])[None, :]),
                sparse.csc_matrix(([1.0], ([0], [s_col])), shape=(1, ncols))]
    blocks_b = [np.array([-1.0]), np.array([1.0])]
    cones = [clarabel.ZeroConeT(1), clarabel.NonnegativeConeT(1)]
    rows = prob.rows
    for b, off in zip(prob.block_sizes, prob.offsets()):
        if b == 0:
            continue
        index = {ij: off + e for e, ij in enumerate(entry_list(b))}

        def feeders(i, j, index=index):
            col = rows[:, index[(i, j)]]
            half = 1.0 if i == j else 0.5
            nz = np.nonzero(col)[0]
            return [(int(r), half * col[r]) for r in nz]

        A = _psd_rows(b, feeders, ncols, s_col)
        blocks_A.append(A)
        blocks_b.append(np.zeros(A.shape[0]))
        cones.append(clarabel.PSDTriangleConeT(b))
    q = np.zeros(ncols)
    q[s_col] = -1.0
    A = sparse.vstack(blocks_A).tocsc()
    bvec = np.concatenate(blocks_b)
    sol = _clarabel(sparse.csc_matrix((ncols, ncols)), q, A, bvec, cones)
    return np.asarray(sol.x)[:m], str(sol.status)


def verify_primal(prob: SdpProblem, mats) -> tuple:
    u = prob.pack(mats)
    res = float(np.max(np.abs(prob.rows @ u - prob.rhs))) if prob.rhs.size else 0.0
    eig = min((min_eigenvalue(X) for X in mats if len(X)), default=float("inf"))
    return res, eig


def verify_ray(prob: SdpProblem, y) -> tuple:
    """(margin, mineig) for a Farkas ray normalized to unit max-norm."""
    y = np.asarray(y, dtype=float)
    norm = float(np.max(np.abs(y))) if y.size else 0.0
    if norm == 0.0:
        return 0.0, float("-inf")
    y = y / norm
    margin = float(-prob.rhs @ y)
    eig = min((min_eigenvalue(Z) for Z in prob.aggregate(y) if len(Z)),
              default=float("inf"))
    return margin, eig


def _primal_candidates(prob: SdpProblem):
    """Primal points to verify, cheapest first.

    The trace penalty can trade feasibility for a smaller trace when every
    feasible point is large; the fallback first finds the best slack t* and
    then minimizes the trace subject to t >= t*/2."""
    if prob.objective is not None:
        u, status, _ = _solve_primal(prob, 0.0)
        yield u, status
        return
    u, status, _ = _solve_primal(prob)
    yield u, status
    _, _, t_star = _solve_primal(prob, 0.0)
    if not np.isfinite(t_star):
        return
    floor = t_star / 2 if t_star > 0 else t_star - 1e-9
    u, status, _ = _solve_primal(prob, 1.0, t_floor=floor)
    yield u, status + "; slack-floored"


def is_psd_exact(H) -> bool:
    """Exact PSD test of a rational symmetric matrix by pivoted LDL^T."""
    A = [[Fraction(x) for x in row] for row in H]
    n = len(A)
    active = list(range(n))
    while active:
        k = max(active, key=lambda i: A[i][i])
        p = A[k][k]
        if p < 0:
            return False
        if p == 0:
            return all(A[i][j] == 0 for i in active for j in active)
        active.remove(k)
        for i in active:
            if A[i][k] == 0:
                continue
            f = A[i][k] / p
            for j in active:
                A[i][j] -= f * A[k][j]
    return True


def _exact_ray(prob: SdpProblem, y) -> Optional[np.ndarray]:
    """Rationalize a boundary Farkas ray and accept it only if the
    aggregated blocks are exactly PSD and the margin is exactly positive
    (against the float data read as exact binary fractions)."""
    yr = [Fraction(float(v)).limit_denominator(10 ** 6) for v in y]
    if -sum(Fraction(float(b)) * v for b, v in zip(prob.rhs, yr)) <= 0:
        return None
    cols = prob.rows.shape[1]
    w = [Fraction(0)] * cols
    for r, v in enumerate(yr):
        if v == 0:
            continue
        row = prob.rows[r]
        for e in np.nonzero(row)[0]:
            w[e] += v * Fraction(float(row[e]))
    for b, off in zip(prob.block_sizes, prob.offsets()):
        Z = [[Fraction(0)] * b for _ in range(b)]
        for e, (i, j) in enumerate(entry_list(b)):
            if i == j:
                Z[i][i] = w[off + e]
            else:
                Z[i][j] = Z[j][i] = w[off + e] / 2
        if b and not is_psd_exact(Z):
            return None
    return np.array([float(v) for v in yr])


def forced_zero_rows(prob: SdpProblem, rounds: int = 6, threshold: float = 1e-7) -> set:
    """Gram rows that vanish on every feasible point, found by an LP.

    A multiplier y with  rhs . y = 0  whose aggregated matrix Z(y) is
    diagonal and nonnegative gives  <Z, X> = 0  for every feasible X, so
    X_ii = 0 wherever Z_ii > 0.  Removing those rows can expose more, hence
    the rounds.  The float LP is only a hint: callers must not derive
    infeasibility from the reduced problem.
    """
    removed: set = set()
    m = prob.rows.shape[0]
    if m == 0:
        return removed
    for _ in range(rounds):
        off_rows, diag_rows, diag_keys = [], [], []
        for b, (size, off) in enumerate(zip(prob.block_sizes, prob.offsets())):
            for e, (i, j) in enumerate(entry_list(size)):
                if (b, i) in removed or (b, j) in removed:
                    continue
                col = prob.rows[:, off + e]
                if i == j:
                    diag_rows.append(col)
                    diag_keys.append((b, i))
                elif np.any(col):
                    off_rows.append(col)
        k = len(diag_keys)
        if k == 0:
            break
        n = m + k
        eq = [np.concatenate([prob.rhs, np.zeros(k)])]
        eq += [np.concatenate([c, np.zeros(k)]) for c in off_rows]
        for t, c in enumerate(diag_rows):
            unit = np.zeros(k)
            unit[t] = -1.0
            eq.append(np.concatenate([c, unit]))
        c_obj = np.concatenate([np.zeros(m), -np.ones(k)])
        res = linprog(c_obj, A_eq=np.array(eq), b_eq=np.zeros(len(eq)),
                      bounds=[(None, None)] * m + [(0, 1)] * k, method="highs")
        if res.status != 0:
            break
        new = {key for key, z in zip(diag_keys, res.x[m:]) if z > threshold}
        if not new:
            break
        removed |= new
    return removed


def sdp_feasible(prob: SdpProblem, tol: Tolerances | None = None) -> SdpSolution:
    tol = tol or Tolerances.default()
    for u, status in _primal_candidates(prob):
        mats = prob.unpack(u) if np.all(np.isfinite(u)) else []
        if mats:
            res, eig = verify_primal(prob, mats)
            # relative screen; certificates are re-verified exactly downstream
            scale = max(1.0, float(np.max(np.abs(u)))) if u.size else 1.0
            if res <= tol.feas * scale and eig >= -tol.psd:
                obj = None if prob.objective is None else float(prob.objective @ u)
                return SdpSolution(FEASIBLE, mats, res, eig, objective=obj, tol=tol,
                                   solver_status=status)
        else:
            res = eig = float("nan")
    if prob.rows.shape[0] == 0:
        return SdpSolution(INCONCLUSIVE, mats, res, eig, tol=tol, solver_status=status)
    y, fstatus = _solve_farkas(prob)
    if np.all(np.isfinite(y)):
        margin, zeig = verify_ray(prob, y)
        # a ray that is PSD only up to tolerance rules out bounded-trace
        # solutions, not all of them: boundary rays must pass exactly
        accepted = margin > tol.feas and zeig > 0
        if margin > tol.feas and -tol.psd <= zeig <= 0:
            exact = _exact_ray(prob, y / np.max(np.abs(y)))
            if exact is not None:
                y = exact
                margin, zeig = verify_ray(prob, y)
                zeig = max(zeig, 0.0)
                accepted = margin > tol.feas
        if accepted:
            y = y / np.max(np.abs(y))
            return SdpSolution(INFEASIBLE, [], res, eig, ray=y, ray_margin=margin,
                               ray_mineig=zeig, tol=tol,
                               solver_status=f"{status}; farkas {fstatus}")
    return SdpSolution(INCONCLUSIVE, mats, res, eig, tol=tol,
                       solver_status=f"{status}; farkas {fstatus}")


# ---------------------------------------------------------------------------
# LP

@dataclass
class LpProblem:
    """Standard form  A x = b  with  x_j >= 0  unless ``free[j]``."""
    A: np.ndarray
    b: np.ndarray
    c: Optional[np.ndarray] = None
    free: Optional[np.ndarray] = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        n = self.A.shape[1]
        if n > MAX_LP_VARS:
            raise DimensionOverflow(f"more than {MAX_LP_VARS} LP variables")
        if self.A.shape[0] != self.b.size:
            raise ValueError("A and b disagree in length")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("LP data must be finite")
        self.free = (np.zeros(n, bool) if self.free is None
                     else np.asarray(self.free, bool))


@dataclass
class LpSolution:
    status: str  # feasible | infeasible | unbounded | inconclusive
    x: Optional[np.ndarray] = None
    witness: Optional[np.ndarray] = None
    margin: float = float("nan")
    objective: Optional[float] = None

    def to_json(self):
        return {"status": self.status,
                "x": None if self.x is None else self.x.tolist(),
                "witness": None if self.witness is None else self.witness.tolist(),
                "margin": self.margin, "objective": self.objective}


def lp_feasible(prob: LpProblem, tol: Tolerances | None = None) -> LpSolution:
    tol = tol or Tolerances.default()
    A, b = prob.A, prob.b
    n = A.shape[1]
    bounds = [(None, None) if f else (0, None) for f in prob.free]
    c = np.zeros(n) if prob.c is None else np.asarray(prob.c, float)
    res = linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
    if res.status == 0:
        x = res.x
        viol = max(float(np.max(np.abs(A @ x - b), initial=0.0)),
                   float(-np.min(np.where(prob.free, 0.0, x), initial=0.0)))
        if viol <= tol.feas * max(1.0, float(np.max(np.abs(b), initial=0.0))):
            return LpSolution("feasible", x=x,
                              objective=None if prob.c is None else float(res.fun))
    if res.status == 3:
        return LpSolution("unbounded")
    # Farkas: A^T y >= 0 on sign-constrained columns, = 0 on free ones, b.y = -1
    m = A.shape[0]
    nonneg = ~prob.free
    A_ub = -A[:, nonneg].T if nonneg.any() else None
    b_ub = np.zeros(int(nonneg.sum())) if nonneg.any() else None
    eq_rows = [b[None, :]]
    eq_rhs = [np.array([-1.0])]
    if prob.free.any():
        eq_rows.append(A[:, prob.free].T)
        eq_rhs.append(np.zeros(int(prob.free.sum())))
    fr = linprog(np.zeros(m), A_ub=A_ub, b_ub=b_ub, A_eq=np.vstack(eq_rows),
                 b_eq=np.concatenate(eq_rhs), bounds=[(None, None)] * m,
                 method="highs")
    if fr.status == 0:
        y = fr.x / max(1.0, float(np.max(np.abs(fr.x))))
        aty = A.T @ y
        ok = (np.all(aty[nonneg] >= -tol.feas)
              and np.all(np.abs(aty[prob.free]) <= tol.feas))
        margin = float(-b @ y)
        if ok and margin > tol.feas:
            return LpSolution("infeasible", witness=y, margin=margin)
    return LpSolution("inconclusive")


def lp_optimize(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    """Thin HiGHS call returning (status, x, value); status in
    {optimal, infeasible, unbounded, inconclusive}."""
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds if bounds is not None else (None, None),
                  method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status,
                                                                 "inconclusive")
    x = res.x if res.status == 0 else None
    val = float(res.fun) if res.status == 0 else None
    return status, x, val
