"""Dense two-phase primal simplex used by the oracle LPs and the MILP relaxations.

Favors determinism and correctness over speed: dense numpy tableau, Dantzig
pricing that permanently switches to Bland's rule as soon as the objective
stalls (guaranteeing termination), and a final re-solve of the basis system
against the original matrix to shed accumulated pivot error.

Upper bounds are handled natively (no bound rows): a nonbasic variable at its
upper bound is mirrored, ``x = u - x'``, by negating its column, so the core
loop only ever sees nonbasic variables at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
_PHASE1_TOL = 1e-7
_STALL_LIMIT = 60


class LpError(ValueError):
    """Malformed linear program (dimension mismatch, non-finite data)."""


@dataclass
class LpProblem:
    """Minimization LP: ``min c @ x`` subject to rows ``a @ x (rel) rhs`` and bounds.

    ``rels`` entries are "<=", ">=" or "=".  Default variable bounds are
    ``[0, +inf)``; use ``-math.inf`` / ``math.inf`` for free ends.
    """

    c: Sequence[float]
    a: Sequence[Sequence[float]]
    rels: Sequence[str]
    b: Sequence[float]
    bounds: Optional[Sequence[tuple[float, float]]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        try:
            self.a = np.asarray(self.a, dtype=float).reshape(len(self.rels), self.c.size)
        except ValueError as exc:
            raise LpError(f"constraint matrix shape mismatch: {exc}") from exc
        self.b = np.asarray(self.b, dtype=float)
        if self.a.shape != (self.b.size, self.c.size):
            raise LpError("constraint matrix shape does not match rhs/objective")
        if self.bounds is None:
            self.bounds = [(0.0, math.inf)] * self.c.size
        self.bounds = [(float(lo), float(hi)) for lo, hi in self.bounds]
        if len(self.bounds) != self.c.size:
            raise LpError("bounds length does not match variable count")
        for lo, hi in self.bounds:
            if lo > hi:
                raise LpError(f"bound lower {lo} exceeds upper {hi}")
        for rel in self.rels:
            if rel not in ("<=", ">=", "="):
                raise LpError(f"unknown relation {rel!r}")
        if not (np.isfinite(self.c).all() and np.isfinite(self.a).all()
                and np.isfinite(self.b).all()):
            raise LpError("objective, matrix and rhs must be finite")


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: tuple[float, ...] = ()
    objective: float = math.nan


@dataclass
class _Standardized:
    """min c@s with A s = b, 0 <= s <= u, plus the mapping back to user variables."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    u: np.ndarray  # per-column upper bound (inf allowed)
    n_user: int
    # user var j -> ("fixed", value) | ("shift", col, lb) | ("mirror", col, ub)
    #             | ("split", col_pos, col_neg)
    recover: list = field(default_factory=list)
    # per row: (slack column, sign) or None for equality rows
    slack_of_row: list = field(default_factory=list)


def _standardize(p: LpProblem) -> _Standardized:
    n = p.c.size
    cols: list[np.ndarray] = []
    c_list: list[float] = []
    u_list: list[float] = []
    recover: list = []
    b = p.b.astype(float).copy()

    for j in range(n):
        lo, hi = p.bounds[j]
        col = p.a[:, j].copy()
        if lo == hi:
            recover.append(("fixed", lo))
            b -= col * lo
            continue
        if lo == -math.inf and hi == math.inf:
            k = len(cols)
            cols.append(col); c_list.append(float(p.c[j])); u_list.append(math.inf)
            cols.append(-col); c_list.append(float(-p.c[j])); u_list.append(math.inf)
            recover.append(("split", k, k + 1))
            continue
        if lo == -math.inf:
            k = len(cols)  # x = hi - s
            cols.append(-col); c_list.append(float(-p.c[j])); u_list.append(math.inf)
            b -= col * hi
            recover.append(("mirror", k, hi))
            continue
        k = len(cols)  # x = lo + s, s in [0, hi - lo]
        cols.append(col)
        c_list.append(float(p.c[j]))
        u_list.append(hi - lo)
        if lo != 0.0:
            b -= col * lo
        recover.append(("shift", k, lo))

    n_struct = len(cols)
    m = p.b.size
    slack_of_row: list = [None] * m
    slack_cols: list[np.ndarray] = []
    for r, rel in enumerate(p.rels):
        if rel == "=":
            continue
        col = np.zeros(m)
        col[r] = 1.0 if rel == "<=" else -1.0
        slack_of_row[r] = (n_struct + len(slack_cols), 1 if rel == "<=" else -1)
        slack_cols.append(col)

    body = np.column_stack(cols) if cols else np.zeros((m, 0))
    if slack_cols:
        body = np.hstack([body, np.column_stack(slack_cols)])
    c_full = np.array(c_list + [0.0] * len(slack_cols))
    u_full = np.array(u_list + [math.inf] * len(slack_cols))
    return _Standardized(a=body, b=b, c=c_full, u=u_full, n_user=n,
                         recover=recover, slack_of_row=slack_of_row)


class _Tableau:
    """Simplex tableau over ``0 <= s <= u`` with mirrored upper-bound handling."""

    def __init__(self, a: np.ndarray, b: np.ndarray, u: np.ndarray):
        self.m, self.n = a.shape
        a = a.copy()
        b = b.copy()
        self.negated = b < 0
        a[self.negated] *= -1.0
        b[self.negated] *= -1.0
        self.body = np.hstack([a, b.reshape(-1, 1)])
        self.basis: list[int] = [-1] * self.m
        self.u = u.copy()
        self.flipped = np.zeros(self.n, dtype=bool)

    def seed_and_augment(self, slack_of_row: list) -> list[int]:
        """Seed the basis from usable slacks, add artificials elsewhere."""
        pending = []
        for r in range(self.m):
            info = slack_of_row[r]
            effective = None
            if info is not None:
                col, sign = info
                if sign * (-1 if self.negated[r] else 1) == 1:
                    effective = col
            if effective is None:
                pending.append(r)
            else:
                self.basis[r] = effective
        out = []
        if pending:
            art = np.zeros((self.m, len(pending)))
            for k, r in enumerate(pending):
                art[r, k] = 1.0
            self.body = np.hstack([self.body[:, :-1], art, self.body[:, -1:]])
            for k, r in enumerate(pending):
                self.basis[r] = self.n + k
                out.append(self.n + k)
            self.n += len(pending)
            self.u = np.concatenate([self.u, np.full(len(pending), math.inf)])
            self.flipped = np.concatenate(
                [self.flipped, np.zeros(len(pending), dtype=bool)])
        return out

    def mirror_column(self, j: int, z: np.ndarray) -> None:
        """Re-parameterize variable j as u_j - x'; x' becomes nonbasic at zero."""
        uj = self.u[j]
        self.body[:, -1] -= uj * self.body[:, j]
        self.body[:, j] *= -1.0
        z[-1] -= z[j] * uj
        z[j] = -z[j]
        self.flipped[j] = ~self.flipped[j]

    def mirror_basic_row(self, r: int) -> None:
        """Re-parameterize the basic variable of row r around its upper bound."""
        j = self.basis[r]
        self.body[r, :] *= -1.0
        self.body[r, -1] += self.u[j]
        self.body[r, j] = 1.0
        self.flipped[j] = ~self.flipped[j]

    def pivot(self, row: int, col: int) -> None:
        body = self.body
        body[row] /= body[row, col]
        factors = body[:, col].copy()
        factors[row] = 0.0
        body -= np.outer(factors, body[row])
        body[:, col] = 0.0
        body[row, col] = 1.0
        self.basis[row] = col


def _run_simplex(tab: _Tableau, z: np.ndarray,
                 allowed: np.ndarray) -> tuple[str, np.ndarray]:
    """Minimize with reduced-cost row ``z`` (length n+1, last entry = -objective)."""
    stall = 0
    bland = False
    last_obj = z[-1]
    max_iter = 20000 + 300 * (tab.m + tab.n)
    basic_mask = np.zeros(tab.n, dtype=bool)
    for j in tab.basis:
        basic_mask[j] = True
    for _ in range(max_iter):
        rc = z[:-1]
        candidates = np.where((rc < -PIVOT_TOL) & allowed & ~basic_mask)[0]
        if candidates.size == 0:
            return OPTIMAL, z
        if bland:
            j = int(candidates[0])
        else:
            j = int(candidates[np.argmin(rc[candidates])])

        col = tab.body[:, j]
        rhs = tab.body[:, -1]
        best_t = tab.u[j]  # entering variable may stop at its own upper bound
        best_kind = "self"
        best_row = -1
        rows_dn = np.where(col > PIVOT_TOL)[0]
        if rows_dn.size:
            ratios = np.maximum(rhs[rows_dn] / col[rows_dn], 0.0)
            t = ratios.min()
            if t < best_t - 1e-12:
                tie = rows_dn[ratios <= t + 1e-12]
                best_t = t
                best_kind = "lower"
                best_row = int(min(tie, key=lambda idx: tab.basis[idx]))
        ub_basis = np.array([tab.u[tab.basis[r]] for r in range(tab.m)])
        rows_up = np.where((col < -PIVOT_TOL) & np.isfinite(ub_basis))[0]
        if rows_up.size:
            ratios = np.maximum((ub_basis[rows_up] - rhs[rows_up]) / (-col[rows_up]), 0.0)
            t = ratios.min()
            if t < best_t - 1e-12:
                tie = rows_up[ratios <= t + 1e-12]
                best_t = t
                best_kind = "upper"
                best_row = int(min(tie, key=lambda idx: tab.basis[idx]))

        if not math.isfinite(best_t):
            return UNBOUNDED, z

        if best_kind == "self":
            tab.mirror_column(j, z)
        else:
            if best_kind == "upper":
                tab.mirror_basic_row(best_row)
            left = tab.basis[best_row]
            tab.pivot(best_row, j)
            basic_mask[left] = False
            basic_mask[j] = True
            z = z - z[j] * tab.body[best_row]
            z[j] = 0.0

        if abs(z[-1] - last_obj) <= 1e-12:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        else:
            stall = 0
            last_obj = z[-1]
    raise LpError("simplex iteration limit exceeded")


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve a linear program; deterministic for identical input."""
    std = _standardize(problem)
    m = std.a.shape[0]
    if m == 0:
        return _bounds_only_solution(problem)

    tab = _Tableau(std.a, std.b, std.u)
    art = tab.seed_and_augment(std.slack_of_row)
    art_set = set(art)

    # phase 1: minimize the sum of artificials
    z = np.zeros(tab.n + 1)
    for j in art:
        z[j] = 1.0
    for r in range(tab.m):
        if tab.basis[r] in art_set:
            z -= tab.body[r]
    allowed = np.ones(tab.n, dtype=bool)
    status, z = _run_simplex(tab, z, allowed)
    if status != OPTIMAL or -z[-1] > _PHASE1_TOL:
        return LpSolution(INFEASIBLE)

    # drive leftover artificials out of the basis; drop redundant rows
    drop_rows = []
    for r in range(tab.m):
        if tab.basis[r] in art_set:
            row = tab.body[r, :-1]
            j = next((k for k in range(tab.n)
                      if k not in art_set and abs(row[k]) > PIVOT_TOL), None)
            if j is None:
                drop_rows.append(r)
            else:
                tab.pivot(r, j)
    if drop_rows:
        keep = [r for r in range(tab.m) if r not in set(drop_rows)]
        tab.body = tab.body[keep]
        tab.basis = [tab.basis[r] for r in keep]
        tab.m = len(keep)

    allowed = np.ones(tab.n, dtype=bool)
    for j in art:
        allowed[j] = False

    # phase 2: rebuild reduced costs in the current (possibly mirrored) frame
    n_std = std.c.size
    c_ext = np.concatenate([std.c, np.zeros(tab.n - n_std)])
    c_eff = np.where(tab.flipped, -c_ext, c_ext)
    z = np.concatenate([c_eff, [0.0]])
    fl = tab.flipped[:n_std]
    if fl.any():
        z[-1] = -float(np.dot(c_ext[:n_std][fl], tab.u[:n_std][fl]))
    for r in range(tab.m):
        j = tab.basis[r]
        if z[j] != 0.0:
            z = z - z[j] * tab.body[r]
            z[j] = 0.0
    status, z = _run_simplex(tab, z, allowed)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED)

    s = _extract(tab, std)
    x = _recover_user(std, s)
    objective = float(np.dot(problem.c, x))
    return LpSolution(OPTIMAL, tuple(float(v) for v in x), objective)


def _extract(tab: _Tableau, std: _Standardized) -> np.ndarray:
    """Basic solution in the original frame, re-solved for accuracy."""
    n_std = std.c.size
    raw = np.zeros(n_std)
    basic = [(r, j) for r, j in enumerate(tab.basis) if j < n_std]
    basic_set = {j for _, j in basic}

    # nonbasic values in the original frame: u_j when mirrored, else 0
    s = np.zeros(n_std)
    for j in range(n_std):
        if j not in basic_set and tab.flipped[j]:
            s[j] = std.u[j]

    refined = False
    cols = [j for _, j in basic]
    if cols and len(cols) == std.a.shape[0]:
        bmat = std.a[:, cols]
        rhs = std.b - std.a @ s
        try:
            vals = np.linalg.solve(bmat, rhs)
            for (r, j), v in zip(basic, vals):
                s[j] += v
            refined = True
        except np.linalg.LinAlgError:
            refined = False
    if not refined:
        for r, j in basic:
            val = tab.body[r, -1]
            if tab.flipped[j]:
                val = tab.u[j] - val
            s[j] += val
    s[(s < 0) & (s > -1e-7)] = 0.0
    return s


def _recover_user(std: _Standardized, s: np.ndarray) -> np.ndarray:
    x = np.zeros(std.n_user)
    for j, rule in enumerate(std.recover):
        kind = rule[0]
        if kind == "fixed":
            x[j] = rule[1]
        elif kind == "shift":
            x[j] = rule[2] + s[rule[1]]
        elif kind == "mirror":
            x[j] = rule[2] - s[rule[1]]
        else:  # split
            x[j] = s[rule[1]] - s[rule[2]]
    return x


def _bounds_only_solution(problem: LpProblem) -> LpSolution:
    x = np.zeros(problem.c.size)
    for j in range(problem.c.size):
        lo, hi = problem.bounds[j]
        cj = problem.c[j]
        if cj > 0:
            if lo == -math.inf:
                return LpSolution(UNBOUNDED)
            x[j] = lo
        elif cj < 0:
            if hi == math.inf:
                return LpSolution(UNBOUNDED)
            x[j] = hi
        else:
            x[j] = min(max(0.0, lo), hi) if lo != -math.inf else min(0.0, hi)
    return LpSolution(OPTIMAL, tuple(float(v) for v in x), float(np.dot(problem.c, x)))
