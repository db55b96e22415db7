"""Mixed-integer formulations of optimal commitment and a branch-and-bound solver.

Both formulations one-hot encode congestion levels (``y_iv`` = exactly ``v``
followers on resource ``i``) and linearize the bilinear product of a level
indicator with the leader's marginal via McCormick rows.  The zero-congestion
level has no indicator: its contribution to the objective and to deviation
costs is folded in through the complements ``1 - sum_v y_iv`` and
``sigma(i) - sum_v z_iv``, which the one-hot structure makes exact.

All model data is exact (Fractions); the solver works in floats on top of
:mod:`scgsolve.simplex` relaxations.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .game import (
    GENERAL_SCG,
    TCLASS_SSCG,
    Configurations,
    FollowersOutcome,
    Game,
    LeaderStrategy,
    Profile,
    validate,
)
from .equilibrium import is_nash, leader_cost
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, solve_lp
from .timing import Deadline

BINARY = "binary"
CONTINUOUS = "continuous"

INTEGRALITY_TOL = 1e-6
CONSTRAINT_TOL = 1e-6
DEFAULT_GAP_TOL = 1e-9


class MilpBuildError(ValueError):
    """The game cannot be compiled into a model."""


class MilpDecodeError(RuntimeError):
    """A solution violates the decode postconditions."""


@dataclass(frozen=True)
class MilpVariable:
    name: str
    kind: str
    lb: Fraction = Fraction(0)
    ub: Optional[Fraction] = None  # None = unbounded above


@dataclass(frozen=True)
class MilpConstraint:
    name: str
    coeffs: dict  # variable index -> Fraction
    rel: str      # "<=", ">=", "="
    rhs: Fraction


@dataclass
class MilpModel:
    variables: list[MilpVariable]
    constraints: list[MilpConstraint]
    objective: dict  # variable index -> Fraction
    decode: dict     # variable name -> entity tuple
    big_m: Fraction
    _index: dict = field(default_factory=dict, repr=False)

    def index_of(self, name: str) -> int:
        if not self._index:
            self._index = {v.name: k for k, v in enumerate(self.variables)}
        return self._index[name]

    def binary_indices(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.kind == BINARY]


@dataclass(frozen=True)
class MilpParams:
    time_limit: Optional[float] = None
    gap_tol: float = DEFAULT_GAP_TOL


@dataclass(frozen=True)
class MilpSolution:
    status: str  # Optimal | Infeasible | Unbounded | Timeout
    values: Optional[dict] = None     # variable name -> float
    objective: Optional[float] = None
    lower_bound: Optional[float] = None
    gap: Optional[float] = None       # (UB - LB) / UB
    nodes: int = 0


class _ModelBuilder:
    def __init__(self):
        self.variables: list[MilpVariable] = []
        self.constraints: list[MilpConstraint] = []
        self.objective: dict = {}
        self.decode: dict = {}

    def var(self, name: str, kind: str, entity: tuple,
            lb: Fraction = Fraction(0), ub: Optional[Fraction] = Fraction(1)) -> int:
        idx = len(self.variables)
        self.variables.append(MilpVariable(name, kind, lb, ub))
        self.decode[name] = entity
        return idx

    def row(self, name: str, coeffs: dict, rel: str, rhs: Fraction) -> None:
        self.constraints.append(MilpConstraint(name, dict(coeffs), rel, rhs))


def _mc_envelope(b: _ModelBuilder, z_vars: Sequence[int], y_vars: Sequence[int],
                 sigma_terms: dict, tag: str) -> None:
    """Envelope rows making every ``z_v`` equal ``y_v * sigma`` at binary points.

    Per level, ``z_v <= y_v``; on the aggregate, ``sum_v z_v`` is pinned inside
    the envelope of the product ``sigma * sum_v y_v``.  Together with ``z >= 0``
    these imply the per-level product envelopes (``z_v <= sigma`` follows from
    the aggregate cap, ``z_v >= sigma + y_v - 1`` from the aggregate floor and
    the other levels' ``z <= y``), while the aggregate rows additionally keep
    the empty-congestion complements ``sigma - sum_v z_v`` exact.
    """
    if not z_vars:
        return
    for v, (zv, yv) in enumerate(zip(z_vars, y_vars), start=1):
        b.row(f"mc_sel_{tag}_v{v}", {zv: Fraction(1), yv: Fraction(-1)},
              "<=", Fraction(0))
    cap = {z: Fraction(1) for z in z_vars}
    for k, c in sigma_terms.items():
        cap[k] = cap.get(k, Fraction(0)) - c
    b.row(f"mc_cap_{tag}", cap, "<=", Fraction(0))
    low = {z: Fraction(1) for z in z_vars}
    for y in y_vars:
        low[y] = low.get(y, Fraction(0)) - 1
    for k, c in sigma_terms.items():
        low[k] = low.get(k, Fraction(0)) - c
    b.row(f"mc_low_{tag}", low, ">=", Fraction(-1))


def _deviation_form(cf_row: Sequence[Fraction], y_vars: Sequence[int],
                    z_vars: Sequence[int], sigma_terms: dict) -> tuple[dict, Fraction]:
    """Linear form of the post-deviation expected cost of one resource.

    With the one-hot levels, evaluates to ``c(v+1) + sigma*(c(v+2)-c(v+1))``
    at occupied level ``v`` and to ``c(1) + sigma*(c(2)-c(1))`` when empty.
    """
    def c(x: int) -> Fraction:
        return cf_row[x - 1] if x >= 1 else Fraction(0)

    form: dict = {}
    const = c(1)
    for k, coef in sigma_terms.items():
        form[k] = form.get(k, Fraction(0)) + coef * (c(2) - c(1))
    for v, (yv, zv) in enumerate(zip(y_vars, z_vars), start=1):
        form[yv] = form.get(yv, Fraction(0)) + (c(v + 1) - c(1))
        form[zv] = form.get(zv, Fraction(0)) + (c(v + 2) - c(v + 1) - c(2) + c(1))
    return form, const


def _current_form(cf_row: Sequence[Fraction], y_vars: Sequence[int],
                  z_vars: Sequence[int]) -> dict:
    """Linear form of the current expected cost of an occupied resource."""
    form: dict = {}
    for v, (yv, zv) in enumerate(zip(y_vars, z_vars), start=1):
        form[yv] = form.get(yv, Fraction(0)) + cf_row[v - 1]
        form[zv] = form.get(zv, Fraction(0)) + (cf_row[v] - cf_row[v - 1])
    return form


def _combine(*parts) -> dict:
    out: dict = {}
    for form, sign in parts:
        for k, c in form.items():
            out[k] = out.get(k, Fraction(0)) + sign * c
    return {k: c for k, c in out.items() if c != 0}


def _require(game: Game, kind: str) -> None:
    if game.kind != kind:
        raise MilpBuildError(f"expected a {kind} game, got {game.kind}")
    report = validate(game)
    if not report.ok:
        raise MilpBuildError("malformed game: " + "; ".join(report.violations))


def _range_bounds(cf, v_max) -> tuple[list[Fraction], list[Fraction]]:
    """Per resource: (largest possible current cost, smallest possible deviation cost).

    Valid against the LP relaxation as well: the level brackets are convex
    combinations of adjacent table entries with weights summing to at most
    one, and the group envelope pins the empty-level complement.
    """
    cur_max: list[Fraction] = []
    dev_min: list[Fraction] = []
    for i, vm in enumerate(v_max):
        top = Fraction(0)
        for v in range(1, vm + 1):
            top = max(top, cf.cost(i, v), cf.cost(i, v + 1))
        cur_max.append(top)
        low = min(cf.cost(i, 1), cf.cost(i, 2))
        for v in range(1, vm + 1):
            low = min(low, cf.cost(i, v + 1), cf.cost(i, v + 2))
        dev_min.append(low)
    return cur_max, dev_min


def build_milp_tclass(game: Game) -> MilpModel:
    """Exact commitment model for class singleton games."""
    _require(game, TCLASS_SSCG)
    r = game.resource_count
    cf = game.follower_costs
    cl = game.leader_costs
    v_max = [game.max_follower_congestion(i) for i in range(r)]
    leader_resources = {a[0] for a in game.leader_actions}

    b = _ModelBuilder()
    alpha = [
        b.var(f"a{i}", CONTINUOUS, ("alpha_resource", i),
              ub=Fraction(1) if i in leader_resources else Fraction(0))
        for i in range(r)
    ]
    y_of = [[b.var(f"y_i{i}_v{v}", BINARY, ("y", i, v)) for v in range(1, v_max[i] + 1)]
            for i in range(r)]
    z_of = [[b.var(f"z_i{i}_v{v}", CONTINUOUS, ("z", i, v)) for v in range(1, v_max[i] + 1)]
            for i in range(r)]
    q_of = {}
    for t, cls in enumerate(game.classes):
        for i in cls.resources:
            q_of[t, i] = [b.var(f"q_t{t}_i{i}_v{v}", BINARY, ("q", t, i, v))
                          for v in range(1, cls.n + 1)]

    big_m = _big_m_single(cf, v_max)

    for (t, i), qs in q_of.items():
        b.row(f"choice_t{t}_i{i}", {q: Fraction(1) for q in qs}, "<=", Fraction(1))
    for i in range(r):
        if y_of[i]:
            b.row(f"level_i{i}", {yv: Fraction(1) for yv in y_of[i]}, "<=", Fraction(1))
    for t, cls in enumerate(game.classes):
        row = {}
        for i in cls.resources:
            for v, q in enumerate(q_of[t, i], start=1):
                row[q] = Fraction(v)
        b.row(f"count_t{t}", row, "=", Fraction(cls.n))
    for i in range(r):
        row = {}
        for t, cls in enumerate(game.classes):
            if i in cls.resources:
                for v, q in enumerate(q_of[t, i], start=1):
                    row[q] = Fraction(v)
        if not row:
            continue
        for v, yv in enumerate(y_of[i], start=1):
            row[yv] = Fraction(-v)
        b.row(f"link_i{i}", row, "=", Fraction(0))

    cur_max, dev_min = _range_bounds(cf, v_max)
    for t, cls in enumerate(game.classes):
        for i in cls.resources:
            cur = _current_form(cf.rows[i], y_of[i], z_of[i])
            for j in cls.resources:
                if j == i:
                    continue
                # deactivation only has to absorb this pair's worst gap
                m_row = min(big_m, max(Fraction(0), cur_max[i] - dev_min[j]) + 1)
                activation = {q: -m_row for q in q_of[t, i]}
                dev, dev_const = _deviation_form(
                    cf.rows[j], y_of[j], z_of[j], {alpha[j]: Fraction(1)})
                row = _combine((dev, 1), (cur, -1), (activation, 1))
                b.row(f"ne_t{t}_i{i}_j{j}", row, ">=", -m_row - dev_const)

    for i in range(r):
        _mc_envelope(b, z_of[i], y_of[i], {alpha[i]: Fraction(1)}, f"i{i}")

    b.row("commit", {a: Fraction(1) for a in alpha}, "=", Fraction(1))

    for i in range(r):
        if cl.cost(i, 1) != 0:
            b.objective[alpha[i]] = b.objective.get(alpha[i], Fraction(0)) + cl.cost(i, 1)
        for v, zv in enumerate(z_of[i], start=1):
            coef = cl.cost(i, v + 1) - cl.cost(i, 1)
            if coef != 0:
                b.objective[zv] = coef

    return MilpModel(b.variables, b.constraints, b.objective, b.decode, big_m)


def build_milp_general(game: Game) -> MilpModel:
    """Exact commitment model for general games with explicit follower actions."""
    _require(game, GENERAL_SCG)
    r = game.resource_count
    cf = game.follower_costs
    cl = game.leader_costs
    v_max = [game.max_follower_congestion(i) for i in range(r)]

    b = _ModelBuilder()
    alpha = [b.var(f"a{k}", CONTINUOUS, ("alpha_action", k))
             for k in range(len(game.leader_actions))]
    sigma_terms_of = [
        {alpha[k]: Fraction(1) for k, action in enumerate(game.leader_actions) if i in action}
        for i in range(r)
    ]
    y_of = [[b.var(f"y_i{i}_v{v}", BINARY, ("y", i, v)) for v in range(1, v_max[i] + 1)]
            for i in range(r)]
    z_of = [[b.var(f"z_i{i}_v{v}", CONTINUOUS, ("z", i, v)) for v in range(1, v_max[i] + 1)]
            for i in range(r)]
    x_of = [[b.var(f"x_p{p}_a{k}", BINARY, ("x", p, k))
             for k in range(len(f.actions))] for p, f in enumerate(game.followers)]

    big_m = _big_m_sum(cf, v_max)

    for p, xs in enumerate(x_of):
        b.row(f"pick_p{p}", {x: Fraction(1) for x in xs}, "=", Fraction(1))
    for i in range(r):
        if y_of[i]:
            b.row(f"level_i{i}", {yv: Fraction(1) for yv in y_of[i]}, "<=", Fraction(1))
    for i in range(r):
        row = {}
        for v, yv in enumerate(y_of[i], start=1):
            row[yv] = Fraction(v)
        for p, f in enumerate(game.followers):
            for k, action in enumerate(f.actions):
                if i in action:
                    row[x_of[p][k]] = row.get(x_of[p][k], Fraction(0)) - 1
        if row:
            b.row(f"link_i{i}", row, "=", Fraction(0))

    cur_max, dev_min = _range_bounds(cf, v_max)
    for p, f in enumerate(game.followers):
        for k, action in enumerate(f.actions):
            cur_set = set(action)
            for k2, alt in enumerate(f.actions):
                if k2 == k:
                    continue
                alt_set = set(alt)
                gap = sum((cur_max[i] for i in action if i not in alt_set), Fraction(0)) \
                    - sum((dev_min[i] for i in alt if i not in cur_set), Fraction(0))
                m_row = min(big_m, max(Fraction(0), gap) + 1)
                row: dict = {x_of[p][k]: -m_row}
                const = Fraction(0)
                for i in alt:
                    if i in cur_set:
                        continue
                    dev, dev_const = _deviation_form(
                        cf.rows[i], y_of[i], z_of[i], sigma_terms_of[i])
                    row = _combine((row, 1), (dev, 1))
                    const += dev_const
                cur: dict = {}
                for i in action:
                    if i in alt_set:
                        continue
                    cur = _combine((cur, 1), (_current_form(cf.rows[i], y_of[i], z_of[i]), 1))
                row = _combine((row, 1), (cur, -1))
                b.row(f"ne_p{p}_a{k}_alt{k2}", row, ">=", -m_row - const)

    for i in range(r):
        _mc_envelope(b, z_of[i], y_of[i], sigma_terms_of[i], f"i{i}")

    b.row("commit", {a: Fraction(1) for a in alpha}, "=", Fraction(1))

    for i in range(r):
        c1 = cl.cost(i, 1)
        if c1 != 0:
            for k, coef in sigma_terms_of[i].items():
                b.objective[k] = b.objective.get(k, Fraction(0)) + coef * c1
        for v, zv in enumerate(z_of[i], start=1):
            coef = cl.cost(i, v + 1) - c1
            if coef != 0:
                b.objective[zv] = b.objective.get(zv, Fraction(0)) + coef

    return MilpModel(b.variables, b.constraints, b.objective, b.decode, big_m)


def _big_m_single(cf, v_max) -> Fraction:
    top = Fraction(0)
    bottom = Fraction(0)
    for i, vm in enumerate(v_max):
        for v in range(1, vm + 3):
            c = cf.cost(i, v)
            top = max(top, c)
            bottom = min(bottom, c)
    return 1 + top - bottom


def _big_m_sum(cf, v_max) -> Fraction:
    total = Fraction(1)
    for i, vm in enumerate(v_max):
        top = Fraction(0)
        bottom = Fraction(0)
        for v in range(1, vm + 3):
            c = cf.cost(i, v)
            top = max(top, c)
            bottom = min(bottom, c)
        total += top - bottom
    return total


# -- LP file output ----------------------------------------------------------

_NAME_OK = re.compile(r"[^A-Za-z0-9_.]")


def _sanitize_names(model: MilpModel) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for v in model.variables:
        name = _NAME_OK.sub("_", v.name)[:248] or "v"
        if name[0].isdigit() or name[0] in ".eE":
            name = "v_" + name
        if name in seen:
            seen[name] += 1
            name = f"{name}_{seen[name]}"
        seen.setdefault(name, 0)
        out.append(name)
    return out


def _num(value: Fraction) -> str:
    f = float(value)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _terms(coeffs: dict, names: list[str]) -> str:
    parts = []
    for idx in sorted(coeffs):
        c = coeffs[idx]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = _num(abs(c))
        parts.append(f"{sign} {mag} {names[idx]}")
    if not parts:
        return "0"
    first = parts[0]
    first = first[2:] if first.startswith("+ ") else "- " + first[2:]
    return " ".join([first] + parts[1:])


def emit_lp_format(model: MilpModel) -> str:
    """Serialize the model as standard LP-file text (CPLEX dialect)."""
    names = _sanitize_names(model)
    lines = ["\\ generated by scgsolve", "Minimize", f" obj: {_terms(model.objective, names)}"]
    lines.append("Subject To")
    for con in model.constraints:
        rel = {"<=": "<=", ">=": ">=", "=": "="}[con.rel]
        lines.append(f" {_NAME_OK.sub('_', con.name)[:248]}: "
                     f"{_terms(con.coeffs, names)} {rel} {_num(con.rhs)}")
    lines.append("Bounds")
    for idx, v in enumerate(model.variables):
        if v.kind == BINARY:
            if v.lb == v.ub:
                lines.append(f" {names[idx]} = {_num(v.lb)}")
            continue
        lo = _num(v.lb)
        if v.ub is None:
            if v.lb != 0:
                lines.append(f" {names[idx]} >= {lo}")
        elif v.lb == v.ub:
            lines.append(f" {names[idx]} = {lo}")
        else:
            lines.append(f" {lo} <= {names[idx]} <= {_num(v.ub)}")
    binaries = [names[k] for k in model.binary_indices()]
    if binaries:
        lines.append("Binary")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


# -- branch and bound --------------------------------------------------------

def solve_milp(model: MilpModel, params: MilpParams = MilpParams()) -> MilpSolution:
    """Branch and bound over simplex relaxations.

    Branches on the most fractional binary; nodes are explored best bound
    first (ties newest first) so the proven bound climbs steadily, while
    incumbents come from relaxations that happen to be integral and from
    periodic rounding dives.
    """
    n = len(model.variables)
    c = np.zeros(n)
    for k, v in model.objective.items():
        c[k] = float(v)
    a = np.zeros((len(model.constraints), n))
    rels = []
    rhs = np.zeros(len(model.constraints))
    for r_idx, con in enumerate(model.constraints):
        for k, v in con.coeffs.items():
            a[r_idx, k] = float(v)
        rels.append(con.rel)
        rhs[r_idx] = float(con.rhs)
    base_bounds = [
        (float(v.lb), math.inf if v.ub is None else float(v.ub))
        for v in model.variables
    ]
    binaries = model.binary_indices()
    deadline = Deadline.after(params.time_limit)

    def relax(fixed: dict) -> object:
        bounds = list(base_bounds)
        for k, val in fixed.items():
            bounds[k] = (val, val)
        return solve_lp(LpProblem(c=c, a=a, rels=rels, b=rhs, bounds=bounds))

    nodes = 0
    root = relax({})
    nodes += 1
    if root.status == INFEASIBLE:
        return MilpSolution(status="Infeasible", nodes=nodes)
    if root.status == UNBOUNDED:
        return MilpSolution(status="Unbounded", nodes=nodes)

    incumbent: Optional[np.ndarray] = None
    incumbent_obj = math.inf
    root_fractional = sum(
        1 for k in binaries if min(root.x[k], 1.0 - root.x[k]) > INTEGRALITY_TOL)
    if root_fractional > 10:
        dived = _rounding_dive(relax, root.x, binaries, deadline, fixed={})
        if dived is not None:
            incumbent_obj, incumbent_x, dive_nodes = dived
            incumbent = np.asarray(incumbent_x)
            nodes += dive_nodes

    counter = 0
    heap: list[tuple[float, int, dict, tuple]] = [(root.objective, 0, {}, root.x)]
    timed_out = False
    since_dive = 0

    while heap:
        if deadline is not None and deadline.expired():
            timed_out = True
            break
        bound, _, fixed, x = heapq.heappop(heap)
        if bound >= incumbent_obj - _prune_slack(incumbent_obj, params.gap_tol):
            continue
        frac_idx, frac_dist = None, -1.0
        for k in binaries:
            dist = min(x[k], 1.0 - x[k])
            if dist > INTEGRALITY_TOL and dist > frac_dist + 1e-15:
                frac_idx, frac_dist = k, dist
        if frac_idx is None:
            if bound < incumbent_obj - 1e-12:
                incumbent_obj = bound
                incumbent = np.asarray(x)
            continue
        since_dive += 1
        if since_dive >= 300:
            since_dive = 0
            dived = _rounding_dive(relax, x, binaries, deadline, fixed=dict(fixed))
            if dived is not None:
                nodes += dived[2]
                if dived[0] < incumbent_obj - 1e-12:
                    incumbent_obj = dived[0]
                    incumbent = np.asarray(dived[1])
        for val in (0.0, 1.0):
            child_fixed = dict(fixed)
            child_fixed[frac_idx] = val
            sol = relax(child_fixed)
            nodes += 1
            if sol.status == INFEASIBLE:
                continue
            if sol.objective < bound - 1e-5 * max(1.0, abs(bound)):
                raise AssertionError("child relaxation beat its parent bound")
            counter -= 1  # newest-first among equal bounds
            heapq.heappush(heap, (sol.objective, counter, child_fixed, sol.x))

    open_bounds = [b for b, _, _, _ in heap]
    if incumbent is None:
        if timed_out:
            lb = min(open_bounds) if open_bounds else None
            return MilpSolution(status="Timeout", lower_bound=lb, nodes=nodes)
        return MilpSolution(status="Infeasible", nodes=nodes)

    lb = min(open_bounds) if open_bounds else incumbent_obj
    lb = min(lb, incumbent_obj)
    values = {v.name: float(incumbent[k]) for k, v in enumerate(model.variables)}
    gap = _gap(incumbent_obj, lb)
    status = "Timeout" if timed_out else "Optimal"
    return MilpSolution(status=status, values=values, objective=incumbent_obj,
                        lower_bound=lb, gap=gap, nodes=nodes)


def _rounding_dive(relax, x0, binaries, deadline, fixed: dict,
                   max_rounds: int = 80) -> Optional[tuple[float, tuple, int]]:
    """Round-and-repair dive for an early incumbent.

    Repeatedly pins near-integral binaries at their current values and rounds
    the most decided fractional one, re-solving after each round; flips a pin
    once on infeasibility and gives up otherwise.  Returns (objective, point,
    LP count) or None.
    """
    x = x0
    lps = 0
    for _ in range(max_rounds):
        if deadline is not None and deadline.expired():
            return None
        fractional = [k for k in binaries
                      if k not in fixed and min(x[k], 1.0 - x[k]) > INTEGRALITY_TOL]
        for k in binaries:
            if k not in fixed and min(x[k], 1.0 - x[k]) <= INTEGRALITY_TOL:
                fixed[k] = round(x[k])
        if not fractional:
            sol = relax(fixed)
            lps += 1
            if sol.status == OPTIMAL:
                return sol.objective, sol.x, lps
            return None
        pick = min(fractional, key=lambda k: (min(x[k], 1.0 - x[k]), k))
        fixed[pick] = round(x[pick])
        sol = relax(fixed)
        lps += 1
        if sol.status != OPTIMAL:
            fixed[pick] = 1.0 - fixed[pick]
            sol = relax(fixed)
            lps += 1
            if sol.status != OPTIMAL:
                return None
        x = sol.x
    return None


def _prune_slack(ub: float, gap_tol: float) -> float:
    if not math.isfinite(ub):
        return 0.0
    return max(gap_tol * abs(ub), 1e-12)


def _gap(ub: float, lb: float) -> float:
    if ub == 0:
        return 0.0 if abs(ub - lb) <= 1e-12 else math.inf
    return (ub - lb) / ub


# -- decoding ----------------------------------------------------------------

def extract_ose(model: MilpModel, solution: MilpSolution,
                game: Game) -> tuple[LeaderStrategy, FollowersOutcome, Fraction]:
    """Decode a solution into (strategy, outcome, exact leader cost).

    Raises :class:`MilpDecodeError` when the solution violates the decode
    postconditions (bilinear residual, equilibrium, or objective agreement).
    """
    if solution.values is None:
        raise MilpDecodeError("no incumbent to decode")
    vals = solution.values

    sigma = [0.0] * game.resource_count
    probs: dict[int, Fraction] = {}
    if game.kind == TCLASS_SSCG:
        action_of_resource = {}
        for k, action in enumerate(game.leader_actions):
            action_of_resource.setdefault(action[0], k)
        for name, entity in model.decode.items():
            if entity[0] == "alpha_resource":
                val = vals[name]
                sigma[entity[1]] = val
                if val > 1e-9:
                    k = action_of_resource.get(entity[1])
                    if k is None:
                        raise MilpDecodeError(
                            f"mass {val} on resource {entity[1]} outside the leader's actions")
                    probs[k] = probs.get(k, Fraction(0)) + Fraction(val)
    else:
        for name, entity in model.decode.items():
            if entity[0] == "alpha_action":
                val = vals[name]
                if val > 1e-9:
                    probs[entity[1]] = Fraction(val)
        for k, p in probs.items():
            for i in game.leader_actions[k]:
                sigma[i] += float(p)
    strategy = LeaderStrategy(probs)

    outcome: FollowersOutcome
    if game.kind == TCLASS_SSCG:
        nu = [[0] * game.resource_count for _ in game.classes]
        for name, entity in model.decode.items():
            if entity[0] == "q" and vals[name] > 0.5:
                _, t, i, v = entity
                nu[t][i] += v
        outcome = Configurations(tuple(tuple(row) for row in nu))
    else:
        chosen = [-1] * len(game.followers)
        for name, entity in model.decode.items():
            if entity[0] == "x" and vals[name] > 0.5:
                _, p, k = entity
                chosen[p] = k
        if any(k < 0 for k in chosen):
            raise MilpDecodeError("a follower has no selected action")
        outcome = Profile(tuple(chosen))

    # bilinear residual: z must equal y * sigma at the decoded point
    y_val: dict[tuple[int, int], float] = {}
    for name, entity in model.decode.items():
        if entity[0] == "y":
            y_val[entity[1], entity[2]] = vals[name]
    for name, entity in model.decode.items():
        if entity[0] == "z":
            i, v = entity[1], entity[2]
            residual = abs(vals[name] - y_val[i, v] * sigma[i])
            if residual > CONSTRAINT_TOL:
                raise MilpDecodeError(
                    f"bilinear residual {residual:.2e} on z_i{i}_v{v}")

    ok, witness = is_nash(game, strategy, outcome, tol=CONSTRAINT_TOL)
    if not ok:
        raise MilpDecodeError(f"decoded outcome is not an equilibrium: {witness}")
    cost = leader_cost(game, strategy, outcome)
    if solution.objective is not None and abs(float(cost) - solution.objective) > CONSTRAINT_TOL:
        raise MilpDecodeError(
            f"re-evaluated cost {float(cost)} != objective {solution.objective}")
    return strategy, outcome, cost
