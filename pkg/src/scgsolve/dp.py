"""Dynamic program over player configurations for optimal Nash outcomes.

The recursion scans resources left to right.  A table entry is keyed by the
prefix length, the per-class player budgets still to place, and two per-class
indices into a ladder of cost values: ``M_t`` caps every cost experienced by
class ``t`` inside the prefix, ``V_t`` floors every cost class ``t`` would pay
by deviating onto a prefix resource.  An entry holds the minimum criterion
value over prefix assignments that respect those bounds and are internally
stable (no player wants to move to another prefix resource); interactions
between the current resource and the rest of the prefix travel through the
bounds, so stability never has to be re-checked globally.

For the bound passed down at each resource the extremal admissible choice is
optimal (entries are monotone: lowering ``M`` or raising ``V`` only shrinks
the feasible set), so the transition enumerates only the per-class player
splits.  The overall optimum is the weakest-bound entry at full prefix length,
which ranges exactly over the Nash outcomes of the class game.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .game import (
    GENERAL_SCG,
    TCLASS_SSCG,
    Configurations,
    Game,
    LeaderStrategy,
    Profile,
    validate,
)
from .equilibrium import is_nash, leader_cost
from .timing import Deadline

INFEASIBLE = None  # table value for "no feasible prefix assignment"


@dataclass(frozen=True)
class OptimalityCriterion:
    """What the dynamic program minimizes; per-resource additive contribution.

    ``sum_of_player_costs`` accumulates ``b * c_i(b)``.  ``resource_cost``
    accumulates ``row[b+1]`` on each target resource (the committed leader's
    cost when ``b`` followers share her resource) and 0 elsewhere.
    """

    kind: str
    target_rows: Mapping[int, tuple[Fraction, ...]]

    @staticmethod
    def sum_of_player_costs() -> "OptimalityCriterion":
        return OptimalityCriterion("sum_of_player_costs", {})

    @staticmethod
    def resource_cost(target_rows: Mapping[int, Sequence[Fraction]]) -> "OptimalityCriterion":
        rows = {int(i): tuple(row) for i, row in target_rows.items()}
        return OptimalityCriterion("resource_cost", rows)


class NeDynamicProgram:
    """Optimal-NE solver for one set of class-game cost rows.

    ``cost_rows[i][x-1]`` is the cost of resource ``i`` at congestion ``x``;
    rows must cover one congestion step past the heaviest possible load, so
    deviation lookups ``c(b+1)`` stay in range.
    """

    def __init__(self, cost_rows: Sequence[Sequence[Fraction]],
                 classes: Sequence[tuple[int, Sequence[int]]],
                 criterion: OptimalityCriterion,
                 deadline: Optional[Deadline] = None):
        self.rows = [tuple(row) for row in cost_rows]
        self.classes = [(int(n), tuple(res)) for n, res in classes]
        self.criterion = criterion
        self.deadline = deadline
        self.r = len(self.rows)
        self.T = len(self.classes)

        values = {Fraction(0)}
        for row in self.rows:
            values.update(row)
        self.ladder: list[Fraction] = sorted(values)
        self.inf_index = len(self.ladder)  # sentinel: "no cap"
        self._index_of = {v: k for k, v in enumerate(self.ladder)}

        # class ids that may place players on each resource
        self._classes_on = [
            tuple(t for t, (_, res) in enumerate(self.classes) if i in res)
            for i in range(self.r)
        ]
        max_load = [sum(self.classes[t][0] for t in self._classes_on[i])
                    for i in range(self.r)]
        for i in range(self.r):
            if max_load[i] > 0 and len(self.rows[i]) < max_load[i] + 1:
                raise ValueError(
                    f"resource {i}: cost row covers {len(self.rows[i])} "
                    f"congestion levels, needs {max_load[i] + 1}"
                )
        self._memo: dict = {}

    # -- ladder helpers ----------------------------------------------------

    def _value_at(self, resource: int, congestion: int) -> Fraction:
        if congestion == 0:
            return Fraction(0)
        return self.rows[resource][congestion - 1]

    def _contribution(self, resource: int, b: int) -> Fraction:
        crit = self.criterion
        if crit.kind == "sum_of_player_costs":
            return b * self._value_at(resource, b) if b else Fraction(0)
        row = crit.target_rows.get(resource)
        if row is None:
            return Fraction(0)
        return row[b]  # row[b] == cost at congestion b+1

    def table_size(self) -> int:
        return len(self._memo)

    # -- recursion ----------------------------------------------------------

    def entry(self, i: int, budgets: tuple[int, ...], caps: tuple[int, ...],
              floors: tuple[int, ...]):
        """Table lookup for prefix length ``i``; computes on demand."""
        key = (i, budgets, caps, floors)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[0]
        if i == 0:
            value = Fraction(0) if not any(budgets) else INFEASIBLE
            self._memo[key] = (value, None, None)
            return value
        if self.deadline is not None:
            self.deadline.check()

        res = i - 1
        eligible = self._classes_on[res]
        best = INFEASIBLE
        best_move = None
        best_child = None
        for placed in _splits(budgets, eligible):
            b = sum(placed)
            here = self._value_at(res, b)
            dev = self._value_at(res, b + 1)
            feasible = True
            child_caps = list(caps)
            child_floors = list(floors)
            for t in eligible:
                # deviating onto this resource must respect the requested floor
                if floors[t] > 0 and dev < self.ladder[floors[t]]:
                    feasible = False
                    break
                dev_idx = self._floor_index(dev)
                if dev_idx < child_caps[t]:
                    child_caps[t] = dev_idx
                if placed[t] > 0:
                    # players here must respect the requested cost cap
                    if caps[t] != self.inf_index and here > self.ladder[caps[t]]:
                        feasible = False
                        break
                    here_idx = self._index_of[here]
                    if here_idx > child_floors[t]:
                        child_floors[t] = here_idx
            if not feasible:
                continue
            child_budgets = tuple(B - p for B, p in zip(budgets, placed))
            child = (i - 1, child_budgets, tuple(child_caps), tuple(child_floors))
            sub = self.entry(child[0], child[1], child[2], child[3])
            if sub is INFEASIBLE:
                continue
            cand = sub + self._contribution(res, b)
            if best is INFEASIBLE or cand < best:
                best = cand
                best_move = placed
                best_child = child
        self._memo[key] = (best, best_move, best_child)
        return best

    def _floor_index(self, value: Fraction) -> int:
        """Largest ladder index whose value is <= ``value``."""
        idx = self._index_of.get(value)
        if idx is not None:
            return idx
        lo, hi = 0, len(self.ladder)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.ladder[mid] <= value:
                lo = mid + 1
            else:
                hi = mid
        return lo - 1

    def solve_optimal(self) -> tuple[Fraction, Configurations]:
        """Minimum criterion over all Nash outcomes, with a witness configuration."""
        budgets = tuple(n for n, _ in self.classes)
        top = (self.r, budgets, (self.inf_index,) * self.T, (0,) * self.T)
        value = self.entry(top[0], top[1], top[2], top[3])
        if value is INFEASIBLE:
            raise ValueError("no stable configuration exists; malformed class game")
        nu = [[0] * self.r for _ in range(self.T)]
        key = top
        while key[0] > 0:
            _, move, child = self._memo[key]
            res = key[0] - 1
            for t, count in enumerate(move):
                nu[t][res] = count
            key = child
        return value, Configurations(tuple(tuple(row) for row in nu))


def _splits(budgets: tuple[int, ...], eligible: tuple[int, ...]):
    """All per-class placement vectors on one resource (0 for other classes)."""
    out = [0] * len(budgets)
    if not eligible:
        yield tuple(out)
        return

    def rec(k: int):
        if k == len(eligible):
            yield tuple(out)
            return
        t = eligible[k]
        for count in range(budgets[t] + 1):
            out[t] = count
            yield from rec(k + 1)
        out[t] = 0

    yield from rec(0)


def optimal_ne_dp(game: Game, criterion: OptimalityCriterion,
                  deadline: Optional[Deadline] = None) -> tuple[Fraction, Configurations]:
    """Optimal Nash outcome of a class singleton game with no leader mass."""
    _require_tclass(game)
    dp = NeDynamicProgram(
        game.follower_costs.rows,
        [(c.n, c.resources) for c in game.classes],
        criterion,
        deadline=deadline,
    )
    return dp.solve_optimal()


@dataclass(frozen=True)
class PureLeaderResult:
    leader_action: int
    outcome: object  # Configurations or Profile, matching the game kind
    leader_cost: Fraction


def ose_pure_leader_tclass(game: Game,
                           deadline: Optional[Deadline] = None) -> PureLeaderResult:
    """Best pure leader commitment for a class singleton game.

    For each leader resource the followers see that resource's costs bumped by
    one congestion step; the dynamic program then minimizes the leader's own
    cost on it over the Nash outcomes of the bumped game.
    """
    _require_tclass(game)
    if not game.leader_actions:
        raise ValueError("leader has no actions")
    classes = [(c.n, c.resources) for c in game.classes]
    best: Optional[PureLeaderResult] = None
    for k, action in enumerate(game.leader_actions):
        (i,) = action
        shifted = game.follower_costs.shifted([i])
        criterion = OptimalityCriterion.resource_cost({i: game.leader_costs.rows[i]})
        dp = NeDynamicProgram(shifted.rows, classes, criterion, deadline=deadline)
        value, outcome = dp.solve_optimal()
        if best is None or value < best.leader_cost:
            best = PureLeaderResult(k, outcome, value)
    ok, witness = is_nash(game, LeaderStrategy.pure(best.leader_action), best.outcome)
    if not ok:
        raise AssertionError(f"dp produced a non-equilibrium outcome: {witness}")
    return best


def ose_pure_leader_symmetric_scg(game: Game,
                                  deadline: Optional[Deadline] = None) -> PureLeaderResult:
    """Best pure leader commitment when followers are symmetric with singleton actions.

    Leader actions may span several resources: the follower costs are bumped
    on all of them and the criterion sums the leader's per-resource costs.
    """
    if game.kind != GENERAL_SCG:
        raise ValueError("expected a general game; use ose_pure_leader_tclass for class games")
    if not game.followers:
        raise ValueError("game has no followers")
    if not game.is_symmetric_singleton_followers():
        raise ValueError("followers must share one set of singleton actions")
    if not game.leader_actions:
        raise ValueError("leader has no actions")

    shared = game.followers[0].actions
    resources = tuple(sorted(a[0] for a in shared))
    action_of_resource = {a[0]: idx for idx, a in enumerate(shared)}
    classes = [(len(game.followers), resources)]

    best: Optional[tuple[int, Configurations, Fraction]] = None
    for k, action in enumerate(game.leader_actions):
        shifted = game.follower_costs.shifted(action)
        criterion = OptimalityCriterion.resource_cost(
            {i: game.leader_costs.rows[i] for i in action}
        )
        dp = NeDynamicProgram(shifted.rows, classes, criterion, deadline=deadline)
        value, outcome = dp.solve_optimal()
        if best is None or value < best[2]:
            best = (k, outcome, value)

    k, config, value = best
    counts = config.nu[0]
    labeled: list[int] = []
    for i in resources:
        labeled.extend([action_of_resource[i]] * counts[i])
    profile = Profile(tuple(labeled))
    ok, witness = is_nash(game, LeaderStrategy.pure(k), profile)
    if not ok:
        raise AssertionError(f"dp produced a non-equilibrium outcome: {witness}")
    return PureLeaderResult(k, profile, value)


def _require_tclass(game: Game) -> None:
    if game.kind != TCLASS_SSCG:
        raise ValueError("expected a class singleton game")
    report = validate(game)
    if not report.ok:
        raise ValueError("malformed game: " + "; ".join(report.violations))
