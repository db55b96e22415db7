"""Expected costs under leader commitment, equilibrium checks and dynamics.

All computations here are exact (Fractions).  Operations are pure; a shared
immutable :class:`~scgsolve.game.Game` may be evaluated concurrently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .game import (
    TCLASS_SSCG,
    Configurations,
    CostTable,
    FollowersOutcome,
    Game,
    LeaderStrategy,
    Profile,
    congestion,
    outcome_violations,
)

DEFAULT_ENUMERATION_CAP = 10**7


class EnumerationCapError(RuntimeError):
    """Raised before enumerating an outcome space larger than the cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"outcome space has {size} elements, cap is {cap}")
        self.size = size
        self.cap = cap


class StepBudgetExhausted(RuntimeError):
    """Best-response dynamics ran out of steps (signals a bug or bad input)."""


@dataclass(frozen=True)
class ExpectedCostView:
    """Follower cost table combined with per-resource leader marginals."""

    costs: CostTable
    marginals: tuple[Fraction, ...]

    @staticmethod
    def for_strategy(game: Game, strategy: LeaderStrategy) -> "ExpectedCostView":
        return ExpectedCostView(game.follower_costs, strategy.resource_marginals(game))

    def cost(self, resource: int, congestion_: int) -> Fraction:
        return expected_follower_cost(self, resource, congestion_)


def expected_follower_cost(view: ExpectedCostView, resource: int, x: int) -> Fraction:
    """Cost of a follower on ``resource`` at congestion ``x`` under commitment.

    The leader's presence bumps the congestion by one with probability equal
    to her marginal on the resource: ``p*c(x+1) + (1-p)*c(x)``.
    """
    p = view.marginals[resource]
    if p == 0:
        return view.costs.cost(resource, x)
    if p == 1:
        return view.costs.cost(resource, x + 1)
    return p * view.costs.cost(resource, x + 1) + (1 - p) * view.costs.cost(resource, x)


def leader_cost(game: Game, strategy: LeaderStrategy,
                outcome: FollowersOutcome) -> Fraction:
    """Leader's exact expected cost for the committed strategy and outcome."""
    nu = congestion(game, outcome)
    total = Fraction(0)
    for action, p in strategy.probs.items():
        if p == 0:
            continue
        total += p * sum(
            (game.leader_costs.cost(i, nu[i] + 1) for i in game.leader_actions[action]),
            Fraction(0),
        )
    return total


def follower_cost(game: Game, strategy: LeaderStrategy, outcome: FollowersOutcome,
                  action_resources: Sequence[int]) -> Fraction:
    """Cost of an action evaluated at the outcome's current congestions."""
    view = ExpectedCostView.for_strategy(game, strategy)
    nu = congestion(game, outcome)
    return sum((expected_follower_cost(view, i, nu[i]) for i in action_resources),
               Fraction(0))


@dataclass(frozen=True)
class DeviationWitness:
    """A strictly improving unilateral deviation (refutes the NE property)."""

    player: int                      # follower index, or class index
    current_action: tuple[int, ...]
    improving_action: tuple[int, ...]
    current_cost: Fraction
    deviated_cost: Fraction


def _tclass_deviations(game: Game, view: ExpectedCostView,
                       outcome: Configurations) -> Iterator[tuple[int, int, int, Fraction, Fraction]]:
    """Yield (class, from_resource, to_resource, current, deviated) for all moves."""
    nu = congestion(game, outcome)
    for t, cls in enumerate(game.classes):
        for i in cls.resources:
            if outcome.nu[t][i] == 0:
                continue
            cur = expected_follower_cost(view, i, nu[i])
            for j in cls.resources:
                if j == i:
                    continue
                dev = expected_follower_cost(view, j, nu[j] + 1)
                yield t, i, j, cur, dev


def _profile_deviations(game: Game, view: ExpectedCostView,
                        outcome: Profile) -> Iterator[tuple[int, int, int, Fraction, Fraction]]:
    """Yield (follower, action, alt_action, current, deviated) over all moves.

    Costs compare only the symmetric difference of the two actions: shared
    resources keep their congestion and cancel.
    """
    nu = congestion(game, outcome)
    for p, a in enumerate(outcome.actions):
        cur_res = game.followers[p].actions[a]
        cur_set = set(cur_res)
        for alt in range(len(game.followers[p].actions)):
            if alt == a:
                continue
            alt_res = game.followers[p].actions[alt]
            alt_set = set(alt_res)
            cur = sum((expected_follower_cost(view, i, nu[i])
                       for i in cur_res if i not in alt_set), Fraction(0))
            dev = sum((expected_follower_cost(view, i, nu[i] + 1)
                       for i in alt_res if i not in cur_set), Fraction(0))
            yield p, a, alt, cur, dev


def is_nash(game: Game, strategy: LeaderStrategy, outcome: FollowersOutcome,
            tol: float = 0.0) -> tuple[bool, Optional[DeviationWitness]]:
    """Check the weak Nash condition; on failure return a witness deviation.

    ``tol`` relaxes the comparison (a deviation must improve by more than
    ``tol`` to count), which accommodates float-decoded strategies.
    """
    view = ExpectedCostView.for_strategy(game, strategy)
    slack = Fraction(tol) if tol else Fraction(0)
    if game.kind == TCLASS_SSCG:
        assert isinstance(outcome, Configurations)
        for t, i, j, cur, dev in _tclass_deviations(game, view, outcome):
            if cur - dev > slack:
                return False, DeviationWitness(t, (i,), (j,), cur, dev)
        return True, None
    assert isinstance(outcome, Profile)
    nu = congestion(game, outcome)
    for p, a, alt, cur, dev in _profile_deviations(game, view, outcome):
        if cur - dev > slack:
            full_cur = sum((expected_follower_cost(view, i, nu[i])
                            for i in game.followers[p].actions[a]), Fraction(0))
            full_dev = full_cur - cur + dev
            return False, DeviationWitness(
                p,
                game.followers[p].actions[a],
                game.followers[p].actions[alt],
                full_cur,
                full_dev,
            )
    return True, None


def rosenthal_potential(game: Game, strategy: LeaderStrategy,
                        outcome: FollowersOutcome) -> Fraction:
    """Exact potential of the followers' game under the fixed commitment."""
    view = ExpectedCostView.for_strategy(game, strategy)
    nu = congestion(game, outcome)
    total = Fraction(0)
    for i, load in enumerate(nu):
        for x in range(1, load + 1):
            total += expected_follower_cost(view, i, x)
    return total


def default_step_budget(game: Game) -> int:
    nr = game.n_players * game.resource_count
    return nr * (nr + 1)


def brd_trajectory(game: Game, strategy: LeaderStrategy, start: FollowersOutcome,
                   max_steps: Optional[int] = None) -> Iterator[FollowersOutcome]:
    """Yield ``start`` and every subsequent best-response improvement step.

    Scan order is round-robin (follower 0..n-1, or class-then-resource for
    class games); the moving player switches to her best response, ties broken
    by the lowest action index.  Terminates at a Nash outcome because each
    step strictly decreases the Rosenthal potential.
    """
    bad = outcome_violations(game, start)
    if bad:
        raise ValueError("invalid start outcome: " + "; ".join(bad))
    budget = default_step_budget(game) if max_steps is None else max_steps
    view = ExpectedCostView.for_strategy(game, strategy)
    current = start
    yield current
    steps = 0
    while True:
        move = _find_improvement(game, view, current)
        if move is None:
            return
        steps += 1
        if steps > budget:
            raise StepBudgetExhausted(
                f"no equilibrium after {budget} improvement steps"
            )
        current = move
        yield current


def _find_improvement(game: Game, view: ExpectedCostView,
                      outcome: FollowersOutcome) -> Optional[FollowersOutcome]:
    nu = congestion(game, outcome)
    if game.kind == TCLASS_SSCG:
        assert isinstance(outcome, Configurations)
        for t, cls in enumerate(game.classes):
            for i in cls.resources:
                if outcome.nu[t][i] == 0:
                    continue
                cur = expected_follower_cost(view, i, nu[i])
                best_j, best_cost = None, cur
                for j in cls.resources:
                    if j == i:
                        continue
                    dev = expected_follower_cost(view, j, nu[j] + 1)
                    if dev < best_cost:
                        best_j, best_cost = j, dev
                if best_j is not None:
                    rows = [list(row) for row in outcome.nu]
                    rows[t][i] -= 1
                    rows[t][best_j] += 1
                    return Configurations(tuple(tuple(row) for row in rows))
        return None
    assert isinstance(outcome, Profile)
    for p, a in enumerate(outcome.actions):
        cur_res = game.followers[p].actions[a]
        cur_set = set(cur_res)
        best_alt, best_gain = None, Fraction(0)
        for alt in range(len(game.followers[p].actions)):
            if alt == a:
                continue
            alt_res = game.followers[p].actions[alt]
            alt_set = set(alt_res)
            cur = sum((expected_follower_cost(view, i, nu[i])
                       for i in cur_res if i not in alt_set), Fraction(0))
            dev = sum((expected_follower_cost(view, i, nu[i] + 1)
                       for i in alt_res if i not in cur_set), Fraction(0))
            gain = cur - dev
            if gain > best_gain:
                best_alt, best_gain = alt, gain
        if best_alt is not None:
            actions = list(outcome.actions)
            actions[p] = best_alt
            return Profile(tuple(actions))
    return None


def best_response_dynamics(game: Game, strategy: LeaderStrategy,
                           start: FollowersOutcome,
                           max_steps: Optional[int] = None) -> FollowersOutcome:
    """Run best-response dynamics to a Nash outcome and return it."""
    previous_potential = None
    outcome = start
    for outcome in brd_trajectory(game, strategy, start, max_steps):
        phi = rosenthal_potential(game, strategy, outcome)
        if previous_potential is not None and phi >= previous_potential:
            raise AssertionError("best-response step did not decrease the potential")
        previous_potential = phi
    return outcome


def outcome_space_size(game: Game) -> int:
    """Number of distinct followers' outcomes (configurations or profiles)."""
    if game.kind == TCLASS_SSCG:
        size = 1
        for cls in game.classes:
            size *= math.comb(cls.n + len(cls.resources) - 1, len(cls.resources) - 1)
        return size
    size = 1
    for f in game.followers:
        size *= len(f.actions)
    return size


def _compositions(total: int, bins: int) -> Iterator[tuple[int, ...]]:
    """All ways to split ``total`` identical players over ``bins`` slots."""
    if bins == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, bins - 1):
            yield (head,) + rest


def enumerate_outcomes(game: Game,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[FollowersOutcome]:
    """Exhaustively iterate all followers' outcomes (duplicate-free).

    Class games iterate per-class configurations; general games iterate
    labeled action profiles.  Fails fast when the space exceeds ``cap``.
    """
    size = outcome_space_size(game)
    if size > cap:
        raise EnumerationCapError(size, cap)
    if game.kind == TCLASS_SSCG:
        r = game.resource_count
        per_class = []
        for cls in game.classes:
            rows = []
            for counts in _compositions(cls.n, len(cls.resources)):
                row = [0] * r
                for res, c in zip(cls.resources, counts):
                    row[res] = c
                rows.append(tuple(row))
            per_class.append(rows)
        for combo in itertools.product(*per_class):
            yield Configurations(tuple(combo))
    else:
        ranges = [range(len(f.actions)) for f in game.followers]
        for combo in itertools.product(*ranges):
            yield Profile(tuple(combo))
