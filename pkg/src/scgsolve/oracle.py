"""Exact brute-force computation of optimal leader commitments on small games.

The pure-leader oracle enumerates leader actions times followers' outcomes and
filters by the exact Nash check.  The mixed-leader oracle enumerates outcomes
only: for a fixed outcome the Nash inequalities are linear in the leader's
distribution, so each outcome contributes one small LP and the best feasible
outcome yields the overall optimum (followers break ties in the leader's
favor by construction of the minimum).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .equilibrium import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapError,
    ExpectedCostView,
    enumerate_outcomes,
    expected_follower_cost,
    is_nash,
    leader_cost,
    outcome_space_size,
)
from .game import (
    TCLASS_SSCG,
    Configurations,
    FollowersOutcome,
    Game,
    LeaderStrategy,
    Profile,
    congestion,
    validate,
)
from .simplex import OPTIMAL, LpProblem, solve_lp
from .timing import Deadline

_DEADLINE_STRIDE = 256
_RECONSTRUCT_DENOMINATOR = 10**6


@dataclass(frozen=True)
class OseResult:
    """An optimal commitment: strategy, supporting outcome, exact cost."""

    strategy: LeaderStrategy
    outcome: FollowersOutcome
    leader_cost: Fraction
    examined: int  # outcomes that supported an equilibrium


def ose_oracle_pure_leader(game: Game, cap: int = DEFAULT_ENUMERATION_CAP,
                           deadline: Optional[Deadline] = None) -> OseResult:
    """Exhaustive optimum over pure leader actions and equilibrium outcomes."""
    _require_valid(game)
    size = outcome_space_size(game)
    if size > cap:
        raise EnumerationCapError(size, cap)

    best: Optional[tuple[Fraction, int, FollowersOutcome]] = None
    supported = 0
    for k in range(len(game.leader_actions)):
        strategy = LeaderStrategy.pure(k)
        view = ExpectedCostView.for_strategy(game, strategy)
        for count, outcome in enumerate(enumerate_outcomes(game, cap)):
            if deadline is not None and count % _DEADLINE_STRIDE == 0:
                deadline.check()
            if not _stable(game, view, outcome):
                continue
            supported += 1
            cost = leader_cost(game, strategy, outcome)
            if best is None or cost < best[0]:
                best = (cost, k, outcome)
    if best is None:
        raise RuntimeError("no equilibrium outcome found; malformed game")
    cost, k, outcome = best
    return OseResult(LeaderStrategy.pure(k), outcome, cost, supported)


def ose_oracle_mixed_leader(game: Game, cap: int = DEFAULT_ENUMERATION_CAP,
                            deadline: Optional[Deadline] = None) -> OseResult:
    """Exhaustive optimum over mixed leader commitments.

    Any (strategy, equilibrium) pair is feasible in the LP of its own outcome,
    so minimizing each outcome's LP and taking the best outcome is exact.
    """
    _require_valid(game)
    n_actions = len(game.leader_actions)
    touching = [[] for _ in range(game.resource_count)]
    for k, action in enumerate(game.leader_actions):
        for i in action:
            touching[i].append(k)

    best: Optional[tuple[float, FollowersOutcome, tuple[float, ...]]] = None
    feasible = 0
    for count, outcome in enumerate(_oracle_outcomes(game, cap)):
        if deadline is not None and count % _DEADLINE_STRIDE == 0:
            deadline.check()
        nu = congestion(game, outcome)
        rows = _commitment_rows(game, outcome, nu, touching, n_actions)
        if rows is None:
            continue
        obj = [
            sum(float(game.leader_costs.cost(i, nu[i] + 1)) for i in action)
            for action in game.leader_actions
        ]
        a_rows = [r for r, _ in rows] + [[1.0] * n_actions]
        rels = ["<="] * len(rows) + ["="]
        rhs = [v for _, v in rows] + [1.0]
        sol = solve_lp(LpProblem(c=obj, a=a_rows, rels=rels, b=rhs,
                                 bounds=[(0.0, 1.0)] * n_actions))
        if sol.status != OPTIMAL:
            continue
        feasible += 1
        if best is None or sol.objective < best[0]:
            best = (sol.objective, outcome, sol.x)
    if best is None:
        raise RuntimeError("all outcome programs infeasible; malformed game")

    _, outcome, alphas = best
    strategy, cost = _verified_strategy(game, outcome, alphas)
    return OseResult(strategy, outcome, cost, feasible)


# -- outcome enumeration -----------------------------------------------------

def _oracle_outcomes(game: Game, cap: int) -> Iterator[FollowersOutcome]:
    """Outcome stream with interchangeable followers collapsed.

    In games where every follower has the same action list, profiles that
    permute followers are equivalent (same configuration, same deviation
    structure), so one sorted representative per action multiset suffices.
    """
    if game.kind == TCLASS_SSCG or not game.followers:
        yield from enumerate_outcomes(game, cap)
        return
    first = game.followers[0].actions
    if all(f.actions == first for f in game.followers):
        n_f = len(game.followers)
        n_a = len(first)
        size = math.comb(n_f + n_a - 1, n_a - 1)
        if size > cap:
            raise EnumerationCapError(size, cap)
        for combo in itertools.combinations_with_replacement(range(n_a), n_f):
            yield Profile(combo)
        return
    yield from enumerate_outcomes(game, cap)


# -- one outcome's linear system over the leader distribution ----------------

def _commitment_rows(game: Game, outcome: FollowersOutcome, nu,
                     touching, n_actions: int):
    """Nash inequalities as LP rows over the alpha variables, or None.

    Each row encodes current-cost minus deviation-cost <= 0.  Returns None
    when an interval relaxation (each resource marginal varied independently
    in [0,1]) already proves some inequality unsatisfiable.
    """
    cf = game.follower_costs
    rows: list[tuple[list[float], float]] = []

    def emit(cur_terms, dev_terms) -> bool:
        # terms: list of (resource, congestion) pairs entering each side
        coeffs = [0.0] * n_actions
        const = 0.0
        lo = hi = 0.0
        for i, x in cur_terms:
            base = float(cf.cost(i, x))
            step = float(cf.cost(i, x + 1)) - base
            const += base
            lo += min(base, base + step) if touching[i] else base
            for k in touching[i]:
                coeffs[k] += step
        for i, x in dev_terms:
            base = float(cf.cost(i, x))
            step = float(cf.cost(i, x + 1)) - base
            const -= base
            hi += max(base, base + step) if touching[i] else base
            for k in touching[i]:
                coeffs[k] -= step
        if lo > hi + 1e-9:
            return False
        rows.append((coeffs, -const))
        return True

    if game.kind == TCLASS_SSCG:
        assert isinstance(outcome, Configurations)
        for t, cls in enumerate(game.classes):
            for i in cls.resources:
                if outcome.nu[t][i] == 0:
                    continue
                for j in cls.resources:
                    if j == i:
                        continue
                    if not emit([(i, nu[i])], [(j, nu[j] + 1)]):
                        return None
    else:
        assert isinstance(outcome, Profile)
        for p, a in enumerate(outcome.actions):
            cur_res = game.followers[p].actions[a]
            cur_set = set(cur_res)
            for alt in range(len(game.followers[p].actions)):
                if alt == a:
                    continue
                alt_res = game.followers[p].actions[alt]
                alt_set = set(alt_res)
                cur_terms = [(i, nu[i]) for i in cur_res if i not in alt_set]
                dev_terms = [(i, nu[i] + 1) for i in alt_res if i not in cur_set]
                if not emit(cur_terms, dev_terms):
                    return None
    return rows


# -- verification of the winning outcome -------------------------------------

def _verified_strategy(game: Game, outcome: FollowersOutcome,
                       alphas) -> tuple[LeaderStrategy, Fraction]:
    """Rational reconstruction of the LP point, re-checked exactly.

    Falls back to the raw float point (checked at 1e-9) when the rounded
    rationals do not form an exact equilibrium.
    """
    probs = {k: Fraction(v).limit_denominator(_RECONSTRUCT_DENOMINATOR)
             for k, v in enumerate(alphas) if v > 1e-9}
    drift = 1 - sum(probs.values())
    if drift != 0 and probs:
        bulk = max(probs.items(), key=lambda kv: (kv[1], -kv[0]))[0]
        probs[bulk] += drift
    if probs and all(p >= 0 for p in probs.values()):
        candidate = LeaderStrategy(dict(probs))
        ok, _ = is_nash(game, candidate, outcome)
        if ok:
            return candidate, leader_cost(game, candidate, outcome)

    raw = LeaderStrategy({k: Fraction(max(0.0, v))
                          for k, v in enumerate(alphas) if v > 1e-12})
    ok, witness = is_nash(game, raw, outcome, tol=1e-9)
    if not ok:
        raise RuntimeError(f"winning outcome failed re-verification: {witness}")
    return raw, leader_cost(game, raw, outcome)


def _stable(game: Game, view: ExpectedCostView, outcome: FollowersOutcome) -> bool:
    """Exact Nash check against a prebuilt expected-cost view."""
    nu = congestion(game, outcome)
    if game.kind == TCLASS_SSCG:
        assert isinstance(outcome, Configurations)
        for t, cls in enumerate(game.classes):
            for i in cls.resources:
                if outcome.nu[t][i] == 0:
                    continue
                cur = expected_follower_cost(view, i, nu[i])
                for j in cls.resources:
                    if j != i and expected_follower_cost(view, j, nu[j] + 1) < cur:
                        return False
        return True
    assert isinstance(outcome, Profile)
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
                       for i in alt_set if i not in cur_set), Fraction(0))
            if dev < cur:
                return False
    return True


def _require_valid(game: Game) -> None:
    report = validate(game)
    if not report.ok:
        raise ValueError("malformed game: " + "; ".join(report.violations))
