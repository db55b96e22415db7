"""Instance builders: hardness reductions and random game generators.

Random draws use PCG64 with one substream per (seed, field), so every field
of an instance is reproducible independently of the others; instance metadata
records the generator name, parameters and seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .game import (
    GENERAL_SCG,
    TCLASS_SSCG,
    ClassSpec,
    Configurations,
    CostTable,
    FollowerSpec,
    Game,
    LeaderStrategy,
    format_rational,
)

PRNG_NAME = "pcg64"


class TrivialNoInstanceError(ValueError):
    """The instance is a trivial "no" (some item exceeds the half-sum target)."""


@dataclass(frozen=True)
class CnfInstance:
    """3-literal clauses over 1-based variables; negative literal = negation."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for c, clause in enumerate(self.clauses):
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"clause {c}: literal {lit} out of range")

    def distinct_literals(self, clause: int) -> tuple[int, ...]:
        return tuple(sorted(set(self.clauses[clause]), key=lambda l: (abs(l), l < 0)))


@dataclass(frozen=True)
class KPartitionInstance:
    items: tuple[int, ...]
    k: int

    def __post_init__(self):
        if any(s < 1 for s in self.items):
            raise ValueError("items must be positive integers")
        if self.k < 1 or 2 * self.k > len(self.items):
            raise ValueError(f"k={self.k} must satisfy 1 <= k <= len(items)/2")
        if sum(self.items) % 2 != 0:
            raise ValueError("item sum must be even")

    @property
    def half_sum(self) -> int:
        return sum(self.items) // 2


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def _constant_tail_row(first: Fraction, rest: Fraction, length: int) -> tuple[Fraction, ...]:
    return (first,) + (rest,) * (length - 1)


# -- 3SAT reduction ----------------------------------------------------------

def reduce_3sat(cnf: CnfInstance, epsilon: Fraction = Fraction(1, 4)) -> Game:
    """Symmetric two-resource-action game whose optimal commitment cost is
    ``epsilon`` exactly when the formula is satisfiable (and at least 1 when not).

    One gadget resource triple per variable, one resource per clause, one
    escape resource the leader wants for herself.  Every player (leader
    included) shares the same action list: the escape singleton, two actions
    per variable (literal resource plus the variable's shared tail resource),
    and one action per distinct clause literal.
    """
    epsilon = Fraction(epsilon)
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    u_count = cnf.num_vars
    c_count = len(cnf.clauses)

    res_w = 0
    def res_pos(u): return 1 + 3 * u
    def res_neg(u): return 1 + 3 * u + 1
    def res_tail(u): return 1 + 3 * u + 2
    def res_clause(c): return 1 + 3 * u_count + c
    r = 1 + 3 * u_count + c_count

    actions: list[tuple[int, ...]] = [(res_w,)]
    for u in range(u_count):
        actions.append(tuple(sorted((res_pos(u), res_tail(u)))))
        actions.append(tuple(sorted((res_neg(u), res_tail(u)))))
    for c in range(c_count):
        for lit in cnf.distinct_literals(c):
            u = abs(lit) - 1
            lit_res = res_pos(u) if lit > 0 else res_neg(u)
            actions.append(tuple(sorted((res_clause(c), lit_res))))
    shared = tuple(actions)

    followers = c_count + u_count
    length = followers + 2
    rows: list[tuple[Fraction, ...]] = [(Fraction(0),)] * r
    rows[res_w] = _constant_tail_row(epsilon, Fraction(4), length)
    for u in range(u_count):
        rows[res_pos(u)] = _constant_tail_row(Fraction(0), Fraction(2), length)
        rows[res_neg(u)] = _constant_tail_row(Fraction(0), Fraction(2), length)
        rows[res_tail(u)] = _constant_tail_row(Fraction(3), Fraction(5), length)
    for c in range(c_count):
        rows[res_clause(c)] = _constant_tail_row(Fraction(1), Fraction(5), length)
    costs = CostTable(rows=tuple(rows), monotone=True)

    return Game(
        kind=GENERAL_SCG,
        resource_count=r,
        leader_actions=shared,
        follower_costs=costs,
        leader_costs=costs,
        followers=tuple(FollowerSpec(shared) for _ in range(followers)),
        metadata={
            "generator": "3sat_reduction",
            "epsilon": format_rational(epsilon),
            "num_vars": u_count,
            "clauses": [list(c) for c in cnf.clauses],
        },
    )


def inapprox_epsilon(cnf: CnfInstance) -> Fraction:
    """Exponentially small epsilon (1 / 2^(players*resources) of the mapped game)."""
    n = len(cnf.clauses) + cnf.num_vars + 1
    r = 1 + 3 * cnf.num_vars + len(cnf.clauses)
    return Fraction(1, 2 ** (n * r))


def sat_brute_force(cnf: CnfInstance) -> bool:
    """Desk-scale satisfiability check by assignment enumeration (<= 20 vars)."""
    if cnf.num_vars > 20:
        raise ValueError("brute-force checker is limited to 20 variables")
    for mask in range(1 << cnf.num_vars):
        ok = True
        for clause in cnf.clauses:
            if not any(
                (mask >> (abs(lit) - 1)) & 1 == (1 if lit > 0 else 0)
                for lit in clause
            ):
                ok = False
                break
        if ok:
            return True
    return False


# -- K-PARTITION reduction ---------------------------------------------------

def reduce_kpartition(inst: KPartitionInstance) -> Game:
    """Four-class singleton game encoding a K-subset-sum question.

    The leader can profit only by splitting mass between the item resources
    and a reserved resource in exact proportion to a size-K subset summing to
    half the total; every deviation incentive is priced so that any cheaper
    commitment decodes into such a subset.
    """
    s = inst.items
    k = inst.k
    x = inst.half_sum
    if any(v > x for v in s):
        raise TrivialNoInstanceError(
            f"item larger than the half-sum target {x}; the answer is trivially no")

    m = len(s)
    res_w, res_x, res_y, res_z = m, m + 1, m + 2, m + 3
    r = m + 4
    item_res = tuple(range(m))

    classes = (
        ClassSpec(n=k, resources=tuple(sorted(item_res + (res_w,)))),
        ClassSpec(n=2 * m, resources=tuple(sorted(item_res + (res_z,)))),
        ClassSpec(n=1, resources=(res_w, res_y)),
        ClassSpec(n=1, resources=(res_x, res_y)),
    )
    leader_actions = tuple((i,) for i in sorted(item_res + (res_y,)))

    two_xk = Fraction(2 * x * k)
    c_ry_f = Fraction(6 * k - 2, 2 * k * k - k)
    n_total = k + 2 * m + 3

    def lengths(resource: int) -> int:
        load = sum(c.n for c in classes if resource in c.resources)
        return load + 2

    f_rows: list[tuple[Fraction, ...]] = [()] * r
    l_rows: list[tuple[Fraction, ...]] = [()] * r
    for i, si in enumerate(s):
        spike = two_xk / si
        cap = (1 - spike + two_xk) * spike
        ln = lengths(i)
        f_rows[i] = (Fraction(0), spike) + (cap,) * (ln - 2)
        lead = Fraction(2 * x * (2 * x - si), si)
        l_rows[i] = (lead, lead) + (Fraction(x) ** 4,) * (ln - 2)
    ln = lengths(res_w)
    f_rows[res_w] = (Fraction(1, k),) + (Fraction(1),) * (ln - 1)
    l_rows[res_w] = f_rows[res_w]
    ln = lengths(res_x)
    f_rows[res_x] = (Fraction(3, k),) * ln
    l_rows[res_x] = f_rows[res_x]
    ln = lengths(res_y)
    f_rows[res_y] = (Fraction(2, k),) + (c_ry_f,) * (ln - 1)
    l_rows[res_y] = (Fraction(0),) + (Fraction(x) ** 4,) * (ln - 1)
    ln = lengths(res_z)
    f_rows[res_z] = (two_xk,) * ln
    l_rows[res_z] = f_rows[res_z]

    monotone = all(_is_monotone(row) for row in f_rows) and \
        all(_is_monotone(row) for row in l_rows)
    return Game(
        kind=TCLASS_SSCG,
        resource_count=r,
        leader_actions=leader_actions,
        follower_costs=CostTable(tuple(f_rows), monotone=monotone),
        leader_costs=CostTable(tuple(l_rows), monotone=monotone),
        classes=classes,
        metadata={
            "generator": "kpartition_reduction",
            "items": list(s),
            "k": k,
            "n": n_total,
        },
    )


def _is_monotone(row: Sequence[Fraction]) -> bool:
    prev = Fraction(0)
    for v in row:
        if v < prev:
            return False
        prev = v
    return True


def kpartition_certificate(inst: KPartitionInstance,
                           subset: Sequence[int]) -> tuple[LeaderStrategy, Configurations]:
    """The commitment and configurations witnessing a yes-instance.

    ``subset`` holds item indices with ``len == k`` and sum equal to the
    half-sum; the returned pair is an exact equilibrium of the reduced game
    with leader cost ``2X - X/K``.
    """
    s = inst.items
    k = inst.k
    x = inst.half_sum
    chosen = set(subset)
    if len(chosen) != k or sum(s[i] for i in chosen) != x:
        raise ValueError("subset is not a size-K half-sum certificate")

    m = len(s)
    res_w, res_x, res_y, res_z = m, m + 1, m + 2, m + 3
    r = m + 4
    # leader actions are singletons ordered by resource
    probs: dict[int, Fraction] = {}
    action_index = {i: idx for idx, i in enumerate(sorted(tuple(range(m)) + (res_y,)))}
    for i in chosen:
        probs[action_index[i]] = Fraction(s[i], 2 * x * k)
    probs[action_index[res_y]] = Fraction(2 * k - 1, 2 * k)

    nu = [[0] * r for _ in range(4)]
    for i in range(m):
        if i in chosen:
            nu[0][i] = 1
        else:
            nu[1][i] = 2
    nu[1][res_z] = 2 * k
    nu[2][res_w] = 1
    nu[3][res_x] = 1
    return LeaderStrategy(probs), Configurations(tuple(tuple(row) for row in nu))


def kpartition_find_subset(inst: KPartitionInstance) -> Optional[tuple[int, ...]]:
    """Desk-scale search for a size-K half-sum subset (<= 24 items)."""
    if len(inst.items) > 24:
        raise ValueError("brute-force labeling is limited to 24 items")
    target = inst.half_sum
    for combo in itertools.combinations(range(len(inst.items)), inst.k):
        if sum(inst.items[i] for i in combo) == target:
            return combo
    return None


# -- random instances --------------------------------------------------------

def _cost_rows(game_like_lengths: Sequence[int], rng: np.random.Generator,
               cost_max: int, monotone: bool) -> CostTable:
    rows = []
    for length in game_like_lengths:
        draw = rng.integers(1, cost_max + 1, size=length)
        if monotone:
            draw = np.sort(draw)
        rows.append(tuple(Fraction(int(v)) for v in draw))
    return CostTable(tuple(rows), monotone=monotone)


def gen_random_tclass(r: int, t: int, n_t, seed: int,
                      monotone: bool = False,
                      cost_max: Optional[int] = None) -> Game:
    """Random class singleton game: each class (and the leader) draws a
    uniform half-size resource subset; costs are i.i.d. uniform integers."""
    if r < 2 or t < 1:
        raise ValueError("need r >= 2 and at least one class")
    counts = [int(n_t)] * t if isinstance(n_t, int) else [int(v) for v in n_t]
    if len(counts) != t or any(v < 1 for v in counts):
        raise ValueError("class sizes must be positive, one per class")
    subset_size = max(1, r // 2)
    n_players = sum(counts) + 1
    cmax = cost_max if cost_max is not None else n_players * r * t

    actions_rng = _rng(seed, 0)
    classes = tuple(
        ClassSpec(n=counts[i],
                  resources=tuple(sorted(int(v) for v in
                                         actions_rng.choice(r, size=subset_size, replace=False))))
        for i in range(t)
    )
    leader_rng = _rng(seed, 1)
    leader = tuple(sorted(int(v) for v in leader_rng.choice(r, size=subset_size, replace=False)))
    leader_actions = tuple((i,) for i in leader)

    lengths = [sum(c.n for c in classes if i in c.resources) + 2 for i in range(r)]
    follower_costs = _cost_rows(lengths, _rng(seed, 2), cmax, monotone)
    leader_costs = _cost_rows(lengths, _rng(seed, 3), cmax, monotone)

    return Game(
        kind=TCLASS_SSCG,
        resource_count=r,
        leader_actions=leader_actions,
        follower_costs=follower_costs,
        leader_costs=leader_costs,
        classes=classes,
        metadata={
            "generator": "random_tclass",
            "prng": PRNG_NAME,
            "seed": seed,
            "r": r,
            "T": t,
            "n_t": counts,
            "monotone": monotone,
            "cost_max": cmax,
        },
    )


def gen_random_scg(r: int, n: int, action_size: int, seed: int,
                   actions_per_player: Optional[int] = None,
                   cost_max: Optional[int] = None) -> Game:
    """Random general game: every player (leader included) draws distinct
    random actions of fixed cardinality; costs are i.i.d. uniform integers."""
    if action_size < 1 or action_size > r:
        raise ValueError(f"action size {action_size} must lie in [1, {r}]")
    if n < 2:
        raise ValueError("need at least a leader and one follower")
    per_player = actions_per_player if actions_per_player is not None else max(1, r // 2)
    pool = list(itertools.combinations(range(r), action_size))
    if per_player > len(pool):
        raise ValueError(
            f"cannot draw {per_player} distinct actions of size {action_size} from {r} resources")
    cmax = cost_max if cost_max is not None else n * r

    rng = _rng(seed, 0)
    draws = []
    for _ in range(n):
        idx = rng.choice(len(pool), size=per_player, replace=False)
        draws.append(tuple(pool[int(i)] for i in sorted(idx)))
    leader_actions = draws[0]
    followers = tuple(FollowerSpec(actions=d) for d in draws[1:])

    lengths = []
    for i in range(r):
        users = sum(1 for f in followers if any(i in a for a in f.actions))
        lengths.append(users + 2)
    follower_costs = _cost_rows(lengths, _rng(seed, 2), cmax, False)
    leader_costs = _cost_rows(lengths, _rng(seed, 3), cmax, False)

    return Game(
        kind=GENERAL_SCG,
        resource_count=r,
        leader_actions=leader_actions,
        follower_costs=follower_costs,
        leader_costs=leader_costs,
        followers=followers,
        metadata={
            "generator": "random_scg",
            "prng": PRNG_NAME,
            "seed": seed,
            "r": r,
            "n": n,
            "action_size": action_size,
            "actions_per_player": per_player,
            "cost_max": cmax,
        },
    )


def gen_random_3sat(num_vars: int, clause_ratio: float = 4.26,
                    seed: int = 0) -> CnfInstance:
    """Uniform random 3-CNF at a given clause/variable ratio.

    Each clause picks three distinct variables and independent signs (the
    standard fixed-length model; the default ratio sits at the hardness peak).
    """
    if num_vars < 3:
        raise ValueError("need at least 3 variables for 3-literal clauses")
    count = int(clause_ratio * num_vars)
    rng = _rng(seed, 0)
    clauses = []
    for _ in range(count):
        variables = rng.choice(num_vars, size=3, replace=False)
        signs = rng.integers(0, 2, size=3)
        clauses.append(tuple(
            int(v + 1) if s else -int(v + 1) for v, s in zip(variables, signs)
        ))
    return CnfInstance(num_vars=num_vars, clauses=tuple(clauses))


def gen_random_kpartition(size: int, seed: int = 0) -> KPartitionInstance:
    """Uniform items in [2, 100] with K = size/2, resampled until the sum is
    even and no item exceeds the half-sum."""
    if size % 2 != 0 or size < 2:
        raise ValueError("size must be a positive even integer")
    rng = _rng(seed, 0)
    while True:
        items = [int(v) for v in rng.integers(2, 101, size=size)]
        total = sum(items)
        if total % 2 != 0:
            continue
        if max(items) > total // 2:
            continue
        return KPartitionInstance(items=tuple(items), k=size // 2)
