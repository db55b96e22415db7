import math
from fractions import Fraction

import pytest

from scgsolve.dp import (
    NeDynamicProgram,
    OptimalityCriterion,
    optimal_ne_dp,
    ose_pure_leader_symmetric_scg,
    ose_pure_leader_tclass,
)
from scgsolve.equilibrium import enumerate_outcomes, is_nash, leader_cost
from scgsolve.game import Configurations, LeaderStrategy, Profile, congestion
from scgsolve.generators import gen_random_scg, gen_random_tclass
from scgsolve.oracle import ose_oracle_pure_leader
from scgsolve.timing import Deadline, SolveTimeout

from conftest import general_game, tclass_game


def brute_force_optimal_ne(game, criterion):
    """Independent optimum: scan every configuration, keep stable minima."""
    best = None
    sigma = LeaderStrategy({})
    for outcome in enumerate_outcomes(game):
        ok, _ = is_nash(game, sigma, outcome)
        if not ok:
            continue
        nu = congestion(game, outcome)
        if criterion.kind == "sum_of_player_costs":
            value = sum(
                (nu[i] * game.follower_costs.cost(i, nu[i])
                 for i in range(game.resource_count)), Fraction(0))
        else:
            value = sum(
                (row[nu[i]] for i, row in criterion.target_rows.items()), Fraction(0))
        if best is None or value < best:
            best = value
    return best


def test_two_resource_example(two_resource_game):
    value, config = optimal_ne_dp(two_resource_game,
                                  OptimalityCriterion.sum_of_player_costs())
    assert value == 3
    assert config == Configurations(((1, 1),))


def test_single_resource_all_players():
    for k in (1, 2, 3):
        rows = [[5, 4, 9, 9, 9]]
        game = tclass_game(rows, rows, [(k, (0,))], (0,))
        value, config = optimal_ne_dp(game, OptimalityCriterion.sum_of_player_costs())
        assert value == k * game.follower_costs.cost(0, k)
        assert config == Configurations(((k,),))


def test_value_is_infeasible_never_on_valid_games():
    game = tclass_game([[7, 1, 2, 2]], [[7, 1, 2, 2]], [(2, (0,))], (0,))
    value, config = optimal_ne_dp(game, OptimalityCriterion.sum_of_player_costs())
    assert value == 2 * 1  # both players share the only resource


@pytest.mark.parametrize("seed", range(40))
@pytest.mark.parametrize("monotone", [False, True])
def test_dp_equals_enumeration_on_random_games(seed, monotone):
    t = 1 + seed % 3
    r = 3 + seed % 3
    game = gen_random_tclass(r, t, 1 + seed % 3, seed=seed, monotone=monotone)
    crit = OptimalityCriterion.sum_of_player_costs()
    value, config = optimal_ne_dp(game, crit)
    assert value == brute_force_optimal_ne(game, crit)
    ok, witness = is_nash(game, LeaderStrategy({}), config)
    assert ok, witness


@pytest.mark.parametrize("seed", range(12))
def test_dp_resource_cost_criterion_equals_enumeration(seed):
    game = gen_random_tclass(4, 2, 2, seed=seed)
    target = game.leader_actions[0][0]
    crit = OptimalityCriterion.resource_cost({target: game.leader_costs.rows[target]})
    value, config = optimal_ne_dp(game, crit)
    assert value == brute_force_optimal_ne(game, crit)
    nu = congestion(game, config)
    assert value == game.leader_costs.rows[target][nu[target]]


def test_reconstruction_reevaluates_to_value():
    for seed in range(10):
        game = gen_random_tclass(5, 2, 3, seed=seed)
        value, config = optimal_ne_dp(game, OptimalityCriterion.sum_of_player_costs())
        nu = congestion(game, config)
        again = sum((nu[i] * game.follower_costs.cost(i, nu[i])
                     for i in range(game.resource_count)), Fraction(0))
        assert again == value


def test_table_size_respects_bound():
    game = gen_random_tclass(5, 2, 3, seed=3)
    dp = NeDynamicProgram(
        game.follower_costs.rows,
        [(c.n, c.resources) for c in game.classes],
        OptimalityCriterion.sum_of_player_costs(),
    )
    dp.solve_optimal()
    r = game.resource_count
    ladder = len(dp.ladder) + 1  # includes the open-cap sentinel
    bound = (r + 1) * math.prod(c.n + 1 for c in game.classes) * ladder ** (2 * len(game.classes))
    assert dp.table_size() <= bound


def test_entries_monotone_in_bounds():
    game = gen_random_tclass(4, 1, 3, seed=11)
    dp = NeDynamicProgram(
        game.follower_costs.rows,
        [(c.n, c.resources) for c in game.classes],
        OptimalityCriterion.sum_of_player_costs(),
    )
    budgets = (game.classes[0].n,)
    top = dp.inf_index
    weakest = dp.entry(dp.r, budgets, (top,), (0,))
    assert weakest is not None
    for cap in range(len(dp.ladder)):
        capped = dp.entry(dp.r, budgets, (cap,), (0,))
        if capped is not None:
            assert capped >= weakest
    for floor in range(len(dp.ladder)):
        floored = dp.entry(dp.r, budgets, (top,), (floor,))
        if floored is not None:
            assert floored >= weakest


def test_pure_leader_tclass_example():
    rows = [[1, 5, 5], [2, 6, 6]]
    game = tclass_game(rows, rows, [(1, (0, 1))], (0, 1))
    res = ose_pure_leader_tclass(game)
    assert res.leader_action == 0
    assert res.outcome == Configurations(((0, 1),))
    assert res.leader_cost == 1


def test_pure_leader_single_action_has_no_choice():
    rows = [[1, 5, 5], [2, 6, 6]]
    game = tclass_game(rows, rows, [(1, (0, 1))], (1,))
    res = ose_pure_leader_tclass(game)
    assert res.leader_action == 0
    assert res.leader_cost == 2  # commits to resource 1, follower settles on 0


@pytest.mark.parametrize("seed", range(30))
def test_pure_leader_tclass_matches_oracle(seed):
    game = gen_random_tclass(4, 2, 2, seed=1000 + seed)
    res = ose_pure_leader_tclass(game)
    ora = ose_oracle_pure_leader(game)
    assert res.leader_cost == ora.leader_cost


def test_symmetric_scg_multi_resource_leader_action():
    # one follower on singleton actions; the leader grabs both resources
    game = general_game(
        [[1, 5, 5], [2, 6, 6]],
        [[1, 5, 5], [2, 6, 6]],
        [[[0], [1]]],
        [[0, 1]],
    )
    res = ose_pure_leader_symmetric_scg(game)
    assert res.leader_action == 0
    assert res.leader_cost == 7  # follower settles on 0: c0(2) + c1(1) = 5 + 2
    ok, _ = is_nash(game, LeaderStrategy.pure(0), res.outcome)
    assert ok


def test_symmetric_scg_singleton_leader_reduces_to_tclass():
    rows = [[1, 5, 5], [2, 6, 6]]
    cls = tclass_game(rows, rows, [(1, (0, 1))], (0, 1))
    gen = general_game(rows, rows, [[[0], [1]]], [[0], [1]])
    assert ose_pure_leader_symmetric_scg(gen).leader_cost == \
        ose_pure_leader_tclass(cls).leader_cost


@pytest.mark.parametrize("seed", range(25))
def test_symmetric_scg_matches_pure_oracle(seed):
    import numpy as np
    rng = np.random.default_rng(seed)
    r = int(rng.integers(2, 5))
    n_followers = int(rng.integers(1, 4))
    rows = [[int(v) for v in rng.integers(1, 20, size=n_followers + 2)] for _ in range(r)]
    shared = [[i] for i in range(r)]
    leader_actions = [[i] for i in range(r)]
    leader_actions.append(sorted(int(v) for v in rng.choice(r, size=2, replace=False)))
    game = general_game(rows, rows, [shared] * n_followers, leader_actions)
    res = ose_pure_leader_symmetric_scg(game)
    ora = ose_oracle_pure_leader(game)
    assert res.leader_cost == ora.leader_cost


def test_symmetric_scg_rejects_asymmetric_followers():
    game = general_game(
        [[1, 2, 3], [1, 2, 3]],
        [[1, 2, 3], [1, 2, 3]],
        [[[0], [1]], [[0]]],
        [[0]],
    )
    with pytest.raises(ValueError, match="singleton"):
        ose_pure_leader_symmetric_scg(game)


def test_dp_deadline_expires():
    game = gen_random_tclass(6, 3, 3, seed=5)
    with pytest.raises(SolveTimeout):
        ose_pure_leader_tclass(game, deadline=Deadline(expires_at=0.0))
