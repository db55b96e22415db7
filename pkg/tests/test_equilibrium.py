import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from scgsolve.equilibrium import (
    EnumerationCapError,
    ExpectedCostView,
    best_response_dynamics,
    brd_trajectory,
    enumerate_outcomes,
    expected_follower_cost,
    follower_cost,
    is_nash,
    leader_cost,
    outcome_space_size,
    rosenthal_potential,
)
from scgsolve.game import (
    Configurations,
    CostTable,
    LeaderStrategy,
    Profile,
    congestion,
)
from scgsolve.generators import CnfInstance, gen_random_tclass, reduce_3sat, sat_brute_force

from conftest import general_game, tclass_game


def view_of(row, p):
    return ExpectedCostView(CostTable.from_lists([row]), (Fraction(p),))


def test_expected_cost_no_commitment_mass():
    v = view_of([4, 7, 9], 0)
    assert expected_follower_cost(v, 0, 2) == 7


def test_expected_cost_pure_commitment():
    v = view_of([4, 7, 9], 1)
    assert expected_follower_cost(v, 0, 2) == 9


def test_expected_cost_matches_reduction_arithmetic():
    # K=2 gadget resource: c(1)=2/K=1, c(2)=5/3, marginal (2K-1)/2K=3/4 at x=1
    v = view_of([1, "5/3"], Fraction(3, 4))
    assert expected_follower_cost(v, 0, 1) == Fraction(3, 2)


@settings(max_examples=60, deadline=None)
@given(
    c1=st.integers(0, 50), c2=st.integers(0, 50),
    num=st.integers(0, 16), den=st.integers(1, 16),
)
def test_expected_cost_between_adjacent_levels(c1, c2, num, den):
    p = Fraction(min(num, den), den)
    v = view_of([c1, c2], p)
    got = expected_follower_cost(v, 0, 1)
    assert min(c1, c2) <= got <= max(c1, c2)


def test_leader_cost_single_term(two_resource_game):
    sigma = LeaderStrategy.pure(0)
    assert leader_cost(two_resource_game, sigma, Configurations(((0, 2),))) == 1


def test_leader_cost_uniform_mix_averages(two_resource_game):
    sigma = LeaderStrategy({0: Fraction(1, 2), 1: Fraction(1, 2)})
    outcome = Configurations(((1, 1),))
    # (c0(2) + c1(2)) / 2 with leader costs [1,3] and [2,5]
    assert leader_cost(two_resource_game, sigma, outcome) == Fraction(3 + 5, 2)


def test_follower_cost_singleton_no_mass(two_resource_game):
    sigma = LeaderStrategy.pure(1)
    outcome = Configurations(((2, 0),))
    assert follower_cost(two_resource_game, sigma, outcome, (0,)) == 3


def test_follower_cost_two_resources_sums():
    game = general_game(
        [[1, 9, 9, 9], [4, 6, 6, 6]],
        [[1, 9, 9, 9], [4, 6, 6, 6]],
        [[[0, 1]], [[1]]],
        [[0]],
    )
    sigma = LeaderStrategy.pure(0)
    # congestions (1, 2); resource 0 carries leader mass
    outcome = Profile((0, 0))
    assert follower_cost(game, sigma, outcome, (0, 1)) == Fraction(9) + Fraction(6)


def test_is_nash_single_option_is_trivially_stable():
    game = tclass_game([[5, 7, 7]], [[5, 7, 7]], [(1, (0,))], (0,))
    ok, witness = is_nash(game, LeaderStrategy.pure(0), Configurations(((1,),)))
    assert ok and witness is None


def test_is_nash_detects_witness(two_resource_game):
    ok, witness = is_nash(two_resource_game, LeaderStrategy({}),
                          Configurations(((2, 0),)))
    assert not ok
    assert witness.current_action == (0,)
    assert witness.improving_action == (1,)
    assert witness.current_cost == 3 and witness.deviated_cost == 2


def test_is_nash_weak_inequality_counts_as_stable():
    rows = [[2, 2, 2], [2, 2, 2]]
    game = tclass_game(rows, rows, [(1, (0, 1))], (0,))
    ok, _ = is_nash(game, LeaderStrategy({}), Configurations(((1, 0),)))
    assert ok


def test_is_nash_on_satisfiable_reduction_outcome():
    cnf = CnfInstance(2, ((1, 2, -1),))
    assert sat_brute_force(cnf)
    game = reduce_3sat(cnf, Fraction(1, 4))
    # assignment u1=T, u2=T: p_u1 -> a_not_u1, p_u2 -> a_not_u2, clause -> (phi, u1)
    actions = game.followers[0].actions
    a_nu1 = actions.index(tuple(sorted((2, 3))))      # neg literal of u1 + tail
    a_nu2 = actions.index(tuple(sorted((5, 6))))      # neg literal of u2 + tail
    a_phi = actions.index(tuple(sorted((7, 1))))      # clause + positive u1
    profile = Profile((a_nu1, a_nu2, a_phi))
    ok, witness = is_nash(game, LeaderStrategy.pure(0), profile)
    assert ok, witness
    assert leader_cost(game, LeaderStrategy.pure(0), profile) == Fraction(1, 4)


def test_follower_cost_reduction_example():
    # follower on the u-gadget pair with both resources at congestion one,
    # leader parked on the escape resource: 0 + 3
    cnf = CnfInstance(1, ((1, 1, 1),))
    game = reduce_3sat(cnf, Fraction(1, 4))
    actions = game.followers[0].actions
    a_u = actions.index(tuple(sorted((1, 3))))
    a_w = actions.index((0,))
    profile = Profile((a_u, a_w))
    cost = follower_cost(game, LeaderStrategy.pure(a_w), profile,
                         game.followers[0].actions[a_u])
    assert cost == 3


def test_brd_fixpoint_returns_start(two_resource_game):
    ne = Configurations(((1, 1),))
    sigma = LeaderStrategy({})
    assert best_response_dynamics(two_resource_game, sigma, ne) == ne


def test_brd_converges_to_split(two_resource_game):
    sigma = LeaderStrategy({})
    out = best_response_dynamics(two_resource_game, sigma, Configurations(((2, 0),)))
    assert out == Configurations(((1, 1),))


def test_brd_potential_strictly_decreases(two_resource_game):
    sigma = LeaderStrategy({})
    values = [
        rosenthal_potential(two_resource_game, sigma, o)
        for o in brd_trajectory(two_resource_game, sigma, Configurations(((0, 2),)))
    ]
    assert all(a > b for a, b in zip(values, values[1:]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_brd_terminates_at_equilibrium_on_random_games(seed):
    game = gen_random_tclass(4, 2, 2, seed=seed)
    sigma = LeaderStrategy.pure(0)
    start = next(enumerate_outcomes(game))
    out = best_response_dynamics(game, sigma, start)
    ok, witness = is_nash(game, sigma, out)
    assert ok, witness


def test_enumerate_configurations_counts():
    game = tclass_game([[1, 2, 3, 3], [1, 2, 3, 3]], [[1, 2, 3, 3], [1, 2, 3, 3]],
                       [(2, (0, 1))], (0,))
    outcomes = list(enumerate_outcomes(game))
    assert len(outcomes) == 3
    assert Configurations(((1, 1),)) in outcomes
    assert len(set(outcomes)) == 3


def test_enumerate_profiles_counts():
    acts = [[[0], [1], [0, 1]]] * 2
    game = general_game([[1, 2, 3], [1, 2, 3]], [[1, 2, 3], [1, 2, 3]], acts, [[0]])
    outcomes = list(enumerate_outcomes(game))
    assert len(outcomes) == 9
    assert len(set(outcomes)) == 9


def test_enumeration_space_of_reduction_game():
    # one follower per variable plus one per clause, all sharing 8 actions
    cnf = CnfInstance(2, ((1, 2, -1),))
    game = reduce_3sat(cnf, Fraction(1, 4))
    assert len(game.followers) == 3
    assert outcome_space_size(game) == 8 ** 3


def test_enumeration_cap_fails_fast():
    cnf = CnfInstance(2, ((1, 2, -1),))
    game = reduce_3sat(cnf, Fraction(1, 4))
    with pytest.raises(EnumerationCapError) as err:
        list(enumerate_outcomes(game, cap=100))
    assert err.value.size == 512


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_enumerated_outcomes_are_valid(seed):
    from scgsolve.game import outcome_violations
    game = gen_random_tclass(5, 2, 2, seed=seed)
    for outcome in enumerate_outcomes(game):
        assert outcome_violations(game, outcome) == []


def test_config_and_profile_agree_on_stability():
    # one class of two players is the same game as two symmetric followers
    rows = [[3, 1, 4, 4], [2, 5, 1, 1]]
    cls = tclass_game(rows, rows, [(2, (0, 1))], (0,))
    gen = general_game(rows, rows, [[[0], [1]]] * 2, [[0]])
    sigma_cls = LeaderStrategy.pure(0)
    for config in enumerate_outcomes(cls):
        counts = config.total()
        labeled = []
        for i, c in enumerate(counts):
            labeled.extend([i] * c)
        profile = Profile(tuple(labeled))
        a, _ = is_nash(cls, sigma_cls, config)
        b, _ = is_nash(gen, sigma_cls, profile)
        assert a == b
