from fractions import Fraction

import pytest

from scgsolve.game import ClassSpec, CostTable, FollowerSpec, Game, GENERAL_SCG, TCLASS_SSCG


def tclass_game(rows_f, rows_l, classes, leader_resources):
    return Game(
        kind=TCLASS_SSCG,
        resource_count=len(rows_f),
        leader_actions=tuple((i,) for i in leader_resources),
        follower_costs=CostTable.from_lists(rows_f),
        leader_costs=CostTable.from_lists(rows_l),
        classes=tuple(ClassSpec(n, tuple(sorted(res))) for n, res in classes),
    )


def general_game(rows_f, rows_l, follower_actions, leader_actions):
    return Game(
        kind=GENERAL_SCG,
        resource_count=len(rows_f),
        leader_actions=tuple(tuple(sorted(a)) for a in leader_actions),
        follower_costs=CostTable.from_lists(rows_f),
        leader_costs=CostTable.from_lists(rows_l),
        followers=tuple(
            FollowerSpec(tuple(tuple(sorted(a)) for a in acts))
            for acts in follower_actions
        ),
    )


@pytest.fixture
def two_resource_game():
    """Two symmetric followers, two resources; unique equilibrium splits them."""
    rows = [[1, 3, 3, 3], [2, 5, 5, 5]]
    return tclass_game(rows, rows, [(2, (0, 1))], (0, 1))
