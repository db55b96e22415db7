import math
import re
from fractions import Fraction

import numpy as np
import pytest

from scgsolve.equilibrium import is_nash, leader_cost
from scgsolve.game import Configurations, LeaderStrategy, Profile
from scgsolve.generators import (
    CnfInstance,
    KPartitionInstance,
    gen_random_scg,
    gen_random_tclass,
    reduce_3sat,
    reduce_kpartition,
)
from scgsolve.milp import (
    BINARY,
    MilpDecodeError,
    MilpModel,
    MilpParams,
    MilpVariable,
    build_milp_general,
    build_milp_tclass,
    emit_lp_format,
    extract_ose,
    solve_milp,
)
from scgsolve.oracle import ose_oracle_mixed_leader

from conftest import general_game, tclass_game


def _counts(model):
    kinds = {}
    for entity in model.decode.values():
        kinds[entity[0]] = kinds.get(entity[0], 0) + 1
    return kinds


def test_tclass_variable_counts(two_resource_game):
    kinds = _counts(build_milp_tclass(two_resource_game))
    assert kinds == {"alpha_resource": 2, "q": 4, "y": 4, "z": 4}


def test_single_player_class_has_one_level():
    rows = [[1, 2, 3], [4, 5, 6]]
    game = tclass_game(rows, rows, [(1, (0, 1))], (0,))
    model = build_milp_tclass(game)
    q_names = [n for n, e in model.decode.items() if e[0] == "q"]
    assert sorted(q_names) == ["q_t0_i0_v1", "q_t0_i1_v1"]


def test_alpha_fixed_outside_leader_actions():
    rows = [[1, 2, 3, 3], [1, 2, 3, 3]]
    game = tclass_game(rows, rows, [(2, (0, 1))], (0,))
    model = build_milp_tclass(game)
    var = model.variables[model.index_of("a1")]
    assert var.lb == 0 and var.ub == 0


def test_general_constraint_counts():
    game = general_game(
        [[1, 2, 3], [4, 5, 6]],
        [[1, 2, 3], [4, 5, 6]],
        [[[0], [1]]],
        [[0]],
    )
    model = build_milp_general(game)
    names = [c.name for c in model.constraints]
    assert names.count("pick_p0") == 1
    assert len([n for n in names if n.startswith("ne_")]) == 2  # ordered pairs


def test_general_ne_rows_use_symmetric_difference_only():
    # actions {0,1} vs {0,2}: resource 0 is shared and must not appear
    game = general_game(
        [[1, 2, 3]] * 3,
        [[1, 2, 3]] * 3,
        [[[0, 1], [0, 2]]],
        [[0]],
    )
    model = build_milp_general(game)
    shared_vars = {model.index_of(n) for n, e in model.decode.items()
                   if e[0] in ("y", "z") and e[1] == 0}
    for con in model.constraints:
        if con.name.startswith("ne_"):
            assert not (shared_vars & set(con.coeffs)), con.name


def test_big_m_recorded_and_dominates_costs(two_resource_game):
    model = build_milp_tclass(two_resource_game)
    top = max(max(row) for row in two_resource_game.follower_costs.rows)
    assert model.big_m > top


@pytest.mark.parametrize("seed", range(8))
def test_models_never_infeasible(seed):
    g1 = gen_random_tclass(4, 2, 2, seed=seed)
    assert solve_milp(build_milp_tclass(g1)).status == "Optimal"
    g2 = gen_random_scg(4, 3, 2, seed=seed, actions_per_player=2)
    assert solve_milp(build_milp_general(g2)).status == "Optimal"


@pytest.mark.parametrize("seed", range(10))
def test_tclass_matches_mixed_oracle(seed):
    game = gen_random_tclass(4, 2, 2, seed=100 + seed)
    sol = solve_milp(build_milp_tclass(game))
    oracle = ose_oracle_mixed_leader(game)
    assert sol.status == "Optimal"
    assert abs(sol.objective - float(oracle.leader_cost)) <= 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_general_matches_mixed_oracle(seed):
    game = gen_random_scg(4, 4, 2, seed=200 + seed, actions_per_player=3)
    sol = solve_milp(build_milp_general(game))
    oracle = ose_oracle_mixed_leader(game)
    assert sol.status == "Optimal"
    assert abs(sol.objective - float(oracle.leader_cost)) <= 1e-6


def test_3sat_model_optimum_is_epsilon():
    game = reduce_3sat(CnfInstance(1, ((1, 1, 1),)), Fraction(1, 4))
    sol = solve_milp(build_milp_general(game))
    assert sol.status == "Optimal"
    assert sol.objective == pytest.approx(0.25, abs=1e-6)
    strategy, outcome, cost = extract_ose(build_milp_general(game), sol, game)
    assert cost == Fraction(1, 4)


def test_kpartition_yes_instance_upper_bound():
    inst = KPartitionInstance((2, 2, 2, 2), 2)
    game = reduce_kpartition(inst)
    x = inst.half_sum
    bound = 2 * x - Fraction(x, inst.k)
    sol = solve_milp(build_milp_tclass(game), MilpParams(time_limit=300))
    assert sol.values is not None
    assert sol.objective <= float(bound) + 1e-6


def test_all_binaries_fixed_solves_at_the_root(two_resource_game):
    model = build_milp_tclass(two_resource_game)
    # pin the split configuration: one player per resource, leader on 0
    forced = {"q_t0_i0_v1": 1, "q_t0_i1_v1": 1, "y_i0_v1": 1, "y_i1_v1": 1,
              "q_t0_i0_v2": 0, "q_t0_i1_v2": 0, "y_i0_v2": 0, "y_i1_v2": 0}
    fixed_vars = []
    for var in model.variables:
        if var.kind == BINARY:
            val = Fraction(forced[var.name])
            fixed_vars.append(MilpVariable(var.name, var.kind, val, val))
        else:
            fixed_vars.append(var)
    pinned = MilpModel(fixed_vars, model.constraints, model.objective,
                       model.decode, model.big_m)
    sol = solve_milp(pinned)
    assert sol.status == "Optimal"
    assert sol.nodes == 1
    assert sol.objective == pytest.approx(3.0, abs=1e-9)  # leader joins resource 0


def test_timeout_returns_incumbent_and_gap():
    game = gen_random_tclass(12, 2, 6, seed=9)
    model = build_milp_tclass(game)
    sol = solve_milp(model, MilpParams(time_limit=2.0))
    if sol.status == "Timeout" and sol.values is not None:
        assert sol.gap == pytest.approx(
            (sol.objective - sol.lower_bound) / sol.objective, abs=1e-12)
        assert sol.lower_bound <= sol.objective + 1e-9
    else:
        assert sol.status == "Optimal"


@pytest.mark.parametrize("seed", range(6))
def test_extract_ose_postconditions(seed):
    game = gen_random_tclass(4, 2, 2, seed=300 + seed)
    model = build_milp_tclass(game)
    sol = solve_milp(model)
    strategy, outcome, cost = extract_ose(model, sol, game)
    ok, witness = is_nash(game, strategy, outcome, tol=1e-6)
    assert ok, witness
    assert abs(float(cost) - sol.objective) <= 1e-6
    assert abs(float(sum(strategy.probs.values())) - 1.0) <= 1e-6


def test_extract_requires_incumbent(two_resource_game):
    model = build_milp_tclass(two_resource_game)
    from scgsolve.milp import MilpSolution
    with pytest.raises(MilpDecodeError):
        extract_ose(model, MilpSolution(status="Infeasible"), two_resource_game)


# -- LP file emission ----------------------------------------------------------

def test_emit_contains_sections(two_resource_game):
    text = emit_lp_format(build_milp_tclass(two_resource_game))
    for section in ("Minimize", "Subject To", "Bounds", "Binary", "End"):
        assert section in text


def test_emit_empty_objective_floor():
    model = MilpModel(
        [MilpVariable("x", BINARY, Fraction(0), Fraction(1))],
        [], {}, {"x": ("y", 0, 1)}, Fraction(1))
    text = emit_lp_format(model)
    assert "Minimize\n obj: 0" in text


def test_emit_lists_each_binary_once(two_resource_game):
    model = build_milp_tclass(two_resource_game)
    text = emit_lp_format(model)
    binary_section = text.split("Binary")[1].split("End")[0]
    names = binary_section.split()
    assert sorted(names) == sorted(set(names))
    assert len(names) == len(model.binary_indices())


def test_emit_deterministic(two_resource_game):
    model = build_milp_tclass(two_resource_game)
    assert emit_lp_format(model) == emit_lp_format(model)


# -- cross-check the emitted file with an external solver ----------------------

def _parse_lp(text):
    """Minimal LP-format reader for the dialect emit_lp_format writes."""
    lines = [ln.rstrip() for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("\\")]
    section = None
    objective = {}
    constraints = []
    bounds = {}
    binaries = []
    term = re.compile(r"([+-])\s+(\d+(?:\.\d+)?(?:e-?\d+)?)\s+([\w.]+)")

    def parse_terms(expr):
        expr = expr.strip()
        if not expr.startswith(("+", "-")):
            expr = "+ " + expr
        out = {}
        if expr == "+ 0":
            return out
        for sign, mag, name in term.findall(expr):
            out[name] = out.get(name, 0.0) + float(mag) * (1 if sign == "+" else -1)
        return out

    for ln in lines:
        word = ln.strip()
        if word in ("Minimize", "Subject To", "Bounds", "Binary", "End"):
            section = word
            continue
        if section == "Minimize":
            objective = parse_terms(ln.split(":", 1)[1])
        elif section == "Subject To":
            body = ln.split(":", 1)[1]
            m = re.match(r"(.*?)(<=|>=|=)\s*([-\d./e]+)\s*$", body.strip())
            constraints.append((parse_terms(m.group(1)), m.group(2), float(m.group(3))))
        elif section == "Bounds":
            m = re.match(r"\s*([-\d.e]+)\s*<=\s*([\w.]+)\s*<=\s*([-\d.e]+)", ln)
            if m:
                bounds[m.group(2)] = (float(m.group(1)), float(m.group(3)))
                continue
            m = re.match(r"\s*([\w.]+)\s*=\s*([-\d.e]+)", ln)
            if m:
                bounds[m.group(1)] = (float(m.group(2)), float(m.group(2)))
                continue
            m = re.match(r"\s*([\w.]+)\s*>=\s*([-\d.e]+)", ln)
            bounds[m.group(1)] = (float(m.group(2)), math.inf)
        elif section == "Binary":
            binaries.append(word)
    return objective, constraints, bounds, binaries


def _solve_with_highs(text):
    from scipy.optimize import LinearConstraint, milp

    objective, constraints, bounds, binaries = _parse_lp(text)
    names = sorted({n for c, _, _ in constraints for n in c}
                   | set(objective) | set(bounds) | set(binaries))
    idx = {n: k for k, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, coef in objective.items():
        c[idx[name]] = coef
    lcs = []
    for coeffs, rel, rhs in constraints:
        row = np.zeros(n)
        for name, coef in coeffs.items():
            row[idx[name]] = coef
        lo, hi = {"<=": (-np.inf, rhs), ">=": (rhs, np.inf), "=": (rhs, rhs)}[rel]
        lcs.append(LinearConstraint(row, lo, hi))
    integrality = np.zeros(n)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for name in binaries:
        integrality[idx[name]] = 1
        ub[idx[name]] = 1.0
    for name, (lo, hi) in bounds.items():
        lb[idx[name]] = lo
        ub[idx[name]] = hi
    from scipy.optimize import Bounds
    res = milp(c, constraints=lcs, integrality=integrality, bounds=Bounds(lb, ub))
    assert res.success, res.message
    return res.fun


@pytest.mark.parametrize("seed", range(10))
def test_emitted_file_agrees_with_external_solver(seed):
    pytest.importorskip("scipy")
    if seed % 2 == 0:
        game = gen_random_tclass(3, 1, 2, seed=400 + seed)
        model = build_milp_tclass(game)
    else:
        game = gen_random_scg(3, 3, 2, seed=400 + seed, actions_per_player=2)
        model = build_milp_general(game)
    ours = solve_milp(model)
    theirs = _solve_with_highs(emit_lp_format(model))
    assert ours.status == "Optimal"
    assert abs(ours.objective - theirs) <= 1e-6
