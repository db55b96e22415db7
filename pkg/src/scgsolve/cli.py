"""Command-line front end: generate, solve, verify and benchmark instances.

Exit codes: 0 success, 1 verification failure, 2 error.  The default output
directory can be set through the ``SCGSOLVE_OUT_DIR`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import generators
from .dp import ose_pure_leader_symmetric_scg, ose_pure_leader_tclass
from .equilibrium import EnumerationCapError, is_nash, leader_cost, outcome_violations
from .game import (
    TCLASS_SSCG,
    GameFormatError,
    format_rational,
    load_game,
    load_solution,
    save_game,
    save_solution,
    validate,
)
from .milp import (
    MilpParams,
    build_milp_general,
    build_milp_tclass,
    emit_lp_format,
    extract_ose,
    solve_milp,
)
from .oracle import ose_oracle_mixed_leader, ose_oracle_pure_leader
from .timing import Deadline, SolveTimeout

SOLVERS = ("dp", "milp", "oracle-pure", "oracle-mixed", "export-lp")
CSV_COLUMNS = ["instance", "kind", "r", "n", "T", "solver", "status",
               "objective", "lower_bound", "gap", "time_ms", "seed"]


def _out_dir(args) -> Path:
    base = args.out_dir or os.environ.get("SCGSOLVE_OUT_DIR") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_gen(args) -> int:
    out = _out_dir(args)
    written = []
    for k in range(args.count):
        seed = args.seed + k
        if args.family == "tclass":
            game = generators.gen_random_tclass(
                args.r, args.T, args.nt, seed=seed,
                monotone=args.monotone, cost_max=args.cost_max)
            stem = f"tclass-r{args.r}-T{args.T}-nt{args.nt}-{seed}"
        elif args.family == "scg":
            game = generators.gen_random_scg(
                args.r, args.n, args.action_size, seed=seed,
                actions_per_player=args.actions_per_player, cost_max=args.cost_max)
            stem = f"scg-r{args.r}-n{args.n}-ap{args.action_size}-{seed}"
        elif args.family == "3sat-hard":
            cnf = generators.gen_random_3sat(args.vars, args.ratio, seed=seed)
            eps = generators.inapprox_epsilon(cnf) if args.inapprox \
                else Fraction(args.epsilon)
            game = generators.reduce_3sat(cnf, eps)
            game.metadata.update({"seed": seed, "prng": generators.PRNG_NAME})
            stem = f"3sat-hard-u{args.vars}-{seed}"
        elif args.family == "kpart-hard":
            inst = generators.gen_random_kpartition(args.size, seed=seed)
            game = generators.reduce_kpartition(inst)
            game.metadata.update({"seed": seed, "prng": generators.PRNG_NAME})
            stem = f"kpart-hard-s{args.size}-{seed}"
        else:
            raise ValueError(f"unknown family {args.family}")
        path = out / f"{stem}.json"
        path.write_text(save_game(game), encoding="utf-8")
        written.append(path)
        print(path)
    return 0 if written else 2


def _solve_one(game, solver: str, time_limit, cap):
    """Run one solver; returns (status, objective, lower_bound, gap, strategy, outcome)."""
    deadline = Deadline.after(time_limit)
    if solver == "dp":
        if game.kind == TCLASS_SSCG:
            res = ose_pure_leader_tclass(game, deadline=deadline)
        elif game.is_symmetric_singleton_followers():
            res = ose_pure_leader_symmetric_scg(game, deadline=deadline)
        else:
            raise ValueError(
                "dp solver needs a class singleton game or symmetric singleton followers")
        from .game import LeaderStrategy
        strategy = LeaderStrategy.pure(res.leader_action)
        obj = float(res.leader_cost)
        return "Optimal", obj, obj, 0.0, strategy, res.outcome, res.leader_cost
    if solver == "oracle-pure":
        res = ose_oracle_pure_leader(game, cap=cap, deadline=deadline)
        obj = float(res.leader_cost)
        return "Optimal", obj, obj, 0.0, res.strategy, res.outcome, res.leader_cost
    if solver == "oracle-mixed":
        res = ose_oracle_mixed_leader(game, cap=cap, deadline=deadline)
        obj = float(res.leader_cost)
        return "Optimal", obj, obj, 0.0, res.strategy, res.outcome, res.leader_cost
    if solver == "milp":
        model = build_milp_tclass(game) if game.kind == TCLASS_SSCG \
            else build_milp_general(game)
        sol = solve_milp(model, MilpParams(time_limit=time_limit))
        if sol.values is None:
            return sol.status, None, sol.lower_bound, sol.gap, None, None, None
        strategy, outcome, cost = extract_ose(model, sol, game)
        return sol.status, sol.objective, sol.lower_bound, sol.gap, strategy, outcome, cost
    raise ValueError(f"unknown solver {solver}")


def cmd_solve(args) -> int:
    try:
        game = load_game(Path(args.instance).read_text(encoding="utf-8"))
    except (OSError, GameFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = validate(game)
    if not report.ok:
        print("error: invalid instance:", "; ".join(report.violations), file=sys.stderr)
        return 2

    if args.solver == "export-lp":
        model = build_milp_tclass(game) if game.kind == TCLASS_SSCG \
            else build_milp_general(game)
        text = emit_lp_format(model)
        target = Path(args.out) if args.out else Path(args.instance).with_suffix(".lp")
        target.write_text(text, encoding="utf-8")
        print(target)
        return 0

    start = time.monotonic()
    try:
        status, obj, lb, gap, strategy, outcome, cost = _solve_one(
            game, args.solver, args.time_limit, args.cap)
    except SolveTimeout:
        print(json.dumps({"instance": args.instance, "solver": args.solver,
                          "status": "Timeout"}))
        return 2
    except (ValueError, EnumerationCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed_ms = (time.monotonic() - start) * 1000.0

    record = {
        "instance": args.instance,
        "solver": args.solver,
        "status": status,
        "objective": obj,
        "lower_bound": lb,
        "gap": gap,
        "time_ms": round(elapsed_ms, 3),
    }
    if strategy is not None:
        record["leader_strategy"] = {
            str(a): format_rational(p) for a, p in sorted(strategy.probs.items())}
        record["outcome"] = json.loads(save_solution(strategy, outcome, cost))["outcome"]
        if args.out:
            Path(args.out).write_text(save_solution(strategy, outcome, cost),
                                      encoding="utf-8")
    print(json.dumps(record))
    return 0


def cmd_verify(args) -> int:
    try:
        game = load_game(Path(args.instance).read_text(encoding="utf-8"))
        strategy, outcome, claimed = load_solution(
            Path(args.solution).read_text(encoding="utf-8"))
    except (OSError, GameFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    failures = []
    report = validate(game)
    if not report.ok:
        failures.extend(f"instance: {v}" for v in report.violations)
    failures.extend(strategy.check(game, tol=args.tol))
    failures.extend(outcome_violations(game, outcome))
    if not failures:
        ok, witness = is_nash(game, strategy, outcome, tol=args.tol)
        if not ok:
            failures.append(
                f"not an equilibrium: player {witness.player} moves "
                f"{witness.current_action}->{witness.improving_action} "
                f"({witness.current_cost} -> {witness.deviated_cost})")
        actual = leader_cost(game, strategy, outcome)
        if abs(float(actual) - float(claimed)) > args.tol:
            failures.append(f"cost mismatch: claimed {claimed}, recomputed {actual}")
    if failures:
        for f in failures:
            print(f"FAIL {f}")
        return 1
    print("PASS")
    return 0


def cmd_bench(args) -> int:
    paths = sorted(Path(args.directory).glob("*.json"))
    if not paths:
        print(f"error: no instances in {args.directory}", file=sys.stderr)
        return 2
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in SOLVERS or s == "export-lp":
            print(f"error: unknown bench solver {s}", file=sys.stderr)
            return 2

    rows = []
    for path in paths:
        meta_common = {"instance": path.name}
        try:
            game = load_game(path.read_text(encoding="utf-8"))
            bad = validate(game)
            if not bad.ok:
                raise GameFormatError("; ".join(bad.violations))
        except (OSError, GameFormatError) as exc:
            print(f"warning: skipping {path.name}: {exc}", file=sys.stderr)
            for solver in solvers:
                rows.append({**meta_common, "solver": solver, "status": "Error"})
            continue
        info = {
            "kind": game.kind,
            "r": game.resource_count,
            "n": game.n_players,
            "T": len(game.classes) if game.kind == TCLASS_SSCG else "",
            "seed": game.metadata.get("seed", ""),
        }
        for solver in solvers:
            start = time.monotonic()
            try:
                status, obj, lb, gap, _, _, _ = _solve_one(
                    game, solver, args.time_limit, args.cap)
            except SolveTimeout:
                status, obj, lb, gap = "Timeout", None, None, None
            except (ValueError, EnumerationCapError) as exc:
                print(f"warning: {path.name}/{solver}: {exc}", file=sys.stderr)
                rows.append({**meta_common, **info, "solver": solver, "status": "Error"})
                continue
            elapsed_ms = (time.monotonic() - start) * 1000.0
            rows.append({
                **meta_common, **info,
                "solver": solver,
                "status": status,
                "objective": "" if obj is None else repr(obj),
                "lower_bound": "" if lb is None else repr(lb),
                "gap": "" if gap is None else repr(gap),
                "time_ms": round(elapsed_ms, 3),
            })

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, restval="")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in CSV_COLUMNS})
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)

    _print_summary(rows)
    return 0


def _print_summary(rows) -> None:
    groups: dict = {}
    for row in rows:
        key = (row.get("kind", ""), row["solver"])
        groups.setdefault(key, []).append(row)
    print("# group summaries (kind, solver): mean_time_ms, solved_pct, mean_gap",
          file=sys.stderr)
    for (kind, solver), members in sorted(groups.items()):
        times = [m["time_ms"] for m in members if isinstance(m.get("time_ms"), (int, float))]
        solved = sum(1 for m in members if m.get("status") == "Optimal")
        gaps = [float(m["gap"]) for m in members if m.get("gap") not in ("", None)]
        mean_t = sum(times) / len(times) if times else math.nan
        mean_g = sum(gaps) / len(gaps) if gaps else math.nan
        print(f"# {kind or '?'},{solver}: {mean_t:.1f} ms, "
              f"{100.0 * solved / len(members):.0f}% solved, gap {mean_g:.4f}",
              file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scgsolve",
        description="Stackelberg congestion game solvers and instance tools")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instance files")
    gen.add_argument("family", choices=["tclass", "scg", "3sat-hard", "kpart-hard"])
    gen.add_argument("--r", type=int, default=10)
    gen.add_argument("--T", type=int, default=1)
    gen.add_argument("--nt", type=int, default=5)
    gen.add_argument("--n", type=int, default=10)
    gen.add_argument("--action-size", type=int, default=2)
    gen.add_argument("--actions-per-player", type=int, default=None)
    gen.add_argument("--cost-max", type=int, default=None)
    gen.add_argument("--monotone", action="store_true")
    gen.add_argument("--vars", type=int, default=4)
    gen.add_argument("--ratio", type=float, default=4.26)
    gen.add_argument("--epsilon", default="1/4")
    gen.add_argument("--inapprox", action="store_true",
                     help="use the exponentially small epsilon")
    gen.add_argument("--size", type=int, default=20)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", default=None)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("instance")
    solve.add_argument("--solver", choices=SOLVERS, required=True)
    solve.add_argument("--time-limit", type=float, default=None)
    solve.add_argument("--gap-tol", type=float, default=1e-9)
    solve.add_argument("--cap", type=int, default=10**7)
    solve.add_argument("--out", default=None,
                       help="write the solution JSON (or LP file for export-lp)")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="re-check a claimed solution")
    verify.add_argument("instance")
    verify.add_argument("solution")
    verify.add_argument("--tol", type=float, default=1e-6)
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="solve a directory of instances to CSV")
    bench.add_argument("directory")
    bench.add_argument("--solvers", default="milp")
    bench.add_argument("--time-limit", type=float, default=3600.0)
    bench.add_argument("--cap", type=int, default=10**7)
    bench.add_argument("--out", default=None)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 2


if __name__ == "__main__":
    sys.exit(main())
