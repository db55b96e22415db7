"""Game data model: cost tables, player structure, validation, JSON (de)serialization.

Costs are exact rationals (:class:`fractions.Fraction`), so equality tests on
solver outputs never suffer float drift; float views are derived where the LP
machinery needs them.  All index sets (resources, actions, followers, classes)
are dense 0-based integers, and every resource set is kept as a sorted tuple
for deterministic iteration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

GENERAL_SCG = "general_scg"
TCLASS_SSCG = "tclass_sscg"

RationalLike = Union[Fraction, int, str, float]


class GameFormatError(ValueError):
    """Raised when instance text cannot be parsed into a valid structure."""


class CostRangeError(LookupError):
    """Raised when a cost lookup exceeds the materialized table range."""


def to_fraction(value: RationalLike, where: str = "value") -> Fraction:
    """Convert a JSON-ish entry (int, float, Fraction, or "p/q" string) to Fraction."""
    if isinstance(value, bool):
        raise GameFormatError(f"{where}: expected a rational, got a bool")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise GameFormatError(f"{where}: non-finite number")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GameFormatError(f"{where}: malformed rational {value!r}") from exc
    raise GameFormatError(f"{where}: cannot interpret {type(value).__name__} as rational")


def format_rational(value: Fraction):
    """Render a Fraction as a JSON-friendly entry: int when integral, else "p/q"."""
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class CostTable:
    """Per-resource cost rows ``rows[i][x-1] == c_i(x)``; ``c_i(0) == 0`` implicitly.

    Rows must be long enough for every congestion the game can induce plus two
    extra slots, so ``c(x+2)`` lookups in expected-cost expressions stay in range.
    """

    rows: tuple[tuple[Fraction, ...], ...]
    monotone: bool = False

    def cost(self, resource: int, congestion: int) -> Fraction:
        if congestion == 0:
            return Fraction(0)
        row = self.rows[resource]
        if congestion < 0 or congestion > len(row):
            raise CostRangeError(
                f"resource {resource}: congestion {congestion} outside table "
                f"range [0, {len(row)}]"
            )
        return row[congestion - 1]

    def row_length(self, resource: int) -> int:
        return len(self.rows[resource])

    def shifted(self, resources: Iterable[int]) -> "CostTable":
        """Return a view-table with ``c_i(x) <- c_i(x+1)`` on the given resources."""
        bump = set(resources)
        rows = tuple(
            row[1:] if i in bump else row for i, row in enumerate(self.rows)
        )
        return CostTable(rows=rows, monotone=self.monotone)

    @staticmethod
    def from_lists(rows: Sequence[Sequence[RationalLike]], monotone: bool = False) -> "CostTable":
        conv = tuple(
            tuple(to_fraction(v, f"cost row {i}, entry {j}") for j, v in enumerate(row))
            for i, row in enumerate(rows)
        )
        return CostTable(rows=conv, monotone=monotone)


@dataclass(frozen=True)
class FollowerSpec:
    """Action list of one follower in a general game (non-empty resource subsets)."""

    actions: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ClassSpec:
    """One follower class of a singleton game: player count and usable resources."""

    n: int
    resources: tuple[int, ...]


@dataclass(frozen=True)
class Game:
    """A congestion game with one committing leader.

    ``kind`` is either :data:`GENERAL_SCG` (followers carry explicit action
    lists of resource subsets) or :data:`TCLASS_SSCG` (followers are grouped
    into classes with singleton actions, identified with resources).
    """

    kind: str
    resource_count: int
    leader_actions: tuple[tuple[int, ...], ...]
    follower_costs: CostTable
    leader_costs: CostTable
    followers: tuple[FollowerSpec, ...] = ()
    classes: tuple[ClassSpec, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def follower_count(self) -> int:
        if self.kind == TCLASS_SSCG:
            return sum(c.n for c in self.classes)
        return len(self.followers)

    @property
    def n_players(self) -> int:
        return self.follower_count + 1

    def follower_action_resources(self, follower: int, action: int) -> tuple[int, ...]:
        return self.followers[follower].actions[action]

    def max_follower_congestion(self, resource: int) -> int:
        """Largest number of followers that can simultaneously use ``resource``."""
        if self.kind == TCLASS_SSCG:
            return sum(c.n for c in self.classes if resource in c.resources)
        return sum(
            1
            for f in self.followers
            if any(resource in a for a in f.actions)
        )

    def is_symmetric_singleton_followers(self) -> bool:
        """True when all followers share one common set of singleton actions."""
        if self.kind == TCLASS_SSCG:
            return len(self.classes) == 1
        if not self.followers:
            return False
        first = self.followers[0].actions
        if any(len(a) != 1 for a in first):
            return False
        return all(f.actions == first for f in self.followers[1:])


@dataclass(frozen=True)
class LeaderStrategy:
    """Distribution over leader action indices; absent indices have probability 0."""

    probs: Mapping[int, Fraction]

    @staticmethod
    def pure(action: int) -> "LeaderStrategy":
        return LeaderStrategy({action: Fraction(1)})

    def probability(self, action: int) -> Fraction:
        return self.probs.get(action, Fraction(0))

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(a for a, p in self.probs.items() if p != 0))

    def resource_marginals(self, game: Game) -> tuple[Fraction, ...]:
        """Per-resource selection probability: sum over leader actions containing i."""
        out = [Fraction(0)] * game.resource_count
        for action, p in self.probs.items():
            if p == 0:
                continue
            for i in game.leader_actions[action]:
                out[i] += p
        return tuple(out)

    def check(self, game: Game, tol: float = 0.0) -> list[str]:
        problems = []
        total = Fraction(0)
        for a, p in self.probs.items():
            if not (0 <= a < len(game.leader_actions)):
                problems.append(f"strategy: action index {a} out of range")
            if p < 0:
                problems.append(f"strategy: negative probability on action {a}")
            total += p
        off = abs(total - 1)
        if (off > Fraction(tol)) if tol else (off != 0):
            problems.append(f"strategy: probabilities sum to {total}, expected 1")
        return problems


@dataclass(frozen=True)
class Profile:
    """Per-follower chosen action indices (general games)."""

    actions: tuple[int, ...]


@dataclass(frozen=True)
class Configurations:
    """Per-class, per-resource follower counts (singleton class games)."""

    nu: tuple[tuple[int, ...], ...]

    def total(self) -> tuple[int, ...]:
        if not self.nu:
            return ()
        return tuple(sum(col) for col in zip(*self.nu))


FollowersOutcome = Union[Profile, Configurations]


def outcome_violations(game: Game, outcome: FollowersOutcome) -> list[str]:
    """All invariant violations of ``outcome`` relative to ``game`` (empty if valid)."""
    problems: list[str] = []
    if game.kind == TCLASS_SSCG:
        if not isinstance(outcome, Configurations):
            return [f"outcome: expected configurations for {game.kind}"]
        if len(outcome.nu) != len(game.classes):
            return [
                f"outcome: {len(outcome.nu)} class rows, game has {len(game.classes)}"
            ]
        for t, (row, cls) in enumerate(zip(outcome.nu, game.classes)):
            if len(row) != game.resource_count:
                problems.append(f"outcome class {t}: row length != resource count")
                continue
            if sum(row) != cls.n:
                problems.append(
                    f"outcome class {t}: places {sum(row)} players, expected {cls.n}"
                )
            for i, count in enumerate(row):
                if count < 0:
                    problems.append(f"outcome class {t}: negative count on resource {i}")
                if count > 0 and i not in cls.resources:
                    problems.append(
                        f"outcome class {t}: resource {i} not in the class action set"
                    )
    else:
        if not isinstance(outcome, Profile):
            return [f"outcome: expected an action profile for {game.kind}"]
        if len(outcome.actions) != len(game.followers):
            return ["outcome: profile length != follower count"]
        for p, a in enumerate(outcome.actions):
            if not (0 <= a < len(game.followers[p].actions)):
                problems.append(f"outcome follower {p}: action index {a} out of range")
    return problems


def congestion(game: Game, outcome: FollowersOutcome) -> tuple[int, ...]:
    """Total follower count per resource induced by ``outcome``."""
    if isinstance(outcome, Configurations):
        if outcome.nu:
            return outcome.total()
        return (0,) * game.resource_count
    nu = [0] * game.resource_count
    for p, a in enumerate(outcome.actions):
        for i in game.followers[p].actions[a]:
            nu[i] += 1
    return tuple(nu)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _check_action(action: Sequence[int], r: int, where: str, problems: list[str]) -> None:
    if len(action) == 0:
        problems.append(f"{where}: empty action")
    if len(set(action)) != len(action):
        problems.append(f"{where}: duplicate resources in action")
    if tuple(action) != tuple(sorted(action)):
        problems.append(f"{where}: resources not sorted")
    for i in action:
        if not (0 <= i < r):
            problems.append(f"{where}: resource {i} outside [0, {r})")


def validate(game: Game) -> ValidationReport:
    """Check every structural invariant; returns a report, never raises."""
    problems: list[str] = []
    r = game.resource_count
    if r <= 0:
        problems.append("game: resource_count must be positive")
    if game.kind not in (GENERAL_SCG, TCLASS_SSCG):
        problems.append(f"game: unknown kind {game.kind!r}")

    if not game.leader_actions:
        problems.append("leader: empty action set")
    for k, action in enumerate(game.leader_actions):
        _check_action(action, r, f"leader action {k}", problems)
        if game.kind == TCLASS_SSCG and len(action) != 1:
            problems.append(f"leader action {k}: singleton required")

    if game.kind == TCLASS_SSCG:
        if game.followers:
            problems.append("game: tclass_sscg must not carry follower specs")
        if not game.classes:
            problems.append("game: tclass_sscg needs at least one class")
        for t, cls in enumerate(game.classes):
            if cls.n < 1:
                problems.append(f"class {t}: player count {cls.n} < 1")
            _check_action(cls.resources, r, f"class {t} actions", problems)
    else:
        if game.classes:
            problems.append("game: general_scg must not carry class specs")
        for p, f in enumerate(game.followers):
            if not f.actions:
                problems.append(f"follower {p}: empty action set")
            for k, action in enumerate(f.actions):
                _check_action(action, r, f"follower {p} action {k}", problems)

    for name, table in (("follower_costs", game.follower_costs),
                        ("leader_costs", game.leader_costs)):
        if len(table.rows) != r:
            problems.append(f"{name}: {len(table.rows)} rows, expected {r}")
            continue
        for i in range(r):
            need = game.max_follower_congestion(i) + 2
            if table.row_length(i) < need:
                problems.append(
                    f"{name} resource {i}: cost table too short "
                    f"({table.row_length(i)} < {need})"
                )
            if table.monotone:
                row = table.rows[i]
                prev = Fraction(0)
                for x, v in enumerate(row, start=1):
                    if v < prev:
                        problems.append(
                            f"{name} resource {i}: monotone flag set but "
                            f"c({x}) < c({x - 1})"
                        )
                        break
                    prev = v
    return ValidationReport(tuple(problems))


# --- JSON instance format -------------------------------------------------

def _encode_table(table: CostTable) -> list:
    return [[format_rational(v) for v in row] for row in table.rows]


def _decode_table(obj, name: str, monotone: bool) -> CostTable:
    if not isinstance(obj, list) or not all(isinstance(row, list) for row in obj):
        raise GameFormatError(f"{name}: expected an array of arrays")
    rows = tuple(
        tuple(to_fraction(v, f"{name}[{i}][{j}]") for j, v in enumerate(row))
        for i, row in enumerate(obj)
    )
    return CostTable(rows=rows, monotone=monotone)


def _decode_action(obj, where: str) -> tuple[int, ...]:
    if not isinstance(obj, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in obj):
        raise GameFormatError(f"{where}: expected an array of resource indices")
    return tuple(sorted(obj))


def save_game(game: Game) -> str:
    """Serialize a game to the JSON instance format (UTF-8 text)."""
    doc: dict = {
        "kind": game.kind,
        "resources": game.resource_count,
        "leader_actions": [list(a) for a in game.leader_actions],
    }
    if game.kind == TCLASS_SSCG:
        doc["classes"] = [{"n": c.n, "actions": list(c.resources)} for c in game.classes]
    else:
        doc["followers"] = [
            {"actions": [list(a) for a in f.actions]} for f in game.followers
        ]
    doc["follower_costs"] = _encode_table(game.follower_costs)
    doc["leader_costs"] = _encode_table(game.leader_costs)
    doc["monotone"] = game.follower_costs.monotone and game.leader_costs.monotone
    if game.metadata:
        doc["metadata"] = game.metadata
    return json.dumps(doc, indent=2)


def load_game(text: str) -> Game:
    """Parse instance JSON; raises :class:`GameFormatError` with field diagnostics."""
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise GameFormatError("top level: expected a JSON object")

    kind = doc.get("kind")
    if kind not in (GENERAL_SCG, TCLASS_SSCG):
        raise GameFormatError(f"kind: expected {GENERAL_SCG!r} or {TCLASS_SSCG!r}, got {kind!r}")
    resources = doc.get("resources")
    if not isinstance(resources, int) or isinstance(resources, bool) or resources <= 0:
        raise GameFormatError("resources: expected a positive integer")

    raw_leader = doc.get("leader_actions")
    if not isinstance(raw_leader, list):
        raise GameFormatError("leader_actions: expected an array")
    leader_actions = tuple(
        _decode_action(a, f"leader_actions[{k}]") for k, a in enumerate(raw_leader)
    )

    followers: tuple[FollowerSpec, ...] = ()
    classes: tuple[ClassSpec, ...] = ()
    if kind == TCLASS_SSCG:
        raw_classes = doc.get("classes")
        if not isinstance(raw_classes, list) or not raw_classes:
            raise GameFormatError("classes: expected a non-empty array")
        built = []
        for t, c in enumerate(raw_classes):
            if not isinstance(c, dict):
                raise GameFormatError(f"classes[{t}]: expected an object")
            n = c.get("n")
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise GameFormatError(f"classes[{t}].n: expected a positive integer")
            built.append(ClassSpec(n=n, resources=_decode_action(c.get("actions"), f"classes[{t}].actions")))
        classes = tuple(built)
    else:
        raw_followers = doc.get("followers")
        if not isinstance(raw_followers, list):
            raise GameFormatError("followers: expected an array")
        built_f = []
        for p, f in enumerate(raw_followers):
            if not isinstance(f, dict) or not isinstance(f.get("actions"), list):
                raise GameFormatError(f"followers[{p}]: expected an object with an actions array")
            built_f.append(FollowerSpec(actions=tuple(
                _decode_action(a, f"followers[{p}].actions[{k}]")
                for k, a in enumerate(f["actions"])
            )))
        followers = tuple(built_f)

    monotone = bool(doc.get("monotone", False))
    follower_costs = _decode_table(doc.get("follower_costs"), "follower_costs", monotone)
    leader_costs = _decode_table(doc.get("leader_costs"), "leader_costs", monotone)
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise GameFormatError("metadata: expected an object")

    return Game(
        kind=kind,
        resource_count=resources,
        leader_actions=leader_actions,
        follower_costs=follower_costs,
        leader_costs=leader_costs,
        followers=followers,
        classes=classes,
        metadata=metadata,
    )


# --- solution files (CLI verify / solve --out) -----------------------------

def save_solution(strategy: LeaderStrategy, outcome: FollowersOutcome,
                  leader_cost: Fraction) -> str:
    doc: dict = {
        "leader_strategy": {str(a): format_rational(p) for a, p in sorted(strategy.probs.items()) if p != 0},
    }
    if isinstance(outcome, Configurations):
        doc["outcome"] = {"type": "configurations", "nu": [list(row) for row in outcome.nu]}
    else:
        doc["outcome"] = {"type": "profile", "actions": list(outcome.actions)}
    doc["leader_cost"] = format_rational(leader_cost)
    return json.dumps(doc, indent=2)


def load_solution(text: str) -> tuple[LeaderStrategy, FollowersOutcome, Fraction]:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    raw = doc.get("leader_strategy")
    if not isinstance(raw, dict):
        raise GameFormatError("leader_strategy: expected an object")
    probs = {}
    for k, v in raw.items():
        try:
            idx = int(k)
        except ValueError as exc:
            raise GameFormatError(f"leader_strategy: bad action index {k!r}") from exc
        probs[idx] = to_fraction(v, f"leader_strategy[{k}]")
    strategy = LeaderStrategy(probs)

    out = doc.get("outcome")
    if not isinstance(out, dict):
        raise GameFormatError("outcome: expected an object")
    outcome: FollowersOutcome
    if out.get("type") == "configurations":
        nu = out.get("nu")
        if not isinstance(nu, list):
            raise GameFormatError("outcome.nu: expected an array")
        outcome = Configurations(tuple(tuple(int(x) for x in row) for row in nu))
    elif out.get("type") == "profile":
        actions = out.get("actions")
        if not isinstance(actions, list):
            raise GameFormatError("outcome.actions: expected an array")
        outcome = Profile(tuple(int(a) for a in actions))
    else:
        raise GameFormatError(f"outcome.type: unknown variant {out.get('type')!r}")

    cost = to_fraction(doc.get("leader_cost"), "leader_cost")
    return strategy, outcome, cost
