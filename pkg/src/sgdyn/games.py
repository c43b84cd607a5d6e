"""Strategic-form and stochastic game models, validation, reachability and I/O."""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PROB_TOL = 1e-9
ZERO_SUM_TOL = 1e-9
TRANSITION_FLOOR = 0.01


class GameError(Exception):
    """Base class for game construction and I/O errors."""


class GameStructureError(GameError):
    """Tensor shapes are inconsistent with the declared state/action counts."""


class GameParseError(GameError):
    """A game document could not be parsed; ``location`` names the line or field."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class GameValidationError(GameError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid game: " + "; ".join(str(v) for v in report.violations))


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StrategicFormGame:
    """Two-player matrix game; ``payoffs[i][a1, a2]`` is player i's utility."""

    payoffs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.payoffs)
        if p.ndim != 3 or p.shape[0] != 2:
            raise GameStructureError(f"payoffs must have shape (2, |A1|, |A2|), got {p.shape}")
        if p.shape[1] < 1 or p.shape[2] < 1:
            raise GameStructureError("action counts must be positive")
        if not np.all(np.isfinite(p)):
            raise GameError("payoff entries must be finite")
        object.__setattr__(self, "payoffs", p)

    @classmethod
    def zero_sum(cls, matrix) -> "StrategicFormGame":
        m = np.asarray(matrix, dtype=float)
        return cls(np.stack([m, -m]))

    @property
    def action_counts(self) -> tuple[int, int]:
        return int(self.payoffs.shape[1]), int(self.payoffs.shape[2])

    @property
    def is_zero_sum(self) -> bool:
        return float(np.max(np.abs(self.payoffs[0] + self.payoffs[1]))) <= ZERO_SUM_TOL


@dataclass(frozen=True)
class StochasticGame:
    """Finite two-player discounted stochastic game.

    ``payoffs`` has shape (2, S, A1, A2) and ``transitions`` has shape
    (S, A1, A2, S) with ``transitions[s, a1, a2, s2] = p(s2 | s, a1, a2)``.
    Construction checks shapes only; call :func:`validate_game` for the
    probabilistic invariants.
    """

    payoffs: np.ndarray
    transitions: np.ndarray
    discount: float
    initial: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        r = _frozen(self.payoffs)
        p = _frozen(self.transitions)
        if r.ndim != 4 or r.shape[0] != 2:
            raise GameStructureError(f"payoffs must have shape (2, S, A1, A2), got {r.shape}")
        n_s, n1, n2 = r.shape[1:]
        if min(n_s, n1, n2) < 1:
            raise GameStructureError("state and action counts must be positive")
        if p.shape != (n_s, n1, n2, n_s):
            raise GameStructureError(
                f"transitions must have shape {(n_s, n1, n2, n_s)}, got {p.shape}")
        init = np.full(n_s, 1.0 / n_s) if self.initial is None else self.initial
        init = _frozen(init)
        if init.shape != (n_s,):
            raise GameStructureError(f"initial distribution must have shape ({n_s},), got {init.shape}")
        object.__setattr__(self, "payoffs", r)
        object.__setattr__(self, "transitions", p)
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "discount", float(self.discount))

    @classmethod
    def from_strategic(cls, game: StrategicFormGame, discount: float = 0.0) -> "StochasticGame":
        """Embed a matrix game as a single-state stochastic game."""
        n1, n2 = game.action_counts
        return cls(game.payoffs[:, None], np.ones((1, n1, n2, 1)), discount)

    @property
    def state_count(self) -> int:
        return int(self.payoffs.shape[1])

    @property
    def action_counts(self) -> tuple[int, int]:
        return int(self.payoffs.shape[2]), int(self.payoffs.shape[3])

    @property
    def is_zero_sum(self) -> bool:
        return float(np.max(np.abs(self.payoffs[0] + self.payoffs[1]))) <= ZERO_SUM_TOL

    def stage_game(self, s: int) -> StrategicFormGame:
        return StrategicFormGame(self.payoffs[:, s])

    def own_view(self, player: int) -> tuple[np.ndarray, np.ndarray]:
        """Rewards (S, own, opp) and transitions (S, own, opp, S) from one player's side."""
        if player == 0:
            return np.asarray(self.payoffs[0]), np.asarray(self.transitions)
        return (np.ascontiguousarray(self.payoffs[1].transpose(0, 2, 1)),
                np.ascontiguousarray(self.transitions.transpose(0, 2, 1, 3)))


@dataclass(frozen=True)
class Violation:
    message: str
    location: tuple | None = None

    def __str__(self):
        return f"{self.message} at {self.location}" if self.location is not None else self.message


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_game(game: StochasticGame) -> ValidationReport:
    """Collect every invariant violation of ``game`` (an empty report means valid)."""
    report = ValidationReport()
    add = report.violations.append
    if not (0.0 <= game.discount < 1.0) or not np.isfinite(game.discount):
        add(Violation(f"discount out of [0,1): {game.discount}"))
    for idx in zip(*np.nonzero(~np.isfinite(game.payoffs))):
        add(Violation("non-finite payoff", tuple(int(i) for i in idx)))
    p = game.transitions
    n_s, n1, n2 = game.state_count, *game.action_counts
    for s, a1, a2 in itertools.product(range(n_s), range(n1), range(n2)):
        row = p[s, a1, a2]
        if not np.all(np.isfinite(row)):
            add(Violation("non-finite transition probability", (s, a1, a2)))
            continue
        if np.any(row < 0):
            add(Violation("negative transition probability", (s, a1, a2)))
        total = float(row.sum())
        if abs(total - 1.0) > PROB_TOL:
            add(Violation(f"transition row sums to {total!r}", (s, a1, a2)))
    init = game.initial
    if not np.all(np.isfinite(init)) or np.any(init < 0) or abs(float(init.sum()) - 1.0) > PROB_TOL:
        add(Violation("initial distribution not on the simplex"))
    return report


def check_game(game: StochasticGame) -> StochasticGame:
    report = validate_game(game)
    if not report.ok:
        raise GameValidationError(report)
    return game


class Reachability(enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CASE_III = "CaseIII"
    CASE_IV = "CaseIV"
    NOT_RECURRENT = "NotRecurrent"


@dataclass(frozen=True)
class ReachabilityClass:
    case_i: bool
    case_ii: bool
    case_iii: bool
    case_iv: bool

    @property
    def label(self) -> Reachability:
        if self.case_i:
            return Reachability.CASE_I
        if self.case_ii:
            return Reachability.CASE_II
        if self.case_iii:
            return Reachability.CASE_III
        if self.case_iv:
            return Reachability.CASE_IV
        return Reachability.NOT_RECURRENT

    def satisfies(self, case: Reachability | str) -> bool:
        case = Reachability(case)
        if case is Reachability.NOT_RECURRENT:
            return not self.case_iv
        return {
            Reachability.CASE_I: self.case_i,
            Reachability.CASE_II: self.case_ii,
            Reachability.CASE_III: self.case_iii,
            Reachability.CASE_IV: self.case_iv,
        }[case]


def _strongly_connected(adj: np.ndarray) -> bool:
    # transitive closure; |S| is small
    reach = adj.copy()
    np.fill_diagonal(reach, True)
    for k in range(len(reach)):
        reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
    return bool(reach.all())


def classify_reachability(game: StochasticGame) -> ReachabilityClass:
    n_s = game.state_count
    p = game.transitions.reshape(n_s, -1, n_s)  # (s, joint action, s')
    positive = p > 0
    return ReachabilityClass(
        case_i=bool(positive.all()),
        case_ii=bool(positive.any(axis=1).all()),
        case_iii=_strongly_connected(positive.all(axis=1)),
        case_iv=_strongly_connected(positive.any(axis=1)),
    )


@dataclass(frozen=True)
class GeneratorSpec:
    states: int
    actions: tuple[int, int] = (2, 2)
    discount: float = 0.5
    payoff_range: tuple[float, float] = (-1.0, 1.0)
    reachability: str = "CaseI"

    def __post_init__(self):
        if self.states < 1 or min(self.actions) < 1:
            raise ValueError("state and action counts must be positive")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount out of [0,1)")
        lo, hi = self.payoff_range
        if not lo <= hi:
            raise ValueError("payoff_range must satisfy low <= high")
        if Reachability(self.reachability) not in (Reachability.CASE_I, Reachability.CASE_II):
            raise ValueError("generator supports reachability CaseI or CaseII only")


def generate_game(spec: GeneratorSpec, seed: int) -> StochasticGame:
    """Random zero-sum game satisfying ``spec.reachability``; deterministic in (spec, seed)."""
    rng = np.random.default_rng(seed)
    n_s = spec.states
    n1, n2 = spec.actions
    lo, hi = spec.payoff_range
    r1 = rng.uniform(lo, hi, size=(n_s, n1, n2))
    weights = TRANSITION_FLOOR + rng.random((n_s, n1, n2, n_s))
    if Reachability(spec.reachability) is Reachability.CASE_II and n_s > 1:
        mask = rng.random(weights.shape) < 0.5
        flat = mask.reshape(n_s, n1 * n2, n_s)
        for s, s2 in itertools.product(range(n_s), range(n_s)):
            if not flat[s, :, s2].any():
                flat[s, rng.integers(n1 * n2), s2] = True
        for s, a in itertools.product(range(n_s), range(n1 * n2)):
            if not flat[s, a].any():
                flat[s, a, rng.integers(n_s)] = True
        weights = np.where(flat.reshape(weights.shape), weights, 0.0)
    transitions = weights / weights.sum(axis=-1, keepdims=True)
    meta = {"generator": {"states": n_s, "actions": [n1, n2], "discount": spec.discount,
                          "payoff_range": [lo, hi], "reachability": spec.reachability,
                          "seed": seed}}
    game = StochasticGame(np.stack([r1, -r1]), transitions, spec.discount, meta=meta)
    return check_game(game)


def builtin_game(name: str, discount: float = 0.0, seed: int = 0) -> StochasticGame:
    """Named games: ``matching-pennies``, ``rps`` and ``random-zs[:S[:A1xA2]]``.

    Any ``:gamma=<float>`` or ``:seed=<int>`` segment overrides the keyword
    arguments, so ``random-zs:3:2x2:gamma=0.7:seed=4`` names one game exactly.
    """
    parts = []
    for part in name.split(":"):
        key, eq, value = part.partition("=")
        if not eq:
            parts.append(part)
        elif key == "gamma":
            discount = float(value)
        elif key == "seed":
            seed = int(value)
        else:
            raise KeyError(f"unknown builtin game option {key!r}")
    base, args = parts[0], parts[1:]
    if base == "matching-pennies" and not args:
        return StochasticGame.from_strategic(StrategicFormGame.zero_sum([[1, -1], [-1, 1]]), discount)
    if base == "rps" and not args:
        rps = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]
        return StochasticGame.from_strategic(StrategicFormGame.zero_sum(rps), discount)
    if base == "random-zs" and len(args) <= 2:
        states = int(args[0]) if args else 3
        actions = tuple(int(x) for x in args[1].split("x")) if len(args) > 1 else (2, 2)
        spec = GeneratorSpec(states, actions, discount if discount else 0.5)
        return generate_game(spec, seed)
    raise KeyError(f"unknown builtin game {name!r}")


_REQUIRED = ("states", "actions", "gamma", "payoffs", "transitions")


def save_game(game: StochasticGame) -> str:
    doc: dict[str, Any] = {
        "states": game.state_count,
        "actions": list(game.action_counts),
        "gamma": game.discount,
        "initial": game.initial.tolist(),
        "payoffs": game.payoffs.tolist(),
        "transitions": game.transitions.tolist(),
        "meta": game.meta,
    }
    return json.dumps(doc, indent=1) + "\n"


def load_game(text: str) -> StochasticGame:
    """Parse a game document, raising GameParseError or GameValidationError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise GameParseError("document must be a JSON object", "line 1")
    for key in _REQUIRED:
        if key not in doc:
            raise GameParseError("missing required field", key)

    def as_array(key, ndim):
        try:
            arr = np.array(doc[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise GameParseError(f"not a rectangular numeric array ({exc})", key) from exc
        if arr.ndim != ndim:
            raise GameParseError(f"expected {ndim}-dimensional array, got {arr.ndim}", key)
        return arr

    try:
        n_s = int(doc["states"])
        n1, n2 = (int(x) for x in doc["actions"])
    except (TypeError, ValueError) as exc:
        raise GameParseError(str(exc), "states/actions") from exc
    if not isinstance(doc["gamma"], (int, float)):
        raise GameParseError("must be a number", "gamma")
    payoffs = as_array("payoffs", 4)
    transitions = as_array("transitions", 4)
    if payoffs.shape != (2, n_s, n1, n2):
        raise GameParseError(f"shape {payoffs.shape} does not match (2, {n_s}, {n1}, {n2})", "payoffs")
    if transitions.shape != (n_s, n1, n2, n_s):
        raise GameParseError(
            f"shape {transitions.shape} does not match ({n_s}, {n1}, {n2}, {n_s})", "transitions")
    initial = None
    if doc.get("initial") is not None:
        initial = as_array("initial", 1)
        if initial.shape != (n_s,):
            raise GameParseError(f"expected {n_s} entries", "initial")
    meta = doc.get("meta") or {}
    if not isinstance(meta, dict):
        raise GameParseError("must be an object", "meta")
    game = StochasticGame(payoffs, transitions, float(doc["gamma"]), initial, meta)
    return check_game(game)
