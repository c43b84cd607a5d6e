"""Seeded simulation of two learning agents in a stochastic game."""

from __future__ import annotations

import io
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import DiagnosticSnapshot, check_lambda, default_lambda, take_snapshot, theorem_bounds
from .dynamics import AgentSpec, make_observation
from .games import StochasticGame, check_game
from .oracles import DEFAULT_TOL, EquilibriumSolution, shapley_iterate

log = logging.getLogger(__name__)

TRACE_HEADER = "k,state,a1,a2,r1,r2"
SNAPSHOT_HEADER = "k,metric,player,state,value"


def inverse_cdf(row, u: float) -> int:
    """Index of the first cumulative probability exceeding ``u`` in stored row order."""
    idx = int(np.searchsorted(np.cumsum(row), u, side="right"))
    return min(idx, len(row) - 1)


def sample_transition(game: StochasticGame, s: int, a1: int, a2: int, rng: np.random.Generator) -> int:
    """Next state drawn from ``p(.|s, a1, a2)`` with exactly one uniform draw."""
    return inverse_cdf(game.transitions[s, a1, a2], rng.random())


@dataclass
class ExperimentConfig:
    game: StochasticGame
    agents: tuple[AgentSpec, AgentSpec]
    horizon: int
    seed: int = 0
    cadence: int = 1000
    tolerance: float = DEFAULT_TOL
    lam: float | None = None
    game_ref: str = "<inline>"

    def validate(self) -> None:
        check_game(self.game)
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.cadence < 1:
            raise ValueError("cadence must be at least 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.lam is not None:
            check_lambda(self.lam, self.game.discount)
        for spec in self.agents:
            spec.check()

    @property
    def lambda_(self) -> float:
        return default_lambda(self.game.discount) if self.lam is None else self.lam

    def echo(self) -> dict:
        return {
            "game": self.game_ref,
            "agents": [{k: v for k, v in asdict(a).items() if v is not None} for a in self.agents],
            "horizon": self.horizon,
            "seed": self.seed,
            "cadence": self.cadence,
            "tolerance": self.tolerance,
            "lambda": self.lambda_,
        }


@dataclass
class ExperimentTrace:
    states: np.ndarray
    actions: np.ndarray  # (K, 2)
    rewards: np.ndarray  # (K, 2)
    snapshots: list[DiagnosticSnapshot]
    summary: dict
    agents: tuple = field(repr=False, default=())

    def __len__(self):
        return len(self.states)


def discounted_return(trace: ExperimentTrace, player: int, discount: float) -> float:
    r = trace.rewards[:, player]
    return float(np.sum(r * discount ** np.arange(len(r))))


def _spawn(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    env, a1, a2 = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(env), np.random.default_rng(a1), np.random.default_rng(a2)


def run(config: ExperimentConfig, oracle: EquilibriumSolution | None = None) -> ExperimentTrace:
    """Play ``config.horizon`` steps and record the trace with periodic diagnostics."""
    config.validate()
    game = config.game
    env_rng, rng1, rng2 = _spawn(config.seed)
    agents = (config.agents[0].build(game, 0, rng1), config.agents[1].build(game, 1, rng2))
    levels = (config.agents[0].observation_level, config.agents[1].observation_level)
    if oracle is None and game.is_zero_sum:
        oracle = shapley_iterate(game, config.tolerance)
    lam = config.lambda_

    K = config.horizon
    states = np.empty(K, dtype=np.int64)
    actions = np.empty((K, 2), dtype=np.int64)
    rewards = np.empty((K, 2))
    cum = np.cumsum(game.transitions, axis=-1)
    n_last = game.state_count - 1
    R1 = game.payoffs[0].tolist()
    R2 = game.payoffs[1].tolist()
    ag1, ag2 = agents
    lv1, lv2 = levels
    snapshots = []

    s = inverse_cdf(game.initial, env_rng.random())
    for k in range(K):
        a1 = ag1.act(s)
        a2 = ag2.act(s)
        s2 = min(int(np.searchsorted(cum[s, a1, a2], env_rng.random(), side="right")), n_last)
        r1 = R1[s][a1][a2]
        r2 = R2[s][a1][a2]
        states[k] = s
        actions[k] = a1, a2
        rewards[k] = r1, r2
        ag1.observe(make_observation(lv1, s, a1, a2, r1, s2))
        ag2.observe(make_observation(lv2, s, a2, a1, r2, s2))
        s = s2
        if (k + 1) % config.cadence == 0 or k + 1 == K:
            snapshots.append(take_snapshot(game, agents, k + 1, oracle, lam, config.tolerance))

    final = snapshots[-1]
    bounds = _bounds_for(config, lam)
    final.bounds = bounds
    summary = {
        "config": config.echo(),
        "seed": config.seed,
        "final": final.summary(),
        "bounds": bounds,
        "visits": [a.visits.tolist() for a in agents],
    }
    if oracle is not None:
        summary["oracle"] = {"values": oracle.values[0].tolist(), "residual": oracle.residual}
    log.debug("run finished: %s", summary["final"])
    return ExperimentTrace(states, actions, rewards, snapshots, summary, agents)


def _bounds_for(config: ExperimentConfig, lam: float) -> dict:
    game = config.game
    kinds = {a.dynamics for a in config.agents}
    eps = None
    if "ttfp-mf" in kinds:
        eps = next(a.epsilon for a in config.agents if a.dynamics == "ttfp-mf")
        eps = 0.05 if eps is None else eps
    tau = None
    if "decentralized-q" in kinds:
        tau = next(a.tau for a in config.agents if a.dynamics == "decentralized-q")
    b = theorem_bounds(game, eps, tau, lam)
    out = {"D": b.D, "lambda": b.lam}
    if eps is not None:
        out.update(bound_mf_v=b.model_free_v_bound, bound_mf_q=b.model_free_Q_bound)
    if tau is not None:
        out.update(bound_min_v=b.minimal_v_bound, bound_min_pi=b.minimal_strategy_bound,
                   bound_min_v_literal=b.minimal_v_bound_literal,
                   bound_min_pi_literal=b.minimal_strategy_bound_literal)
    return out


def trace_csv(trace: ExperimentTrace) -> str:
    buf = io.StringIO()
    buf.write(TRACE_HEADER + "\n")
    a, r = trace.actions.tolist(), trace.rewards.tolist()
    for k, s in enumerate(trace.states.tolist()):
        buf.write(f"{k},{s},{a[k][0]},{a[k][1]},{r[k][0]!r},{r[k][1]!r}\n")
    return buf.getvalue()


def snapshot_csv(trace: ExperimentTrace) -> str:
    buf = io.StringIO()
    buf.write(SNAPSHOT_HEADER + "\n")
    for snap in trace.snapshots:
        for k, metric, player, state, value in snap.rows():
            buf.write(f"{k},{metric},{player},{state},{value!r}\n")
    return buf.getvalue()


def summary_json(trace: ExperimentTrace) -> str:
    return json.dumps(trace.summary, indent=2, sort_keys=True) + "\n"
