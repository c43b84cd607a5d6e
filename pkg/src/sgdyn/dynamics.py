"""Learning rules for two-player stochastic games and agents that run them.

Every update function mutates the belief arrays it is given in place and
returns them. Q-beliefs are stored from the learner's own side: index order is
(state, own action, opponent action) regardless of which player the learner is.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .games import StochasticGame, StrategicFormGame
from .matrix import TIE_TOL, best_response, solve_matrix_game

Schedule = Callable[[int], float]


@dataclass(frozen=True)
class StepSchedule:
    """Power step size ``1 / (c + 1) ** exponent``."""

    exponent: float
    kind: str = "power"

    def __post_init__(self):
        if self.kind != "power":
            raise ValueError(f"unsupported schedule kind {self.kind!r}")
        if not 0.0 < self.exponent <= 1.0:
            raise ValueError(f"schedule exponent must lie in (0, 1], got {self.exponent}")

    def __call__(self, c: int) -> float:
        return 1.0 / (c + 1) ** self.exponent


def validate_two_timescale(rho_alpha: float, rho_beta: float) -> None:
    """Raise ValueError naming the violated part of ``1/2 < rho_alpha < rho_beta <= 1``."""
    if not rho_alpha > 0.5:
        raise ValueError(f"step exponents violate 1/2 < ρ_α (rho_alpha={rho_alpha})")
    if not rho_alpha < rho_beta:
        raise ValueError(f"step exponents violate ρ_α < ρ_β (rho_alpha={rho_alpha}, rho_beta={rho_beta})")
    if not rho_beta <= 1.0:
        raise ValueError(f"step exponents violate ρ_β ≤ 1 (rho_beta={rho_beta})")


@dataclass(frozen=True)
class TwoTimescale:
    """Fast (strategy) and slow (value) step sizes."""

    alpha: Schedule
    beta: Schedule

    @classmethod
    def power(cls, rho_alpha: float = 0.6, rho_beta: float = 1.0) -> "TwoTimescale":
        validate_two_timescale(rho_alpha, rho_beta)
        return cls(StepSchedule(rho_alpha), StepSchedule(rho_beta))


class ObservationLevel(enum.IntEnum):
    MINIMAL = 0
    MODEL_FREE = 1
    MODEL_BASED = 2

    @classmethod
    def parse(cls, name: str) -> "ObservationLevel":
        return {"minimal": cls.MINIMAL, "model-free": cls.MODEL_FREE,
                "model-based": cls.MODEL_BASED}[name]

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


class LevelViolation(RuntimeError):
    """An agent needed information its observation level does not provide."""


@dataclass(frozen=True, slots=True)
class MinimalObservation:
    state: int
    action: int
    reward: float
    next_state: int


@dataclass(frozen=True, slots=True)
class ModelFreeObservation(MinimalObservation):
    opponent_action: int


def make_observation(level: ObservationLevel, s: int, own: int, opp: int, reward: float,
                     s_next: int) -> MinimalObservation:
    """Build the observation a player at ``level`` is entitled to; lower levels drop the opponent action."""
    if level >= ObservationLevel.MODEL_FREE:
        return ModelFreeObservation(s, own, reward, s_next, opp)
    return MinimalObservation(s, own, reward, s_next)


def _opponent_action(obs: MinimalObservation) -> int:
    try:
        return obs.opponent_action
    except AttributeError:
        raise LevelViolation("opponent action is not observable at this level") from None


@dataclass
class AgentBelief:
    """Internal state of one learner.

    ``pi_hat`` (S, n_opp) is the belief on the opponent's stationary strategy;
    ``Q_hat`` (S, n_own, n_opp) the joint-action Q-belief; ``q_hat`` (S, n_own)
    a local Q-belief; ``v_hat`` (S,) a value estimate.
    """

    state_visits: np.ndarray
    state_action_visits: np.ndarray
    pi_hat: np.ndarray | None = None
    Q_hat: np.ndarray | None = None
    q_hat: np.ndarray | None = None
    v_hat: np.ndarray | None = None

    @classmethod
    def joint(cls, n_states: int, n_own: int, n_opp: int) -> "AgentBelief":
        return cls(np.zeros(n_states, dtype=np.int64), np.zeros((n_states, n_own, n_opp), dtype=np.int64),
                   pi_hat=np.full((n_states, n_opp), 1.0 / n_opp),
                   Q_hat=np.zeros((n_states, n_own, n_opp)))

    @classmethod
    def local(cls, n_states: int, n_own: int, with_value: bool = False) -> "AgentBelief":
        return cls(np.zeros(n_states, dtype=np.int64), np.zeros((n_states, n_own), dtype=np.int64),
                   q_hat=np.zeros((n_states, n_own)),
                   v_hat=np.zeros(n_states) if with_value else None)

    def copy(self) -> "AgentBelief":
        def cp(a):
            return None if a is None else a.copy()
        return AgentBelief(self.state_visits.copy(), self.state_action_visits.copy(),
                           cp(self.pi_hat), cp(self.Q_hat), cp(self.q_hat), cp(self.v_hat))


@dataclass(frozen=True)
class OwnModel:
    """Rewards (S, own, opp) and transitions (S, own, opp, S) seen from one player."""

    rewards: np.ndarray
    transitions: np.ndarray
    discount: float

    @classmethod
    def of(cls, game: StochasticGame, player: int) -> "OwnModel":
        r, p = game.own_view(player)
        return cls(r, p, game.discount)


def _first_argmax(values: np.ndarray) -> int:
    best = values.max()
    return int(np.flatnonzero(values >= best - TIE_TOL)[0])


def _explore(u: float, epsilon: float, n: int) -> int | None:
    # one uniform draw decides both whether to explore and which action
    if u < epsilon:
        return min(int(u / epsilon * n), n - 1)
    return None


def _sample(probs: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(idx, len(probs) - 1)


# -- classical fictitious play (strategic form) ---------------------------------

def fp_observe(belief, opponent_action: int, k: int) -> np.ndarray:
    """Empirical-average belief update with step ``1/(k+1)``; returns a new vector."""
    belief = np.asarray(belief, dtype=float)
    if not 0 <= opponent_action < belief.shape[0]:
        raise IndexError(f"action {opponent_action} out of range for {belief.shape[0]} actions")
    step = 1.0 / (k + 1)
    out = belief * (1.0 - step)
    out[opponent_action] += step
    return out


def fp_act(belief, game: StrategicFormGame, player: int) -> int:
    side = "row" if player == 0 else "col"
    return best_response(game.payoffs[player], belief, side).chosen


@dataclass
class FictitiousPlayRun:
    exploitability: np.ndarray  # after each step, of the empirical beliefs
    row_belief: np.ndarray      # player 2's belief about player 1
    col_belief: np.ndarray      # player 1's belief about player 2
    actions: np.ndarray         # (K, 2)


def play_fictitious(game: StrategicFormGame, steps: int) -> FictitiousPlayRun:
    """Simultaneous classical fictitious play on a zero-sum matrix game.

    Same decisions as two ``FictitiousPlayAgent`` instances (uniform prior
    for the first move, lowest index on ties), but keeps the payoff vectors
    ``M @ counts`` incrementally so each step costs O(|A1| + |A2|).
    """
    if not game.is_zero_sum:
        raise ValueError("play_fictitious needs a zero-sum game")
    M = game.payoffs[0]
    n1, n2 = M.shape
    cols = M.T.tolist()           # cols[b] = M[:, b]
    rows = M.tolist()
    u1 = (M @ np.full(n2, 1.0 / n2)).tolist()   # player 1 payoffs against its belief
    w2 = (np.full(n1, 1.0 / n1) @ M).tolist()   # player 1 payoffs per column, against belief about 1
    c1, c2 = [0] * n1, [0] * n2
    expl = np.empty(steps)
    actions = np.empty((steps, 2), dtype=np.int64)
    tol = TIE_TOL
    for k in range(steps):
        scale = 1.0 if k == 0 else 1.0 / k
        best1 = max(u1) * scale
        a1 = next(i for i, v in enumerate(u1) if v * scale >= best1 - tol)
        best2 = -min(w2) * scale  # player 2 maximizes -M
        a2 = next(j for j, v in enumerate(w2) if -v * scale >= best2 - tol)
        if k == 0:
            u1, w2 = [0.0] * n1, [0.0] * n2
        c1[a1] += 1
        c2[a2] += 1
        col, row = cols[a2], rows[a1]
        u1 = [u + m for u, m in zip(u1, col)]
        w2 = [w + m for w, m in zip(w2, row)]
        expl[k] = (max(u1) - min(w2)) / (k + 1)
        actions[k] = a1, a2
    n = float(steps)
    return FictitiousPlayRun(expl, np.array(c1) / n, np.array(c2) / n, actions)


# -- two-timescale fictitious play ---------------------------------------------

def belief_values(belief: AgentBelief) -> np.ndarray:
    """``v(s) = max_own E_{opp ~ pi_hat(s)} Q_hat(s, own, opp)`` for every state."""
    return np.einsum("sab,sb->sa", belief.Q_hat, belief.pi_hat).max(axis=1)


def ttfp_act(belief: AgentBelief, s: int, epsilon: float = 0.0,
             rng: np.random.Generator | None = None) -> int:
    """Greedy reply to the opponent belief at ``s``; with ``rng`` one draw decides ε-exploration."""
    n_own = belief.Q_hat.shape[1]
    if rng is not None:
        explored = _explore(rng.random(), epsilon, n_own)
        if explored is not None:
            return explored
    return _first_argmax(belief.Q_hat[s] @ belief.pi_hat[s])


def _update_pi(belief: AgentBelief, s: int, opp: int, step: float) -> None:
    row = belief.pi_hat[s]
    row *= 1.0 - step
    row[opp] += step


def ttfp_observe_model_based(belief: AgentBelief, s: int, opponent_action: int,
                             model: OwnModel, steps: TwoTimescale,
                             own_action: int | None = None) -> AgentBelief:
    """Strategy belief at ``s`` first, then every joint-action Q entry at ``s`` toward the model backup."""
    c = int(belief.state_visits[s])
    _update_pi(belief, s, opponent_action, steps.alpha(c))
    v = belief_values(belief)
    target = model.rewards[s] + model.discount * (model.transitions[s] @ v)
    Q = belief.Q_hat[s]
    Q += steps.beta(c) * (target - Q)
    belief.state_visits[s] += 1
    if own_action is not None:
        belief.state_action_visits[s, own_action, opponent_action] += 1
    return belief


def ttfp_observe_model_free(belief: AgentBelief, obs: MinimalObservation, discount: float,
                            steps: TwoTimescale) -> AgentBelief:
    """Strategy belief at ``s``, then the realized joint action's Q entry toward ``r + γ v(s')``."""
    s, own, opp = obs.state, obs.action, _opponent_action(obs)
    c = int(belief.state_visits[s])
    c_sa = int(belief.state_action_visits[s, own, opp])
    _update_pi(belief, s, opp, steps.alpha(c))
    s2 = obs.next_state
    v_next = float((belief.Q_hat[s2] @ belief.pi_hat[s2]).max())
    q = belief.Q_hat[s, own, opp]
    belief.Q_hat[s, own, opp] = q + steps.beta(c_sa) * (obs.reward + discount * v_next - q)
    belief.state_visits[s] += 1
    belief.state_action_visits[s, own, opp] += 1
    return belief


# -- Q-learning and Minimax-Q ----------------------------------------------------

def q_learning_update(q: np.ndarray, s: int, a: int, r: float, s_next: int, discount: float,
                      beta: Schedule, counts: np.ndarray) -> np.ndarray:
    step = beta(int(counts[s, a]))
    q[s, a] += step * (r + discount * q[s_next].max() - q[s, a])
    counts[s, a] += 1
    return q


def minimax_q_update(Q: np.ndarray, s: int, own: int, opp: int, r: float, s_next: int,
                     discount: float, beta: Schedule, counts: np.ndarray,
                     next_value: float | None = None) -> np.ndarray:
    """Move ``Q[s, own, opp]`` toward ``r + γ val(Q[s_next])`` (own side maximizes rows).

    ``next_value`` may carry a cached ``val(Q[s_next])``.
    """
    step = beta(int(counts[s, own, opp]))
    if next_value is None:
        next_value = solve_matrix_game(Q[s_next]).value
    target = r + discount * next_value
    Q[s, own, opp] += step * (target - Q[s, own, opp])
    counts[s, own, opp] += 1
    return Q


# -- smoothed best responses and minimal-information learning ---------------------

def smoothed_best_response(q, tau: float) -> np.ndarray:
    """Logit choice probabilities ``exp(q/τ) / Σ exp(q/τ)``."""
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    z = np.asarray(q, dtype=float) / tau
    z = np.exp(z - z.max())
    return z / z.sum()


def _clamped_step(step: float, prob: float) -> float:
    if not prob > 0:
        raise ValueError(f"importance weight needs a positive action probability, got {prob}")
    return min(1.0, step / prob)


def individual_q_update(q: np.ndarray, action: int, reward: float, br, alpha: Schedule,
                        k: int) -> np.ndarray:
    """Importance-weighted update of the taken action only; weight clamped at 1."""
    w = _clamped_step(alpha(k), float(br[action]))
    q[action] = (1.0 - w) * q[action] + w * reward
    return q


def averaged_strategy_update(pi_bar_s: np.ndarray, br_s: np.ndarray, step: float,
                             is_current_state: bool = True) -> np.ndarray:
    if is_current_state:
        pi_bar_s += step * (br_s - pi_bar_s)
    return pi_bar_s


def decentralized_q_observe(belief: AgentBelief, obs: MinimalObservation, br_s: np.ndarray,
                            discount: float, steps: TwoTimescale) -> AgentBelief:
    """Local Q update at the taken action, then the slow value update from the pre-update q."""
    s, a = obs.state, obs.action
    c = int(belief.state_visits[s])
    q_s = belief.q_hat[s]
    expected = float(br_s @ q_s)
    w = _clamped_step(steps.alpha(c), float(br_s[a]))
    q_s[a] = (1.0 - w) * q_s[a] + w * (obs.reward + discount * belief.v_hat[obs.next_state])
    belief.v_hat[s] += steps.beta(c) * (expected - belief.v_hat[s])
    belief.state_visits[s] += 1
    belief.state_action_visits[s, a] += 1
    return belief


# -- agents ------------------------------------------------------------------------

DYNAMICS = ("fp", "ttfp-mb", "ttfp-mf", "minimax-q", "q-learning", "individual-q", "decentralized-q")

REQUIRED_LEVEL = {
    "fp": ObservationLevel.MODEL_BASED,
    "ttfp-mb": ObservationLevel.MODEL_BASED,
    "ttfp-mf": ObservationLevel.MODEL_FREE,
    "minimax-q": ObservationLevel.MODEL_FREE,
    "q-learning": ObservationLevel.MINIMAL,
    "individual-q": ObservationLevel.MINIMAL,
    "decentralized-q": ObservationLevel.MINIMAL,
    "frozen": ObservationLevel.MINIMAL,
}


def _power_decay(base: float, exponent: float | None, c: int) -> float:
    return base if exponent is None else base / (c + 1) ** exponent


class Agent:
    """Common surface the engine and diagnostics rely on."""

    kind = "agent"

    def __init__(self, game: StochasticGame, player: int, rng: np.random.Generator | None = None):
        self.player = player
        self.n_states = game.state_count
        counts = game.action_counts
        self.n_own = counts[player]
        self.n_opp = counts[1 - player]
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def act(self, s: int) -> int:
        raise NotImplementedError

    def observe(self, obs: MinimalObservation) -> None:
        raise NotImplementedError

    def policy(self) -> np.ndarray:
        """The stationary strategy this agent currently represents, (S, n_own)."""
        raise NotImplementedError

    @property
    def visits(self) -> np.ndarray:
        return self.belief.state_visits

    # optional diagnostics surfaces
    def opponent_belief(self) -> np.ndarray | None:
        return None

    def joint_q(self) -> np.ndarray | None:
        """Q-belief indexed (s, a1, a2) in game orientation, if the agent keeps one."""
        return None

    def local_q(self) -> np.ndarray | None:
        return None

    def value_estimate(self) -> np.ndarray | None:
        return None

    def _orient(self, Q_own: np.ndarray) -> np.ndarray:
        return Q_own if self.player == 0 else Q_own.transpose(0, 2, 1)


def _one_hot_rows(actions: list[int], n: int) -> np.ndarray:
    out = np.zeros((len(actions), n))
    out[np.arange(len(actions)), actions] = 1.0
    return out


class FictitiousPlayAgent(Agent):
    """Classical fictitious play on a single-state game."""

    kind = "fp"

    def __init__(self, game: StochasticGame, player: int, rng=None):
        super().__init__(game, player, rng)
        if game.state_count != 1:
            raise ValueError("classical fictitious play needs a single-state game")
        self.stage = game.stage_game(0)
        self.belief = AgentBelief.joint(1, self.n_own, self.n_opp)

    def act(self, s: int) -> int:
        return fp_act(self.belief.pi_hat[0], self.stage, self.player)

    def observe(self, obs):
        opp = _opponent_action(obs)
        k = int(self.belief.state_visits[0])
        self.belief.pi_hat[0] = fp_observe(self.belief.pi_hat[0], opp, k)
        self.belief.state_visits[0] += 1
        self.belief.state_action_visits[0, obs.action, opp] += 1

    def opponent_belief(self):
        return self.belief.pi_hat

    def policy(self):
        return _one_hot_rows([self.act(0)], self.n_own)


class TwoTimescaleFPAgent(Agent):
    """Two-timescale fictitious play; model-based when ``model_based`` else ε-exploring model-free."""

    def __init__(self, game: StochasticGame, player: int, steps: TwoTimescale, model_based: bool = True,
                 epsilon: float = 0.05, epsilon_decay: float | None = None, rng=None):
        super().__init__(game, player, rng)
        self.model_based = model_based
        self.kind = "ttfp-mb" if model_based else "ttfp-mf"
        self.steps = steps
        self.discount = game.discount
        self.model = OwnModel.of(game, player) if model_based else None
        self.epsilon = 0.0 if model_based else epsilon
        self.epsilon_decay = epsilon_decay
        self.belief = AgentBelief.joint(self.n_states, self.n_own, self.n_opp)

    def act(self, s: int) -> int:
        if self.model_based:
            return ttfp_act(self.belief, s)
        eps = _power_decay(self.epsilon, self.epsilon_decay, int(self.belief.state_visits[s]))
        return ttfp_act(self.belief, s, eps, self.rng)

    def observe(self, obs):
        if self.model_based:
            ttfp_observe_model_based(self.belief, obs.state, _opponent_action(obs), self.model,
                                     self.steps, own_action=obs.action)
        else:
            ttfp_observe_model_free(self.belief, obs, self.discount, self.steps)

    def opponent_belief(self):
        return self.belief.pi_hat

    def joint_q(self):
        return self._orient(self.belief.Q_hat)

    def value_estimate(self):
        return belief_values(self.belief)

    def policy(self):
        return _one_hot_rows([ttfp_act(self.belief, s) for s in range(self.n_states)], self.n_own)


class QLearningAgent(Agent):
    """Independent ε-greedy Q-learner over its own actions."""

    kind = "q-learning"

    def __init__(self, game: StochasticGame, player: int, beta: Schedule, epsilon: float = 0.1,
                 rng=None):
        super().__init__(game, player, rng)
        self.beta = beta
        self.epsilon = epsilon
        self.discount = game.discount
        self.belief = AgentBelief.local(self.n_states, self.n_own)

    def act(self, s):
        explored = _explore(self.rng.random(), self.epsilon, self.n_own)
        if explored is not None:
            return explored
        return _first_argmax(self.belief.q_hat[s])

    def observe(self, obs):
        q_learning_update(self.belief.q_hat, obs.state, obs.action, obs.reward, obs.next_state,
                          self.discount, self.beta, self.belief.state_action_visits)
        self.belief.state_visits[obs.state] += 1

    def local_q(self):
        return self.belief.q_hat

    def value_estimate(self):
        return self.belief.q_hat.max(axis=1)

    def policy(self):
        return _one_hot_rows([_first_argmax(row) for row in self.belief.q_hat], self.n_own)


class MinimaxQAgent(Agent):
    """Minimax-Q; behaves uniformly with probability ε, otherwise samples its maximin strategy."""

    kind = "minimax-q"

    def __init__(self, game: StochasticGame, player: int, beta: Schedule, epsilon: float = 1.0,
                 rng=None):
        super().__init__(game, player, rng)
        self.beta = beta
        self.epsilon = epsilon
        self.discount = game.discount
        self.belief = AgentBelief.joint(self.n_states, self.n_own, self.n_opp)
        self.belief.pi_hat = None
        self._cache: dict[int, object] = {}

    def _solution(self, s):
        sol = self._cache.get(s)
        if sol is None:
            sol = self._cache[s] = solve_matrix_game(self.belief.Q_hat[s])
        return sol

    def act(self, s):
        explored = _explore(self.rng.random(), self.epsilon, self.n_own)
        if explored is not None:
            return explored
        return _sample(self._solution(s).row_strategy, self.rng.random())

    def observe(self, obs):
        s, opp = obs.state, _opponent_action(obs)
        b = self.belief
        minimax_q_update(b.Q_hat, s, obs.action, opp, obs.reward, obs.next_state, self.discount,
                         self.beta, b.state_action_visits, self._solution(obs.next_state).value)
        b.state_visits[s] += 1
        self._cache.pop(s, None)

    def joint_q(self):
        return self._orient(self.belief.Q_hat)

    def value_estimate(self):
        return np.array([self._solution(s).value for s in range(self.n_states)])

    def policy(self):
        return np.array([self._solution(s).row_strategy for s in range(self.n_states)])


class IndividualQAgent(Agent):
    """Individual Q-learning with logit responses on a single-state game."""

    kind = "individual-q"

    def __init__(self, game: StochasticGame, player: int, alpha: Schedule, tau: float = 0.1,
                 rng=None):
        super().__init__(game, player, rng)
        if game.state_count != 1:
            raise ValueError("individual Q-learning needs a single-state game")
        if not tau > 0:
            raise ValueError("temperature must be positive")
        self.alpha = alpha
        self.tau = tau
        self.belief = AgentBelief.local(1, self.n_own)
        self._br = smoothed_best_response(self.belief.q_hat[0], tau)

    def act(self, s):
        self._br = smoothed_best_response(self.belief.q_hat[0], self.tau)
        return _sample(self._br, self.rng.random())

    def observe(self, obs):
        k = int(self.belief.state_visits[0])
        individual_q_update(self.belief.q_hat[0], obs.action, obs.reward, self._br, self.alpha, k)
        self.belief.state_visits[0] += 1
        self.belief.state_action_visits[0, obs.action] += 1

    def local_q(self):
        return self.belief.q_hat

    def value_estimate(self):
        q = self.belief.q_hat[0]
        return np.array([float(smoothed_best_response(q, self.tau) @ q)])

    def policy(self):
        return smoothed_best_response(self.belief.q_hat[0], self.tau)[None, :]


class DecentralizedQAgent(Agent):
    """Decentralized Q-learning: logit play on local Q, slow value estimate, averaged strategy."""

    kind = "decentralized-q"

    def __init__(self, game: StochasticGame, player: int, steps: TwoTimescale, tau: float = 0.1,
                 tau_decay: float | None = None, rng=None):
        super().__init__(game, player, rng)
        if not tau > 0:
            raise ValueError("temperature must be positive")
        self.steps = steps
        self.tau = tau
        self.tau_decay = tau_decay
        self.discount = game.discount
        self.belief = AgentBelief.local(self.n_states, self.n_own, with_value=True)
        self.pi_bar = np.full((self.n_states, self.n_own), 1.0 / self.n_own)
        self._br = None

    def _tau(self, s):
        return _power_decay(self.tau, self.tau_decay, int(self.belief.state_visits[s]))

    def act(self, s):
        self._br = smoothed_best_response(self.belief.q_hat[s], self._tau(s))
        return _sample(self._br, self.rng.random())

    def observe(self, obs):
        s = obs.state
        step = self.steps.alpha(int(self.belief.state_visits[s]))
        averaged_strategy_update(self.pi_bar[s], self._br, step)
        decentralized_q_observe(self.belief, obs, self._br, self.discount, self.steps)

    def local_q(self):
        return self.belief.q_hat

    def value_estimate(self):
        return self.belief.v_hat

    def policy(self):
        return self.pi_bar


class FrozenAgent(Agent):
    """Plays a fixed stationary strategy and never learns."""

    kind = "frozen"

    def __init__(self, game: StochasticGame, player: int, strategy, rng=None):
        super().__init__(game, player, rng)
        self.strategy = np.array(strategy, dtype=float)
        if self.strategy.shape != (self.n_states, self.n_own):
            raise ValueError(f"strategy has shape {self.strategy.shape}, expected {(self.n_states, self.n_own)}")
        if np.any(self.strategy < 0) or np.any(np.abs(self.strategy.sum(axis=1) - 1) > 1e-9):
            raise ValueError("strategy rows must lie on the simplex")
        self.belief = AgentBelief.local(self.n_states, self.n_own)

    def act(self, s):
        return _sample(self.strategy[s], self.rng.random())

    def observe(self, obs):
        self.belief.state_visits[obs.state] += 1
        self.belief.state_action_visits[obs.state, obs.action] += 1

    def policy(self):
        return self.strategy


@dataclass(frozen=True)
class AgentSpec:
    """Dynamics kind and parameters for one player."""

    dynamics: str
    level: str | None = None
    rho_alpha: float = 0.6
    rho_beta: float = 1.0
    epsilon: float | None = None
    tau: float = 0.1
    epsilon_decay: float | None = None
    tau_decay: float | None = None
    experimental: bool = False
    strategy: list | None = field(default=None, compare=False)

    @property
    def observation_level(self) -> ObservationLevel:
        if self.level is None:
            return REQUIRED_LEVEL[self.dynamics]
        return ObservationLevel.parse(self.level)

    def check(self) -> None:
        if self.dynamics not in REQUIRED_LEVEL:
            raise ValueError(f"unknown dynamics {self.dynamics!r}")
        need = REQUIRED_LEVEL[self.dynamics]
        if self.observation_level < need:
            raise ValueError(f"dynamics {self.dynamics} needs at least the {need.label} observation "
                             f"level, got {self.observation_level.label}")
        if self.dynamics in ("ttfp-mb", "ttfp-mf", "decentralized-q"):
            validate_two_timescale(self.rho_alpha, self.rho_beta)
        if (self.epsilon_decay is not None or self.tau_decay is not None) and not self.experimental:
            raise ValueError("vanishing exploration/temperature schedules require the experimental flag")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not self.tau > 0:
            raise ValueError("temperature must be positive")
        if self.dynamics == "frozen" and self.strategy is None:
            raise ValueError("frozen dynamics need a strategy")

    def build(self, game: StochasticGame, player: int, rng: np.random.Generator) -> Agent:
        self.check()
        d = self.dynamics
        if d == "fp":
            return FictitiousPlayAgent(game, player, rng)
        if d in ("ttfp-mb", "ttfp-mf"):
            eps = 0.05 if self.epsilon is None else self.epsilon
            return TwoTimescaleFPAgent(game, player, TwoTimescale.power(self.rho_alpha, self.rho_beta),
                                       model_based=d == "ttfp-mb", epsilon=eps,
                                       epsilon_decay=self.epsilon_decay, rng=rng)
        if d == "minimax-q":
            eps = 1.0 if self.epsilon is None else self.epsilon
            return MinimaxQAgent(game, player, StepSchedule(self.rho_beta), eps, rng)
        if d == "q-learning":
            eps = 0.1 if self.epsilon is None else self.epsilon
            return QLearningAgent(game, player, StepSchedule(self.rho_beta), eps, rng)
        if d == "individual-q":
            return IndividualQAgent(game, player, StepSchedule(self.rho_alpha), self.tau, rng)
        if d == "decentralized-q":
            return DecentralizedQAgent(game, player, TwoTimescale.power(self.rho_alpha, self.rho_beta),
                                       self.tau, self.tau_decay, rng)
        return FrozenAgent(game, player, self.strategy, rng)
