"""Ground-truth solvers: Shapley iteration, the Q-form operator, MDPs and best responses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .games import StochasticGame
from .matrix import solve_matrix_game

DEFAULT_TOL = 1e-10
MAX_ITER = 1_000_000


@dataclass(frozen=True)
class EquilibriumSolution:
    """Per-player values (2, S), Q-functions (2, S, A1, A2) and strategies."""

    values: np.ndarray
    q_functions: np.ndarray
    strategies: tuple[np.ndarray, np.ndarray]
    residual: float
    iterations: int
    iterates: list[np.ndarray] | None = field(default=None, repr=False)


@dataclass(frozen=True)
class Mdp:
    rewards: np.ndarray  # (S, A)
    transitions: np.ndarray  # (S, A, S)
    discount: float

    @classmethod
    def from_game(cls, game: StochasticGame) -> "Mdp":
        if game.action_counts[1] != 1:
            raise ValueError("an MDP view needs a game where player 2 has a single action")
        return cls(np.asarray(game.payoffs[0, :, :, 0]), np.asarray(game.transitions[:, :, 0, :]),
                   game.discount)


@dataclass(frozen=True)
class MdpSolution:
    q_star: np.ndarray
    v_star: np.ndarray
    residual: float
    joint_q: np.ndarray | None = None


def _stopping_threshold(tolerance: float, gamma: float) -> float:
    return tolerance * (1.0 - gamma) / gamma


def shapley_operator(game: StochasticGame, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One application of the Shapley operator for player 1; returns (Tv, stage Q)."""
    q = game.payoffs[0] + game.discount * (game.transitions @ v)
    tv = np.array([solve_matrix_game(q[s]).value for s in range(game.state_count)])
    return tv, q


def shapley_iterate(game: StochasticGame, tolerance: float = DEFAULT_TOL,
                    keep_iterates: bool = False, max_iter: int = MAX_ITER) -> EquilibriumSolution:
    """Value iteration ``v <- T v`` from ``v = 0`` until ``||v - v*|| <= tolerance`` is certified."""
    if not game.is_zero_sum:
        raise ValueError("Shapley iteration needs a zero-sum game")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    gamma = game.discount
    v = np.zeros(game.state_count)
    iterates = [v] if keep_iterates else None
    n = 0
    while True:
        v_next, _ = shapley_operator(game, v)
        n += 1
        if keep_iterates:
            iterates.append(v_next)
        step = float(np.max(np.abs(v_next - v)))
        v = v_next
        if gamma == 0.0 or step <= _stopping_threshold(tolerance, gamma):
            break
        if n >= max_iter:
            raise RuntimeError(f"Shapley iteration did not converge in {max_iter} steps")
    tv, q = shapley_operator(game, v)
    residual = float(np.max(np.abs(tv - v)))
    sols = [solve_matrix_game(q[s]) for s in range(game.state_count)]
    strategies = (np.array([sol.row_strategy for sol in sols]),
                  np.array([sol.col_strategy for sol in sols]))
    return EquilibriumSolution(np.stack([v, -v]), np.stack([q, -q]), strategies, residual, n, iterates)


def apply_q_operator(game: StochasticGame, Q: np.ndarray, player: int = 0) -> np.ndarray:
    """``(F Q)(s,a) = r(s,a) + gamma * sum_s' p(s'|s,a) val(Q(s',.))`` from player's side.

    ``Q`` is indexed (s, a1, a2) for either player; for player 2 the stage value
    is taken with player 2 maximizing over columns.
    """
    Q = np.asarray(Q, dtype=float)
    expected = game.payoffs.shape[1:]
    if Q.shape != expected:
        raise ValueError(f"Q has shape {Q.shape}, expected {expected}")
    if player == 0:
        vals = np.array([solve_matrix_game(Q[s]).value for s in range(game.state_count)])
    else:
        vals = np.array([solve_matrix_game(Q[s].T).value for s in range(game.state_count)])
    return game.payoffs[player] + game.discount * (game.transitions @ vals)


def _value_iteration(rewards: np.ndarray, transitions: np.ndarray, gamma: float,
                     tolerance: float, max_iter: int = MAX_ITER) -> MdpSolution:
    v = np.zeros(rewards.shape[0])
    for _ in range(max_iter):
        q = rewards + gamma * (transitions @ v)
        v_next = q.max(axis=1)
        step = float(np.max(np.abs(v_next - v)))
        v = v_next
        if gamma == 0.0 or step <= _stopping_threshold(tolerance, gamma):
            break
    else:
        raise RuntimeError(f"value iteration did not converge in {max_iter} steps")
    q = rewards + gamma * (transitions @ v)
    v = q.max(axis=1)
    residual = float(np.max(np.abs((rewards + gamma * (transitions @ v)) - q)))
    return MdpSolution(q, v, residual)


def solve_mdp(mdp: Mdp | StochasticGame, tolerance: float = DEFAULT_TOL) -> MdpSolution:
    """Optimal Q-function of a single-controller problem by value iteration."""
    if isinstance(mdp, StochasticGame):
        mdp = Mdp.from_game(mdp)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    return _value_iteration(np.asarray(mdp.rewards, float), np.asarray(mdp.transitions, float),
                            mdp.discount, tolerance)


def induced_mdp(game: StochasticGame, opponent: np.ndarray, player: int) -> Mdp:
    """MDP faced by ``player`` when the other player follows a fixed stationary strategy."""
    opponent = np.asarray(opponent, dtype=float)
    r, p = game.own_view(player)
    n_opp = r.shape[2]
    if opponent.shape != (game.state_count, n_opp):
        raise ValueError(f"opponent strategy has shape {opponent.shape}, expected "
                         f"{(game.state_count, n_opp)}")
    rewards = np.einsum("sab,sb->sa", r, opponent)
    transitions = np.einsum("sabt,sb->sat", p, opponent)
    return Mdp(rewards, transitions, game.discount)


def best_response_to_frozen(game: StochasticGame, opponent: np.ndarray, player: int,
                            tolerance: float = DEFAULT_TOL) -> MdpSolution:
    """Best-response MDP against a frozen opponent.

    ``q_star`` is over (s, own action); ``joint_q`` lifts the solution back to
    joint actions indexed (s, a1, a2).
    """
    sol = solve_mdp(induced_mdp(game, opponent, player), tolerance)
    joint = game.payoffs[player] + game.discount * (game.transitions @ sol.v_star)
    return MdpSolution(sol.q_star, sol.v_star, sol.residual, joint)


def evaluate_profile(game: StochasticGame, profile, player: int) -> np.ndarray:
    """Exact discounted value of a stationary profile by solving ``(I - gamma P) v = r``."""
    x = np.asarray(profile[0], dtype=float)
    y = np.asarray(profile[1], dtype=float)
    joint = x[:, :, None] * y[:, None, :]
    r = np.einsum("sab,sab->s", game.payoffs[player], joint)
    P = np.einsum("sabt,sab->st", game.transitions, joint)
    n_s = game.state_count
    return np.linalg.solve(np.eye(n_s) - game.discount * P, r)
