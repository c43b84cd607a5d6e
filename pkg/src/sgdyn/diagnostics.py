"""Lyapunov functions, equilibrium gaps and theorem error bounds as snapshot metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .games import StochasticGame, StrategicFormGame
from .matrix import exploitability
from .oracles import DEFAULT_TOL, EquilibriumSolution, best_response_to_frozen, evaluate_profile

LOWER_BOUND_SLACK = 1e-9

METRICS = ("V", "Vstar", "drift", "q_err", "v_err", "nash_gap",
           "bound_mf_v", "bound_mf_q", "bound_min_v", "bound_min_pi")


def default_lambda(discount: float) -> float:
    """Midpoint of (1, 1/γ); 2 for γ = 0."""
    return 2.0 if discount == 0 else (1.0 + 1.0 / discount) / 2.0


def check_lambda(lam: float, discount: float) -> None:
    if not lam > 1.0 or (discount > 0 and not lam < 1.0 / discount):
        raise ValueError(f"λ must lie in (1, 1/γ) = (1, {1.0 / discount if discount else math.inf}), got {lam}")


def lyapunov_V(stage, profile) -> float:
    """Harris Lyapunov function of a zero-sum stage game; ``stage`` is a game or a pair of matrices."""
    if not isinstance(stage, StrategicFormGame):
        stage = StrategicFormGame(np.stack([np.asarray(m, dtype=float) for m in stage]))
    return exploitability(stage, profile)


def lyapunov_Vstar(profile, Q1, Q2, lam: float, discount: float | None = None) -> float:
    """``(Σ_i max_own E Q^i - λ max_a |Q^1 + Q^2|)_+`` at one state; Q's are indexed [a1, a2]."""
    if discount is not None:
        check_lambda(lam, discount)
    elif not lam > 1.0:
        raise ValueError(f"λ must exceed 1, got {lam}")
    x = np.asarray(profile[0], dtype=float)
    y = np.asarray(profile[1], dtype=float)
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    best = float((Q1 @ y).max()) + float((x @ Q2).max())
    return max(best - lam * float(np.abs(Q1 + Q2).max()), 0.0)


def zero_sum_drift(Q1, Q2, s: int) -> float | None:
    """``max_a |Q1(s,a) + Q2(s,a)|``; None when either learner keeps no joint Q-belief."""
    if Q1 is None or Q2 is None:
        return None
    return float(np.abs(Q1[s] + Q2[s]).max())


def stochastic_nash_gap(game: StochasticGame, profile, tolerance: float = DEFAULT_TOL) -> np.ndarray:
    """Per-player, per-state gain (2, S) from a unilateral stationary deviation."""
    if not game.is_zero_sum:
        raise ValueError("the Nash gap diagnostic needs a zero-sum game")
    x = np.asarray(profile[0], dtype=float)
    y = np.asarray(profile[1], dtype=float)
    gaps = np.empty((2, game.state_count))
    for i, opp in ((0, y), (1, x)):
        br = best_response_to_frozen(game, opp, i, tolerance).v_star
        gaps[i] = np.maximum(br - evaluate_profile(game, (x, y), i), 0.0)
    return gaps


@dataclass(frozen=True)
class TheoremBounds:
    D: float
    lam: float
    g: float
    g_literal: float
    model_free_v_bound: float | None
    model_free_Q_bound: float | None
    minimal_v_bound: float | None
    minimal_strategy_bound: float | None
    minimal_v_bound_literal: float | None
    minimal_strategy_bound_literal: float | None


def _g(lam: float, gamma: float) -> float:
    return (2 + lam - lam * gamma) / ((1 - lam * gamma) * (1 - gamma))


def theorem_bounds(game: StochasticGame, epsilon: float | None = None, tau: float | None = None,
                   lam: float | None = None) -> TheoremBounds:
    """Error ceilings of the model-free and minimal-information convergence results.

    The minimal-information ceilings are reported with g evaluated at the
    configured λ and, as ``*_literal``, with g evaluated at λ = γ.
    """
    gamma = game.discount
    lam = default_lambda(gamma) if lam is None else lam
    check_lambda(lam, gamma)
    D = sum(float(np.abs(game.payoffs[i]).max()) for i in range(2)) / (1 - gamma)
    g = _g(lam, gamma)
    g_lit = _g(gamma, gamma)
    mf_v = mf_q = None
    if epsilon is not None:
        mf_q = epsilon * D * (1 + gamma) / (1 - gamma) ** 2
        if gamma > 0:
            mf_v = epsilon * D * (1 + gamma) / (gamma * (1 - gamma) ** 2)
    min_v = min_pi = min_v_lit = min_pi_lit = None
    if tau is not None:
        scale = tau * math.log(game.action_counts[0] * game.action_counts[1])
        min_v, min_pi = scale * g, scale * (g * (1 + gamma) - 1)
        min_v_lit, min_pi_lit = scale * g_lit, scale * (g_lit * (1 + gamma) - 1)
    return TheoremBounds(D, lam, g, g_lit, mf_v, mf_q, min_v, min_pi, min_v_lit, min_pi_lit)


def representative_profile(agents) -> tuple[np.ndarray, np.ndarray]:
    """Strategy per player: the opponent's belief about it when held, else its own policy."""
    out = []
    for i in (0, 1):
        belief = agents[1 - i].opponent_belief()
        out.append(np.array(belief if belief is not None else agents[i].policy(), dtype=float))
    return out[0], out[1]


@dataclass
class DiagnosticSnapshot:
    """Metrics at step ``k``; per-state arrays are (S,), per-player arrays (2, S)."""

    k: int
    nash_gap: np.ndarray | None = None
    V: np.ndarray | None = None
    Vstar: np.ndarray | None = None
    drift: np.ndarray | None = None
    q_err: np.ndarray | None = None
    v_err: np.ndarray | None = None
    bounds: dict = field(default_factory=dict)

    def rows(self):
        """Long-format rows (k, metric, player, state, value); player 0 marks joint metrics."""
        for name in ("V", "Vstar", "drift"):
            arr = getattr(self, name)
            if arr is not None:
                for s, val in enumerate(arr):
                    yield self.k, name, 0, s, float(val)
        for name in ("q_err", "v_err", "nash_gap"):
            arr = getattr(self, name)
            if arr is not None:
                for i in range(2):
                    for s, val in enumerate(arr[i]):
                        if not math.isnan(val):
                            yield self.k, name, i + 1, s, float(val)
        for name, val in self.bounds.items():
            if val is not None:
                yield self.k, name, 0, -1, float(val)

    def summary(self) -> dict:
        out = {"k": self.k}
        for name in ("nash_gap", "V", "Vstar", "drift", "q_err", "v_err"):
            arr = getattr(self, name)
            out[name] = None if arr is None or np.all(np.isnan(arr)) else float(np.nanmax(arr))
        return out


def _oracle_local_q(oracle: EquilibriumSolution, player: int) -> np.ndarray:
    Q = oracle.q_functions[player]
    x, y = oracle.strategies
    if player == 0:
        return np.einsum("sab,sb->sa", Q, y)
    return np.einsum("sab,sa->sb", Q, x)


def take_snapshot(game: StochasticGame, agents, k: int, oracle: EquilibriumSolution | None,
                  lam: float, tolerance: float = DEFAULT_TOL) -> DiagnosticSnapshot:
    snap = DiagnosticSnapshot(k)
    n_s = game.state_count
    profile = representative_profile(agents)
    Qs = [a.joint_q() for a in agents]
    if oracle is not None:
        snap.nash_gap = stochastic_nash_gap(game, profile, tolerance)
        snap.V = np.array([lyapunov_V(StrategicFormGame(oracle.q_functions[:, s]),
                                      (profile[0][s], profile[1][s])) for s in range(n_s)])
        q_err = np.full((2, n_s), np.nan)
        v_err = np.full((2, n_s), np.nan)
        for i, agent in enumerate(agents):
            if Qs[i] is not None:
                q_err[i] = np.abs(Qs[i] - oracle.q_functions[i]).reshape(n_s, -1).max(axis=1)
            elif agent.local_q() is not None:
                q_err[i] = np.abs(agent.local_q() - _oracle_local_q(oracle, i)).max(axis=1)
            v = agent.value_estimate()
            if v is not None:
                v_err[i] = np.abs(v - oracle.values[i])
        snap.q_err, snap.v_err = q_err, v_err
    if Qs[0] is not None and Qs[1] is not None:
        snap.drift = np.array([zero_sum_drift(Qs[0], Qs[1], s) for s in range(n_s)])
        snap.Vstar = np.array([lyapunov_Vstar((profile[0][s], profile[1][s]), Qs[0][s], Qs[1][s], lam)
                               for s in range(n_s)])
        v_bar = agents[0].value_estimate() + agents[1].value_estimate()
        floor = -lam * snap.drift - LOWER_BOUND_SLACK
        if np.any(v_bar < floor):
            raise AssertionError(f"value-sum lower bound violated at k={k}: {v_bar} < {floor}")
    return snap
