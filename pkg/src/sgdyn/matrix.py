"""Zero-sum matrix games: minimax value, best responses and exploitability."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import StrategicFormGame

SOLVER_TOL = 1e-9
TIE_TOL = 1e-12
_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    residual: float


def _simplex_max(tableau: np.ndarray, basis: list[int]) -> None:
    """Run the primal simplex in place on a max-form tableau using Bland's rule.

    The last row holds the negated objective coefficients, the last column the
    right-hand side. ``basis[i]`` is the variable basic in constraint row i.
    """
    m = len(basis)
    obj = tableau[-1]
    while True:
        candidates = np.flatnonzero(obj[:-1] < -_PIVOT_TOL)
        if candidates.size == 0:
            return
        col = int(candidates[0])
        column = tableau[:m, col]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:  # pragma: no cover - bounded by construction
            raise RuntimeError("unbounded matrix-game LP")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIVOT_TOL * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        tableau[row] /= tableau[row, col]
        for r in range(m + 1):
            if r != row and tableau[r, col] != 0.0:
                tableau[r] -= tableau[r, col] * tableau[row]
        basis[row] = col


def _clean(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def solve_matrix_game(M) -> MatrixGameSolution:
    """Minimax solution of the zero-sum game where the row player receives ``M``.

    Solves the column player's LP ``max 1'y  s.t.  (M - min M + 1) y <= 1`` with a
    dense Bland-rule simplex; the row strategy is read from the duals. Output is a
    deterministic function of ``M``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or 0 in M.shape:
        raise ValueError(f"expected a non-empty matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    m, n = M.shape
    shift = 1.0 - M.min()
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = M + shift
    tableau[:m, n:n + m] = np.eye(m)
    tableau[:m, -1] = 1.0
    tableau[-1, :n] = -1.0
    basis = list(range(n, n + m))
    _simplex_max(tableau, basis)

    y = np.zeros(n + m)
    y[basis] = tableau[:m, -1]
    col = _clean(y[:n])
    row = _clean(tableau[-1, n:n + m].copy())
    lower = float(np.min(row @ M))
    upper = float(np.max(M @ col))
    value = min(max(float(row @ M @ col), lower), upper)
    return MatrixGameSolution(value, row, col, max(upper - lower, 0.0))


def matrix_value(M) -> float:
    return solve_matrix_game(M).value


@dataclass(frozen=True)
class BestResponse:
    value: float
    argmax_set: tuple[int, ...]
    chosen: int


def best_response(M, opponent, side: str = "row") -> BestResponse:
    """Best response of one player against a mixed strategy of the other.

    ``M`` is the responding player's own payoff matrix indexed ``[a1, a2]``;
    ``side`` says whether the responder picks rows or columns. Ties within
    1e-12 are broken towards the smallest action index.
    """
    M = np.asarray(M, dtype=float)
    opponent = np.asarray(opponent, dtype=float)
    if side == "row":
        if opponent.shape != (M.shape[1],):
            raise ValueError(f"opponent strategy has {opponent.shape} entries, expected {M.shape[1]}")
        payoffs = M @ opponent
    elif side == "col":
        if opponent.shape != (M.shape[0],):
            raise ValueError(f"opponent strategy has {opponent.shape} entries, expected {M.shape[0]}")
        payoffs = opponent @ M
    else:
        raise ValueError(f"side must be 'row' or 'col', not {side!r}")
    best = float(payoffs.max())
    ties = tuple(int(a) for a in np.flatnonzero(payoffs >= best - TIE_TOL))
    return BestResponse(best, ties, ties[0])


def exploitability(game: StrategicFormGame, profile) -> float:
    """Sum over players of best-response payoff minus realized expected payoff."""
    if not game.is_zero_sum:
        raise ValueError("exploitability is only a Lyapunov function for zero-sum games")
    x = np.asarray(profile[0], dtype=float)
    y = np.asarray(profile[1], dtype=float)
    r1, r2 = game.payoffs
    gap1 = best_response(r1, y, "row").value - float(x @ r1 @ y)
    gap2 = best_response(r2, x, "col").value - float(x @ r2 @ y)
    return max(gap1 + gap2, 0.0)
