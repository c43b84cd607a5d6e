import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sgdyn.games import StrategicFormGame
from sgdyn.matrix import best_response, exploitability, solve_matrix_game

MP = np.array([[1.0, -1.0], [-1.0, 1.0]])
RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])

matrices = st.tuples(st.integers(1, 5), st.integers(1, 5)).flatmap(
    lambda shape: arrays(float, shape, elements=st.floats(-1, 1)))


def grid_value(M, points=201):
    """max over a 201-point grid of the row simplex of the worst-case column payoff."""
    p = np.linspace(0, 1, points)
    rows = np.stack([p, 1 - p], axis=1)
    return float((rows @ M).min(axis=1).max())


def pure_saddle(M):
    for i, j in itertools.product(*map(range, M.shape)):
        if M[i, j] == M[:, j].max() and M[i, j] == M[i].min():
            return i, j, M[i, j]
    return None


def test_matching_pennies():
    sol = solve_matrix_game(MP)
    assert abs(sol.value) <= 1e-9
    assert np.allclose(sol.row_strategy, 0.5, atol=1e-8)
    assert np.allclose(sol.col_strategy, 0.5, atol=1e-8)


def test_rps():
    sol = solve_matrix_game(RPS)
    assert abs(sol.value) <= 1e-9
    assert np.allclose(sol.row_strategy, 1 / 3, atol=1e-8)
    assert np.allclose(sol.col_strategy, 1 / 3, atol=1e-8)


def test_pure_saddle_point():
    M = np.array([[3.0, 1.0], [2.0, 0.0]])
    assert pure_saddle(M) == (0, 1, 1.0)
    sol = solve_matrix_game(M)
    assert sol.value == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(sol.row_strategy, [1, 0]) and np.allclose(sol.col_strategy, [0, 1])


def test_constant_matrix_uses_first_actions():
    sol = solve_matrix_game(np.full((3, 2), 2.5))
    assert sol.value == 2.5
    assert np.array_equal(sol.row_strategy, [1, 0, 0]) and np.array_equal(sol.col_strategy, [1, 0])


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        solve_matrix_game([[np.nan, 0.0]])


def test_deterministic():
    M = np.random.default_rng(0).uniform(-1, 1, (4, 5))
    a, b = solve_matrix_game(M), solve_matrix_game(M.copy())
    assert a.value == b.value and np.array_equal(a.row_strategy, b.row_strategy)


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_duality_and_invariants(M):
    sol = solve_matrix_game(M)
    assert sol.residual <= 1e-8
    for x in (sol.row_strategy, sol.col_strategy):
        assert np.all(x >= 0) and abs(x.sum() - 1) <= 1e-9
    assert (sol.row_strategy @ M).min() >= sol.value - 1e-9
    assert (M @ sol.col_strategy).max() <= sol.value + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: arrays(float, (2, n), elements=st.floats(-1, 1))))
def test_two_row_games_match_grid(M):
    # grid spacing 1/200 bounds the grid error by range/200 <= 0.01
    assert abs(solve_matrix_game(M).value - grid_value(M)) <= 2 / 200 + 1e-12


@settings(max_examples=100, deadline=None)
@given(matrices, st.floats(-1, 1))
def test_val_non_expansive(M, shift):
    noise = np.random.default_rng(abs(hash(M.tobytes())) % 2**32).uniform(-1, 1, M.shape) * abs(shift)
    d = abs(solve_matrix_game(M).value - solve_matrix_game(M + noise).value)
    assert d <= np.abs(noise).max() + 1e-9


@settings(max_examples=100, deadline=None)
@given(matrices, st.floats(0.1, 10), st.floats(-5, 5))
def test_shift_scale_equivariance(M, c, d):
    base = solve_matrix_game(M)
    moved = solve_matrix_game(c * M + d)
    assert moved.value == pytest.approx(c * base.value + d, abs=1e-8 * (1 + c))
    # base strategies stay optimal in the transformed game
    Mt = c * M + d
    assert (base.row_strategy @ Mt).min() >= moved.value - 1e-8 * (1 + c)
    assert (Mt @ base.col_strategy).max() <= moved.value + 1e-8 * (1 + c)


def test_best_response_examples():
    br = best_response(MP, [0.5, 0.5], "row")
    assert br.value == 0 and br.argmax_set == (0, 1) and br.chosen == 0
    br = best_response(RPS, [1, 0, 0], "row")
    assert br.value == 1 and br.chosen == 1
    br = best_response(MP, [0.6, 0.4], "row")
    assert br.value == pytest.approx(0.6 * 1 + 0.4 * -1) and br.chosen == 0


def test_best_response_column_side_and_errors():
    # column player with payoffs -MP against row (1, 0) mismatches
    br = best_response(-MP, [1, 0], "col")
    assert br.chosen == 1 and br.value == 1
    with pytest.raises(ValueError):
        best_response(MP, [1, 0, 0], "row")


def test_exploitability_examples():
    game = StrategicFormGame.zero_sum(MP)
    assert exploitability(game, ([1, 0], [1, 0])) == pytest.approx((1 - 1) + (1 - (-1)))
    assert exploitability(game, ([0.5, 0.5], [0.5, 0.5])) == 0
    with pytest.raises(ValueError):
        exploitability(StrategicFormGame(np.ones((2, 2, 2))), ([1, 0], [1, 0]))


@settings(max_examples=150, deadline=None)
@given(matrices, st.integers(0, 2**32 - 1))
def test_exploitability_properties(M, seed):
    game = StrategicFormGame.zero_sum(M)
    sol = solve_matrix_game(M)
    assert exploitability(game, (sol.row_strategy, sol.col_strategy)) <= 1e-8
    rng = np.random.default_rng(seed)
    x = rng.dirichlet(np.ones(M.shape[0]))
    y = rng.dirichlet(np.ones(M.shape[1]))
    e = exploitability(game, (x, y))
    assert e >= 0
    if e <= 1e-12:
        assert best_response(M, y).value == pytest.approx(x @ M @ y, abs=1e-9)
