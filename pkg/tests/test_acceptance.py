"""End-to-end acceptance experiments, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (also collected in
the terminal summary). The long simulations are marked ``slow`` but belong to
the default run.
"""

import json
import time

import numpy as np
import pytest

from sgdyn.cli import main
from sgdyn.diagnostics import theorem_bounds
from sgdyn.dynamics import AgentSpec, play_fictitious
from sgdyn.engine import ExperimentConfig, run
from sgdyn.games import GeneratorSpec, StochasticGame, builtin_game, generate_game
from sgdyn.matrix import solve_matrix_game
from sgdyn.oracles import Mdp, best_response_to_frozen, shapley_iterate, solve_mdp

GAME_SEEDS = range(5)


def random_case_one(seed, states=3, actions=(2, 2), discount=0.5):
    return generate_game(GeneratorSpec(states, actions, discount, reachability="CaseI"), seed)


def decade_medians(snapshots, horizon, cadence=1000):
    """Median drift over the first decade [m, 10m) and over the last decade (K/10, K]."""
    ks = np.array([s.k for s in snapshots])
    drift = np.array([np.max(s.drift) for s in snapshots])
    first = drift[(ks >= cadence) & (ks < 10 * cadence)]
    last = drift[ks > horizon / 10]
    return float(np.median(first)), float(np.median(last))


def test_matrix_solver_exactness(criterion):
    t0 = time.perf_counter()
    worst_sym = 0.0
    for M in ([[1, -1], [-1, 1]], [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]):
        sol = solve_matrix_game(M)
        n = len(M)
        ok = abs(sol.value) <= 1e-9
        ok &= np.max(np.abs(sol.row_strategy - 1 / n)) <= 1e-8 and np.max(np.abs(sol.col_strategy - 1 / n)) <= 1e-8
        worst_sym = max(worst_sym, 0.0 if ok else np.inf)
    rng = np.random.default_rng(2024)
    worst_gap = 0.0
    for _ in range(500):
        M = rng.uniform(-1, 1, tuple(rng.integers(1, 6, size=2)))
        sol = solve_matrix_game(M)
        # duality gap recomputed here from the returned strategies
        gap = float(np.max(M @ sol.col_strategy) - np.min(sol.row_strategy @ M))
        worst_gap = max(worst_gap, abs(gap))
    elapsed = time.perf_counter() - t0
    criterion(1, worst_sym == 0.0 and worst_gap <= 1e-8 and elapsed < 5,
              f"symmetric games exact, max duality gap {worst_gap:.2e} over 500 games, {elapsed:.2f}s")


def test_shapley_contraction(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = -np.inf
    for i in range(20):
        discount = (0.3, 0.7)[i % 2]
        spec = GeneratorSpec(int(rng.integers(1, 5)), tuple(int(a) for a in rng.integers(1, 4, size=2)),
                             discount, reachability="CaseI")
        game = generate_game(spec, 100 + i)
        v_star = shapley_iterate(game, 1e-12).values[0]
        iterates = shapley_iterate(game, 1e-10, keep_iterates=True).iterates
        errs = [np.max(np.abs(v - v_star)) for v in iterates]
        for a, b in zip(errs, errs[1:]):
            worst = max(worst, b - (discount * a + 1e-10))
    elapsed = time.perf_counter() - t0
    criterion(2, worst <= 0 and elapsed < 10,
              f"largest contraction violation {max(worst, 0.0):.2e} over 20 games, {elapsed:.2f}s")


def test_fictitious_play_property(criterion):
    t0 = time.perf_counter()
    K = 1_000_000
    parts, ok = [], True
    for name in ("matching-pennies", "rps"):
        expl = play_fictitious(builtin_game(name).stage_game(0), K).exploitability
        below = np.flatnonzero(expl < 0.02)
        tail = float(expl[int(0.9 * K):].max())
        ok &= below.size > 0 and tail < 0.05
        hit = int(below[0]) + 1 if below.size else None
        parts.append(f"{name}: below 0.02 at step {hit}, last-10% max {tail:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    criterion(3, ok, "; ".join(parts) + f", {elapsed:.1f}s")


@pytest.mark.slow
def test_model_based_two_timescale(criterion):
    K = 2_000_000
    lines, ok = [], True
    for seed in GAME_SEEDS:
        game = random_case_one(seed)
        t0 = time.perf_counter()
        spec = AgentSpec("ttfp-mb", rho_alpha=0.6, rho_beta=1.0)
        trace = run(ExperimentConfig(game, (spec, spec), K, seed=seed, cadence=1000))
        elapsed = time.perf_counter() - t0
        final = trace.summary["final"]
        first, last = decade_medians(trace.snapshots, K)
        good = (final["nash_gap"] <= 0.1 and final["q_err"] <= 0.1 and final["drift"] <= 0.05
                and last < first and elapsed < 600)
        ok &= good
        lines.append(f"game {seed}: gap {final['nash_gap']:.4f} q_err {final['q_err']:.4f} "
                     f"drift {final['drift']:.4f} (median {first:.3f} -> {last:.4f}) {elapsed:.0f}s")
    criterion(4, ok, "; ".join(lines))


@pytest.mark.slow
def test_model_free_bounds(criterion):
    K = 2_000_000
    eps = 0.05
    lines, ok = [], True
    for seed in GAME_SEEDS:
        game = random_case_one(seed)
        bounds = theorem_bounds(game, epsilon=eps)
        # the stated ceilings use the worst case D = 4 for rewards in [-1, 1]
        assert bounds.D <= 4 and bounds.model_free_v_bound <= 2.4 + 1e-12 and bounds.model_free_Q_bound <= 1.2 + 1e-12
        t0 = time.perf_counter()
        spec = AgentSpec("ttfp-mf", rho_alpha=0.6, rho_beta=1.0, epsilon=eps)
        trace = run(ExperimentConfig(game, (spec, spec), K, seed=seed, cadence=10_000))
        elapsed = time.perf_counter() - t0
        final = trace.summary["final"]
        v_err, q_err = final["v_err"], final["q_err"]
        good = (v_err <= bounds.model_free_v_bound and q_err <= bounds.model_free_Q_bound
                and v_err <= 0.3 and q_err <= 0.3 and elapsed < 900)
        ok &= good
        lines.append(f"game {seed}: v_err {v_err:.4f} (ceiling {bounds.model_free_v_bound:.3f}) "
                     f"q_err {q_err:.4f} (ceiling {bounds.model_free_Q_bound:.3f}) {elapsed:.0f}s")
    criterion(5, ok, "; ".join(lines))


def hand_mdp_as_game(discount=0.9):
    """State 0 pays 1, state 1 pays 0; action j moves to state j. One dummy opponent action."""
    rewards = np.array([[1.0, 1.0], [0.0, 0.0]])
    transitions = np.zeros((2, 2, 2))
    transitions[:, 0, 0] = 1.0
    transitions[:, 1, 1] = 1.0
    mdp = Mdp(rewards, transitions, discount)
    r = rewards[:, :, None]
    return mdp, StochasticGame(np.stack([r, -r]), transitions[:, :, None, :], discount)


def test_q_learning_oracle(criterion):
    mdp, game = hand_mdp_as_game()
    q_star = solve_mdp(mdp, 1e-12).q_star
    t0 = time.perf_counter()
    learner = AgentSpec("q-learning", rho_beta=0.7, epsilon=0.1)
    dummy = AgentSpec("frozen", level="minimal", strategy=[[1.0], [1.0]])
    trace = run(ExperimentConfig(game, (learner, dummy), 200_000, seed=0, cadence=200_000))
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(trace.agents[0].local_q() - q_star)))
    criterion(6, err <= 0.05 and elapsed < 10 and np.allclose(q_star.max(axis=1), [10, 9]),
              f"max |q - q*| = {err:.2e} with v* = {q_star.max(axis=1).round(9).tolist()}, {elapsed:.1f}s")


@pytest.mark.slow
def test_minimax_q_against_shapley(criterion):
    game = random_case_one(11, states=2)
    oracle = shapley_iterate(game, 1e-12)
    t0 = time.perf_counter()
    spec = AgentSpec("minimax-q", rho_beta=1.0, epsilon=1.0)
    trace = run(ExperimentConfig(game, (spec, spec), 500_000, seed=0, cadence=500_000), oracle)
    elapsed = time.perf_counter() - t0
    err = max(float(np.max(np.abs(a.joint_q() - oracle.q_functions[i]))) for i, a in enumerate(trace.agents))
    criterion(7, err <= 0.05 and elapsed < 120, f"max |Q - Q*| = {err:.4f}, {elapsed:.1f}s")


@pytest.mark.slow
def test_decentralized_q_matching_pennies(criterion):
    game = builtin_game("matching-pennies", discount=0.5)
    tau = 0.1
    bounds = theorem_bounds(game, tau=tau)
    t0 = time.perf_counter()
    spec = AgentSpec("decentralized-q", tau=tau)
    trace = run(ExperimentConfig(game, (spec, spec), 1_000_000, seed=0, cadence=10_000))
    elapsed = time.perf_counter() - t0
    v = np.array([a.value_estimate()[0] for a in trace.agents])
    pi_bar = np.array([a.pi_bar[0] for a in trace.agents])
    v_dev = float(np.max(np.abs(v)))
    pi_dev = float(np.max(np.abs(pi_bar - 0.5)))
    ok = v_dev <= bounds.minimal_v_bound and v_dev <= 0.3 and pi_dev <= 0.1 and elapsed < 300
    criterion(8, ok, f"max |v| = {v_dev:.4f} (bound {bounds.minimal_v_bound:.3f} at lambda={bounds.lam}, "
                     f"{bounds.minimal_v_bound_literal:.3f} at lambda=gamma), "
                     f"max |pi_bar - 1/2| = {pi_dev:.4f}, {elapsed:.0f}s")


@pytest.mark.slow
def test_rationality_against_frozen_opponent(criterion):
    game = random_case_one(21, actions=(2, 3))
    opponent = np.random.default_rng(21).dirichlet(np.ones(3), size=3)
    target = best_response_to_frozen(game, opponent, 0, 1e-12).joint_q
    t0 = time.perf_counter()
    learner = AgentSpec("ttfp-mb")
    frozen = AgentSpec("frozen", level="minimal", strategy=opponent.tolist())
    trace = run(ExperimentConfig(game, (learner, frozen), 1_000_000, seed=0, cadence=100_000))
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(trace.agents[0].joint_q() - target)))
    criterion(9, err <= 0.05 and elapsed < 300, f"max |Q - Q_BR| = {err:.4f}, {elapsed:.0f}s")


def test_cli_determinism(criterion, tmp_path):
    flags = ["run", "--game", "builtin:random-zs:3:2x2:seed=7", "--dynamics", "ttfp-mb",
             "--horizon", "100000", "--seed", "7"]
    codes = [main(flags + ["--out", str(tmp_path / d)]) for d in ("a", "b")]
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in ("trace.csv", "snapshots.csv", "summary.json"))
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    criterion(10, codes == [0, 0] and same and summary["seed"] == 7,
              "trace.csv, snapshots.csv and summary.json byte-identical across two runs")
