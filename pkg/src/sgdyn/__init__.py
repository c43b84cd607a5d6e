"""Learning dynamics and equilibrium oracles for two-player zero-sum stochastic games."""

__version__ = "0.1.0"

from .games import (  # noqa: E402
    GameError, GameParseError, GameValidationError, GeneratorSpec, StochasticGame, StrategicFormGame,
    builtin_game, generate_game, load_game, save_game,
)
from .matrix import best_response, exploitability, solve_matrix_game  # noqa: E402
from .oracles import best_response_to_frozen, shapley_iterate, solve_mdp  # noqa: E402
from .dynamics import AgentSpec, ObservationLevel  # noqa: E402
from .engine import ExperimentConfig, run  # noqa: E402

__all__ = [
    "GameError", "GameParseError", "GameValidationError", "GeneratorSpec", "StochasticGame",
    "StrategicFormGame", "builtin_game", "generate_game", "load_game", "save_game",
    "best_response", "exploitability", "solve_matrix_game",
    "best_response_to_frozen", "shapley_iterate", "solve_mdp",
    "AgentSpec", "ObservationLevel", "ExperimentConfig", "run",
]
