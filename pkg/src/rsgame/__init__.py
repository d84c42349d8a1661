"""Risk-sensitive average-cost semi-Markov games with two players."""
from .discrete import SolverFailure, solve_discrete_game, solve_discrete_mdp, evaluate_strategies
from .evaluation import evaluate_pair
from .matrix_game import GameSolution, MatrixGame, game_value, solve_matrix_game
from .model import (GameModel, ModelError, RunningCost, SojournDist, StationaryStrategy,
                    ValidationReport, compute_m_rho, load_model, load_strategy, pure_strategy,
                    save_model, save_strategy, uniform_strategy, validate)
from .nash import (BestResponse, HittingTimeDivergence, NashReport, best_response,
                   hitting_time_h, solve_nash, verify_nash)
from .simulator import JEstimate, Trajectory, accumulate_cost, estimate_J, simulate_trajectory, tail_diagnostic
from .transform import CostTable, DomainError, build_cost_table, integrated_running_cost
from .zero_sum import ZeroSumReport, mu_of_g, solve_zero_sum, verify_saddle

__version__ = "0.1.0"
