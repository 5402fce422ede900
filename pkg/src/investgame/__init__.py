"""Nash-equilibrium solvers for the n-agent optimal-investment game with
mutual strategy influence over a social network.

The library covers the full pipeline: GBM market estimation from price
panels, exact and fast-approximate equilibrium solvers, the
infinite-influence asymptotics, Monte Carlo SDE validation, and a
benchmark harness for the accuracy/efficiency comparisons.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticResult,
    asymptotic_alpha,
    asymptotic_fixed_point,
    asymptotic_report,
    asymptotic_strategy,
    compare_terminal_wealth,
    limit_U,
    weight_V,
)
from .bench import (
    BenchRow,
    BenchSpec,
    SweepResult,
    relative_error,
    run_benchmark,
    scenario_sweep,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DegenerateError,
    DimensionError,
    DomainError,
    InvestGameError,
    NetworkError,
    OracleError,
    SolverError,
)
from .market import (
    MarketParams,
    PricePanel,
    compute_kappa,
    estimate_gbm,
    excess_returns,
    five_stock_market,
    load_market,
    read_price_csv,
    save_market,
    two_stock_market,
)
from .montecarlo import SimConfig, SimResult, estimate_moments, simulate
from .network import (
    InfluenceNetwork,
    homogeneous,
    is_homogeneous,
    leader_network,
    load_network,
    random_network,
    save_network,
    validate,
)
from .solver import (
    AgentParams,
    GameSolution,
    OracleResult,
    SolverConfig,
    assemble_U,
    eta_update,
    first_order_residual,
    investment_opinion,
    oracle_best_response,
    solve,
)
from .strategy import (
    StrategyCoeffs,
    WealthDist,
    average_deviation,
    average_followee,
    evaluate,
    exponential_utility,
    objective_functional,
    rational_strategy,
    terminal_wealth_dist,
    time_grid,
)

__all__ = [
    "AgentParams",
    "AsymptoticResult",
    "BenchRow",
    "BenchSpec",
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "DegenerateError",
    "DimensionError",
    "DomainError",
    "GameSolution",
    "InfluenceNetwork",
    "InvestGameError",
    "MarketParams",
    "NetworkError",
    "OracleError",
    "OracleResult",
    "PricePanel",
    "SimConfig",
    "SimResult",
    "SolverConfig",
    "SolverError",
    "StrategyCoeffs",
    "SweepResult",
    "WealthDist",
    "assemble_U",
    "asymptotic_alpha",
    "asymptotic_fixed_point",
    "asymptotic_report",
    "asymptotic_strategy",
    "average_deviation",
    "average_followee",
    "compare_terminal_wealth",
    "compute_kappa",
    "estimate_gbm",
    "estimate_moments",
    "eta_update",
    "evaluate",
    "excess_returns",
    "exponential_utility",
    "first_order_residual",
    "five_stock_market",
    "homogeneous",
    "investment_opinion",
    "is_homogeneous",
    "leader_network",
    "limit_U",
    "load_market",
    "load_network",
    "objective_functional",
    "oracle_best_response",
    "random_network",
    "rational_strategy",
    "read_price_csv",
    "relative_error",
    "run_benchmark",
    "save_market",
    "save_network",
    "scenario_sweep",
    "simulate",
    "solve",
    "terminal_wealth_dist",
    "time_grid",
    "two_stock_market",
    "validate",
    "weight_V",
]
