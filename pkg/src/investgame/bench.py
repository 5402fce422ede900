"""Accuracy/efficiency benchmarks and scenario sweeps.

``run_benchmark`` reproduces the solver-variant comparison at desk
scale: for seeded random populations it measures each approximate
variant's relative error against the exact solver and the median wall
time over repeated runs.  ``scenario_sweep`` solves one population
across a ladder of influence strengths plus the infinite-influence
limit, producing the data behind strategy/wealth comparison plots.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .asymptotics import AsymptoticResult, asymptotic_fixed_point
from .errors import DimensionError, DomainError, InvestGameError
from .market import MarketParams
from .network import InfluenceNetwork, random_network
from .solver import AgentParams, GameSolution, SolverConfig, solve
from .strategy import StrategyCoeffs, rational_strategy


def relative_error(
    exact: list[StrategyCoeffs], approx: list[StrategyCoeffs], market: MarketParams
) -> float:
    """Mean normalized squared L2 distance between two strategy sets.

    The time-profile factor ``int_0^T e^{2r(t-T)} dt`` cancels between
    numerator and denominator, so the measure reduces to
    ``mean_j |c_j - chat_j|^2 / |c_j|^2``.  Undefined when any exact
    strategy is identically zero.
    """
    if len(exact) != len(approx):
        raise DimensionError(f"{len(exact)} exact vs {len(approx)} approximate strategies")
    total = 0.0
    for c_exact, c_approx in zip(exact, approx):
        if c_exact.m != c_approx.m:
            raise DimensionError("strategy dimensions differ")
        denom = float(c_exact.c @ c_exact.c)
        if denom == 0.0:
            raise DomainError("relative error undefined for a zero exact strategy")
        diff = c_exact.c - c_approx.c
        total += float(diff @ diff) / denom
    return total / len(exact)


def relative_error_sampled(exact, approx, t, market: MarketParams) -> float:
    """Quadrature form of :func:`relative_error` on sampled strategies
    (Simpson rule); oracle for the coefficient-space reduction."""
    t = np.asarray(t, dtype=float)
    total = 0.0
    for P, Phat in zip(exact, approx):
        P = np.asarray(P, dtype=float)
        Phat = np.asarray(Phat, dtype=float)
        num = simpson(np.sum((P - Phat) ** 2, axis=1), x=t)
        den = simpson(np.sum(P**2, axis=1), x=t)
        if den == 0.0:
            raise DomainError("relative error undefined for a zero exact strategy")
        total += float(num / den)
    return total / len(exact)


@dataclass(frozen=True)
class BenchSpec:
    """Benchmark sweep description: population sizes, parameter ranges,
    sampling intervals, and timing repeats."""

    n_values: tuple = (10, 50, 100)
    theta_range: tuple = (1e-5, 1e-4)
    alpha_range: tuple = (0.1, 0.5)
    x_range: tuple = (1.0, 5.0)
    delta_u_values: tuple = (1e-3, 1e-1)
    seed: int = 0
    repeats: int = 5
    eps: float = 1e-10

    def __post_init__(self):
        for name in ("theta_range", "alpha_range", "x_range"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi):
                raise DomainError(f"{name} must satisfy 0 <= lo <= hi, got ({lo}, {hi})")
        if len(self.n_values) == 0 or min(self.n_values) < 1:
            raise DomainError(f"n_values must be nonempty positive, got {self.n_values}")
        if self.repeats < 1:
            raise DomainError(f"repeats must be >= 1, got {self.repeats}")


@dataclass
class BenchRow:
    """One benchmark cell; ``error`` records a per-cell failure instead
    of aborting the sweep."""

    n: int
    variant: str
    theta_range: str
    delta_u: str
    relative_error: float | None
    wall_time_s: float | None
    error: str | None = None


def random_population(
    n: int,
    spec: BenchSpec,
    seed: int,
) -> tuple[list[AgentParams], InfluenceNetwork]:
    """Seeded random agents and influence network for one bench cell."""
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(*spec.alpha_range, size=n)
    xs = rng.uniform(*spec.x_range, size=n)
    thetas = rng.uniform(*spec.theta_range, size=n)
    agents = [AgentParams(alpha=a, theta=th, x0=x) for a, th, x in zip(alphas, thetas, xs)]
    network = random_network(n, seed=seed + 1)
    return agents, network


def _variant_configs(spec: BenchSpec):
    """(label, delta_u label, SolverConfig) triples for one sweep cell."""
    variants = [
        ("Base", "-", SolverConfig.base(eps=spec.eps)),
        ("FastRect", "-", SolverConfig.fast(eps=spec.eps)),
    ]
    for du in spec.delta_u_values:
        variants.append(
            (
                "Base+Uhat",
                f"{du:g}",
                SolverConfig(eps=spec.eps, u_mode="taylor", eta_mode="quadrature"),
            )
        )
        variants.append(
            (
                "Base+etahat",
                f"{du:g}",
                SolverConfig(eps=spec.eps, u_mode="exact", eta_mode="sampled", delta_u=du),
            )
        )
        variants.append(
            (
                "Fast",
                f"{du:g}",
                SolverConfig(eps=spec.eps, u_mode="taylor", eta_mode="sampled", delta_u=du),
            )
        )
    return variants


def _timed_solve(market, agents, network, config, repeats):
    """Median wall time over ``repeats`` warm runs; returns (solution, time)."""
    solution = solve(market, agents, network, config)  # warm-up, also the result
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        solve(market, agents, network, config)
        times.append(time.perf_counter() - t0)
    return solution, float(np.median(times))


def run_benchmark(spec: BenchSpec, market: MarketParams) -> list[BenchRow]:
    """Run the solver-variant comparison over ``spec.n_values``.

    Every cell reports the relative error against the exact ("Base")
    solution of the same instance and the median wall time.  Solver
    failures are recorded in-row.
    """
    theta_label = f"[{spec.theta_range[0]:g},{spec.theta_range[1]:g}]"
    rows = []
    for idx, n in enumerate(spec.n_values):
        agents, network = random_population(n, spec, seed=spec.seed + 1000 * idx)
        base_solution = None
        for label, du_label, config in _variant_configs(spec):
            try:
                solution, wall = _timed_solve(market, agents, network, config, spec.repeats)
                if label == "Base":
                    base_solution = solution
                re = (
                    relative_error(base_solution.coeffs, solution.coeffs, market)
                    if base_solution is not None
                    else None
                )
                rows.append(BenchRow(n, label, theta_label, du_label, re, wall))
            except InvestGameError as exc:
                rows.append(BenchRow(n, label, theta_label, du_label, None, None, str(exc)))
    return rows


@dataclass
class SweepResult:
    """Solutions across an influence ladder plus the two bracketing
    strategy sets (rational and asymptotic)."""

    thetas: list[float]
    solutions: list[GameSolution]
    rational: list[StrategyCoeffs]
    limit: AsymptoticResult


def scenario_sweep(
    thetas,
    market: MarketParams,
    agents: list[AgentParams],
    network: InfluenceNetwork,
    config: SolverConfig | None = None,
) -> SweepResult:
    """Solve the same population at several homogeneous influence levels.

    Each entry of ``thetas`` replaces every agent's influence
    coefficient; the rational strategies (theta = 0) and the
    infinite-influence limit bracket the ladder.
    """
    cfg = config if config is not None else SolverConfig()
    solutions = []
    for theta in thetas:
        if theta < 0:
            raise DomainError(f"influence coefficients must be >= 0, got {theta}")
        swept = [AgentParams(alpha=a.alpha, theta=float(theta), x0=a.x0) for a in agents]
        solutions.append(solve(market, swept, network, cfg))
    rational = [rational_strategy(a.alpha, market) for a in agents]
    limit = asymptotic_fixed_point(market, agents, network=network)
    return SweepResult(thetas=[float(t) for t in thetas], solutions=solutions, rational=rational, limit=limit)


def rows_to_csv(rows: list[BenchRow], path):
    """Write benchmark rows as ``n,variant,theta_range,delta_u,re,time_s``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "variant", "theta_range", "delta_u", "re", "time_s", "error"])
        for row in rows:
            writer.writerow(
                [
                    row.n,
                    row.variant,
                    row.theta_range,
                    row.delta_u,
                    "" if row.relative_error is None else repr(row.relative_error),
                    "" if row.wall_time_s is None else repr(row.wall_time_s),
                    row.error or "",
                ]
            )


def rows_to_markdown(rows: list[BenchRow]) -> str:
    """Render benchmark rows as a Markdown table."""
    out = io.StringIO()
    out.write("| n | variant | theta range | delta_u | relative error | time (s) |\n")
    out.write("|---|---------|-------------|---------|----------------|----------|\n")
    for row in rows:
        re_txt = "-" if row.relative_error is None else f"{row.relative_error:.3e}"
        t_txt = "-" if row.wall_time_s is None else f"{row.wall_time_s:.4f}"
        if row.error:
            re_txt = f"error: {row.error}"
        out.write(
            f"| {row.n} | {row.variant} | {row.theta_range} | {row.delta_u} | {re_txt} | {t_txt} |\n"
        )
    return out.getvalue()
