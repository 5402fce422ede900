"""Strategy representation and evaluation.

Every equilibrium object in this game shares one time profile: a
strategy is ``P(t) = c * exp(r (t - T))`` for a constant coefficient
vector ``c``.  That makes coefficient algebra exact -- deviations,
terminal-wealth moments and the solver's integral constants all reduce
to closed forms in ``c``.  The closed forms are the primary code path;
sampled-strategy quadrature variants are kept alongside them as
independent oracles (and as the machinery behind the brute-force
best-response check).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import simpson

from .errors import DimensionError, DomainError
from .market import MarketParams
from .network import InfluenceNetwork

if TYPE_CHECKING:  # pragma: no cover
    from .solver import AgentParams

_T_TOL = 1e-9


@dataclass(frozen=True)
class StrategyCoeffs:
    """Coefficient vector ``c`` of a strategy ``P(t) = c e^{r(t-T)}``."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 1:
            raise DimensionError(f"coefficients must be a vector, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainError("strategy coefficients contain non-finite entries")
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class WealthDist:
    """Normal terminal-wealth distribution (mean, variance)."""

    mean: float
    variance: float


def rational_strategy(alpha: float, market: MarketParams) -> StrategyCoeffs:
    """The Merton optimum ``c = Sigma^{-1} nu / alpha`` an agent picks
    with zero influence coefficient.

    Raises :class:`DomainError` for ``alpha <= 0``.
    """
    if not (alpha > 0):
        raise DomainError(f"risk aversion must be positive, got {alpha}")
    return StrategyCoeffs(c=market.solve_Sigma(market.nu) / alpha)


def evaluate(strategy: StrategyCoeffs, t, market: MarketParams) -> np.ndarray:
    """Evaluate ``P(t) = c e^{r(t-T)}`` at a scalar or array of times.

    Returns an ``(m,)`` vector for scalar ``t`` and a ``(len(t), m)``
    array otherwise.  Times outside ``[0, T]`` raise
    :class:`DomainError`.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -_T_TOL) or np.any(t_arr > market.T + _T_TOL):
        raise DomainError(f"time {t!r} outside the horizon [0, {market.T}]")
    profile = np.exp(market.r * (t_arr - market.T))
    if t_arr.ndim == 0:
        return strategy.c * profile
    return np.outer(profile, strategy.c)


def average_followee(
    network: InfluenceNetwork, strategies: list[StrategyCoeffs], j: int
) -> StrategyCoeffs:
    """The influence-weighted average of followee strategies,
    ``q_j = sum_i W[j,i] c_i`` (exact in coefficient space because all
    strategies share the time profile)."""
    if len(strategies) != network.n:
        raise DimensionError(
            f"{len(strategies)} strategies for a {network.n}-agent network"
        )
    if not 0 <= j < network.n:
        raise DimensionError(f"agent index {j} out of range for n = {network.n}")
    C = np.stack([s.c for s in strategies])
    return StrategyCoeffs(c=network.W[j] @ C)


def average_deviation(p: StrategyCoeffs, q: StrategyCoeffs, market: MarketParams) -> float:
    """Exponentially weighted squared distance between two strategies.

    ``D = (1/2) int_0^T e^{2r(T-t)} |P - Q|^2 dt``; the weight cancels
    the shared time profile, so ``D = (T/2) |c_p - c_q|^2`` exactly.
    """
    if p.m != q.m:
        raise DimensionError(f"strategy dimensions differ: {p.m} vs {q.m}")
    diff = p.c - q.c
    return 0.5 * market.T * float(diff @ diff)


def average_deviation_sampled(P, Q, t, market: MarketParams) -> float:
    """Quadrature form of :func:`average_deviation` for strategies given
    as samples ``P[k] = P(t[k])`` on a time grid (Simpson rule).  Used as
    an independent oracle and by the best-response search."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    t = np.asarray(t, dtype=float)
    if P.shape != Q.shape or P.shape[0] != t.shape[0]:
        raise DimensionError(
            f"sampled strategies must share one grid: P {P.shape}, Q {Q.shape}, t {t.shape}"
        )
    weight = np.exp(2.0 * market.r * (market.T - t))
    integrand = weight * np.sum((P - Q) ** 2, axis=1)
    return 0.5 * float(simpson(integrand, x=t))


def exponential_utility(alpha: float, x: float) -> float:
    """CARA utility ``-exp(-alpha x) / alpha``."""
    if not (alpha > 0):
        raise DomainError(f"risk aversion must be positive, got {alpha}")
    return -np.exp(-alpha * x) / alpha


def terminal_wealth_dist(
    strategy: StrategyCoeffs, x0: float, market: MarketParams
) -> WealthDist:
    """Terminal-wealth distribution under a constant-coefficient strategy.

    Wealth at the horizon is normal with
    ``mean = x0 e^{rT} + T c'nu`` and ``variance = T c'Sigma c``
    (the exponential weights cancel the time profile, so the integrals
    collapse to products with ``T``).
    """
    c = strategy.c
    if c.shape[0] != market.m:
        raise DimensionError(f"{c.shape[0]}-asset strategy in a {market.m}-asset market")
    mean = x0 * np.exp(market.r * market.T) + market.T * float(market.nu @ c)
    variance = market.T * float(c @ market.Sigma @ c)
    return WealthDist(mean=float(mean), variance=float(variance))


def terminal_wealth_dist_sampled(P, t, x0: float, market: MarketParams) -> WealthDist:
    """Quadrature form of :func:`terminal_wealth_dist` for a sampled
    strategy (independent oracle)."""
    P = np.asarray(P, dtype=float)
    t = np.asarray(t, dtype=float)
    if P.shape[0] != t.shape[0]:
        raise DimensionError(f"grid mismatch: P {P.shape}, t {t.shape}")
    disc = np.exp(market.r * (market.T - t))
    mean = x0 * np.exp(market.r * market.T) + simpson(disc * (P @ market.nu), x=t)
    var = simpson(disc**2 * np.einsum("km,mn,kn->k", P, market.Sigma, P), x=t)
    return WealthDist(mean=float(mean), variance=float(var))


def objective_functional(P, Q, t, agent: "AgentParams", market: MarketParams) -> float:
    """The payoff an agent assigns to a sampled strategy.

    ``J = E[u(X(T))] - theta * D(P, Q)`` where the expected utility uses
    the lognormal identity
    ``E[-exp(-a X)/a] = -exp(-a mean + a^2 var / 2)/a`` for normal
    terminal wealth, and all integrals are Simpson quadrature on the
    shared grid.  This is the brute-force objective the best-response
    oracle maximizes; it never touches the closed-form solver path.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    t = np.asarray(t, dtype=float)
    if P.shape != Q.shape or P.shape[0] != t.shape[0]:
        raise DimensionError(
            f"sampled strategies must share one grid: P {P.shape}, Q {Q.shape}, t {t.shape}"
        )
    wealth = terminal_wealth_dist_sampled(P, t, agent.x0, market)
    a = agent.alpha
    expected_utility = -np.exp(-a * wealth.mean + 0.5 * a * a * wealth.variance) / a
    return float(expected_utility - agent.theta * average_deviation_sampled(P, Q, t, market))


def time_grid(market: MarketParams, points: int = 1001) -> np.ndarray:
    """Uniform grid on [0, T] for sampled-strategy oracles."""
    if points < 3:
        raise DimensionError(f"need at least 3 grid points, got {points}")
    return np.linspace(0.0, market.T, points)


def strategy_to_json(strategy: StrategyCoeffs, agent: int, market: MarketParams) -> dict:
    return {"agent": agent, "c": strategy.c.tolist(), "T": market.T, "r": market.r}


def write_strategy_csv(path, strategy: StrategyCoeffs, market: MarketParams, points: int = 101):
    """Write the strategy time series ``t,P_1,...,P_m`` at a uniform
    resolution (for plotting)."""
    t = time_grid(market, points)
    P = evaluate(strategy, t, market)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"P_{k + 1}" for k in range(strategy.m)])
        for tk, row in zip(t, P):
            writer.writerow([repr(float(tk))] + [repr(float(v)) for v in row])
