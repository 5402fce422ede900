"""Infinite-influence limits and wealth comparisons.

As every influence coefficient grows without bound (homogeneous
influence), all strategies collapse onto one asymptotic strategy: the
Merton strategy of a fictitious "social average" agent whose risk
aversion is the eta-weighted mean ``alpha_tilde = sum(eta alpha) /
sum(eta)``.  Because the etas themselves depend on the common limit
strategy, ``alpha_tilde`` is computed here as a scalar fixed point.

For finite influence, each agent's equilibrium strategy is an exact
matrix combination ``V_j`` of their own rational strategy and the
asymptotic one; ``weight_V`` recovers that weight from a solved
equilibrium.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateError, DomainError
from .market import MarketParams
from .network import InfluenceNetwork, is_homogeneous
from .strategy import StrategyCoeffs, WealthDist, rational_strategy, terminal_wealth_dist


@dataclass
class AsymptoticResult:
    """Infinite-influence limit: the social-average risk aversion, the
    common limit strategy, the etas at the limit, and the limiting
    influence-weight matrix."""

    alpha_tilde: float
    coeffs: StrategyCoeffs
    etas: np.ndarray
    U_limit: np.ndarray
    homogeneous_hypothesis: bool = True


def asymptotic_alpha(etas, alphas) -> float:
    """Eta-weighted average risk aversion ``sum(eta a) / sum(eta)``."""
    etas = np.asarray(etas, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if np.any(etas <= 0):
        raise DomainError("integral constants must be positive")
    if np.any(alphas <= 0):
        raise DomainError("risk aversions must be positive")
    return float((etas @ alphas) / etas.sum())


def asymptotic_strategy(alpha_tilde: float, market: MarketParams) -> StrategyCoeffs:
    """The common limit strategy, a Merton strategy at ``alpha_tilde``."""
    return rational_strategy(alpha_tilde, market)


def limit_U(etas, alphas, m: int) -> np.ndarray:
    """Limiting influence-weight matrix: every block row carries the same
    weights ``eta_i alpha_i / sum(eta alpha)`` on the identity, so each
    block row sums to the identity."""
    etas = np.asarray(etas, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if np.any(etas <= 0) or np.any(alphas <= 0):
        raise DomainError("etas and alphas must be positive")
    weights = etas * alphas
    weights = weights / weights.sum()
    n = weights.shape[0]
    return np.kron(np.tile(weights, (n, 1)), np.eye(m))


def asymptotic_fixed_point(
    market: MarketParams,
    agents,
    network: InfluenceNetwork | None = None,
    tol: float = 1e-12,
    max_iters: int = 1000,
) -> AsymptoticResult:
    """Compute the infinite-influence limit for a set of agents.

    Iterates alpha_tilde -> common strategy -> etas -> alpha_tilde from
    the plain mean of the risk aversions until successive values agree
    to ``tol``.  The limit is derived under homogeneous influence; a
    non-homogeneous ``network`` is accepted but flagged (and warned
    about) as outside that hypothesis.
    """
    alphas = np.array([a.alpha for a in agents])
    xs = np.array([a.x0 for a in agents])
    homogeneous_ok = True
    if network is not None and not is_homogeneous(network):
        homogeneous_ok = False
        warnings.warn(
            "asymptotic limit requested for a non-homogeneous influence network; "
            "the limit below assumes homogeneous influence",
            RuntimeWarning,
            stacklevel=2,
        )
    r, T = market.r, market.T
    kappa = market.kappa
    growth = np.exp(r * T)

    def etas_at(alpha_tilde):
        # etas of the common strategy c = Sigma^{-1} nu / alpha_tilde:
        # nu'c = kappa/alpha_tilde and c'Sigma c = kappa/alpha_tilde^2
        return np.exp(
            -alphas * xs * growth
            - alphas * T * kappa / alpha_tilde
            + 0.5 * alphas**2 * T * kappa / alpha_tilde**2
        )

    at = float(alphas.mean())
    for _ in range(max_iters):
        new = asymptotic_alpha(etas_at(at), alphas)
        if abs(new - at) < tol:
            at = new
            break
        at = new
    else:
        raise ConvergenceError(
            f"asymptotic risk aversion did not settle to {tol:g} in {max_iters} iterations"
        )
    etas = etas_at(at)
    return AsymptoticResult(
        alpha_tilde=at,
        coeffs=asymptotic_strategy(at, market),
        etas=etas,
        U_limit=limit_U(etas, alphas, market.m),
        homogeneous_hypothesis=homogeneous_ok,
    )


def weight_V(U_row, alphas, alpha_tilde: float, j: int) -> np.ndarray:
    """Weight matrix placing agent ``j``'s equilibrium strategy between
    their rational strategy and the asymptotic one:

    ``V_j = (a_j^{-1} - at^{-1})^{-1} (sum_i a_i^{-1} U_ji - at^{-1} I)``.

    Undefined (raises :class:`DegenerateError`) when ``alpha_j`` equals
    ``alpha_tilde``.
    """
    alphas = np.asarray(alphas, dtype=float)
    aj = alphas[j]
    gap = 1.0 / aj - 1.0 / alpha_tilde
    if abs(gap) < 1e-12:
        raise DegenerateError(
            f"agent {j}: risk aversion {aj} coincides with the asymptotic value "
            f"{alpha_tilde}; the rational/asymptotic decomposition is undefined"
        )
    m = U_row[0].shape[0]
    weighted = sum(U_row[i] / alphas[i] for i in range(len(U_row)))
    return (weighted - np.eye(m) / alpha_tilde) / gap


def compare_terminal_wealth(
    agent, alpha_tilde: float, market: MarketParams
) -> tuple[WealthDist, WealthDist]:
    """Terminal-wealth distributions under the agent's rational strategy
    and under the asymptotic strategy.

    Both are Merton strategies, so mean and variance follow one formula:
    ``mean = x0 e^{rT} + kappa T / a`` and ``var = kappa T / a^2`` with
    ``a`` the respective risk aversion.  When ``kappa > 0`` the ordering
    in ``a`` is strict: the less risk-averse side has the larger mean
    and variance.
    """
    rational = terminal_wealth_dist(rational_strategy(agent.alpha, market), agent.x0, market)
    asym = terminal_wealth_dist(asymptotic_strategy(alpha_tilde, market), agent.x0, market)
    return rational, asym


def asymptotic_report(
    market: MarketParams,
    agents,
    limit: AsymptoticResult,
    solution=None,
) -> dict:
    """JSON-ready summary of the asymptotic analysis.

    Per agent: the Frobenius norm of the rational/asymptotic weight
    (``null`` when the decomposition is degenerate or no solved
    equilibrium is supplied) and the two terminal-wealth distributions.
    """
    alphas = np.array([a.alpha for a in agents])
    per_agent = []
    for j, agent in enumerate(agents):
        v_norm = None
        if solution is not None:
            try:
                V = weight_V(solution.U_row(j), alphas, limit.alpha_tilde, j)
                v_norm = float(np.linalg.norm(V))
            except DegenerateError:
                v_norm = None
        rational, asym = compare_terminal_wealth(agent, limit.alpha_tilde, market)
        per_agent.append(
            {
                "V_norm": v_norm,
                "wealth_rational": {"mean": rational.mean, "variance": rational.variance},
                "wealth_asymptotic": {"mean": asym.mean, "variance": asym.variance},
            }
        )
    return {
        "alpha_tilde": limit.alpha_tilde,
        "asymptotic_coeffs": limit.coeffs.c.tolist(),
        "per_agent": per_agent,
    }
