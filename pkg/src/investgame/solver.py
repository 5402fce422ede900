"""Equilibrium solvers for the mutual-influence investment game.

The Nash equilibrium has a fixed-point structure in the per-agent
integral constants ``eta_j``: given ``eta``, each agent's investment
opinion ``Z_j = (I + theta_j/(alpha_j eta_j) Sigma^{-1})^{-1}`` weighs
the agent's own Merton strategy against the influence-weighted average
of the others, the stacked strategies solve the block-linear system

    [I_mn - S (W kron I_m)] c = Z cbar,      S = I - Z,

and the resulting strategies feed back into ``eta``.  The solver
iterates this map from the rational-solution initializer
``eta_j = exp(-alpha_j x_j e^{rT} - kappa T / 2)`` until the sup-norm
change in ``eta`` drops below a tolerance.

Two axes of approximation are exposed:

* ``u_mode``: ``"exact"`` solves the block system; ``"taylor"`` uses the
  first-order expansion ``[I + S (W kron I_m)] Z``, valid for weak
  influence only.
* ``eta_mode``: ``"closed_form"`` (exact, the default),
  ``"quadrature"`` (adaptive quadrature of the defining integrals,
  kept as an independent slow oracle), ``"sampled"`` (right Riemann sum
  on a uniform grid of spacing ``delta_u``), and ``"right_rectangle"``
  (one-point right-rectangle rule, exact here because the integrands are
  constant in time under the shared strategy profile).

Independent verification lives in :func:`first_order_residual` (the
stationarity condition of each agent's payoff) and
:func:`oracle_best_response` (derivative-free maximization of the
brute-force payoff on a time grid).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import block_diag
from scipy.optimize import minimize

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    OracleError,
    SolverError,
)
from .market import MarketParams
from .network import InfluenceNetwork
from .strategy import StrategyCoeffs, evaluate, rational_strategy, time_grid

ETA_MODES = ("closed_form", "quadrature", "sampled", "right_rectangle")
U_MODES = ("exact", "taylor")

# quadrature tolerance for the eta integrals (scipy.integrate.quad default)
QUAD_TOL = 1.49e-8


@dataclass(frozen=True)
class AgentParams:
    """One agent: risk aversion ``alpha > 0``, influence coefficient
    ``theta >= 0``, initial wealth ``x0``."""

    alpha: float
    theta: float = 0.0
    x0: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"risk aversion must be positive and finite, got {self.alpha}")
        if not (np.isfinite(self.theta) and self.theta >= 0):
            raise DomainError(f"influence coefficient must be >= 0 and finite, got {self.theta}")
        if not np.isfinite(self.x0):
            raise DomainError(f"initial wealth must be finite, got {self.x0}")


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-point solver settings.

    ``damping`` in [0, 1) mixes the previous eta iterate into the update
    (0 reproduces the undamped iteration); it is off by default and only
    needed for pathological influence strengths.  ``taylor_theta_warn``
    is the theta level above which requesting the Taylor U approximation
    emits a warning.
    """

    eps: float = 1e-10
    max_iters: int = 200
    eta_mode: str = "closed_form"
    u_mode: str = "exact"
    delta_u: float | None = None
    damping: float = 0.0
    taylor_theta_warn: float = 1e-6

    def __post_init__(self):
        if not (self.eps > 0):
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.eta_mode not in ETA_MODES:
            raise ConfigError(f"eta_mode must be one of {ETA_MODES}, got {self.eta_mode!r}")
        if self.u_mode not in U_MODES:
            raise ConfigError(f"u_mode must be one of {U_MODES}, got {self.u_mode!r}")
        if self.eta_mode == "sampled" and not (self.delta_u and self.delta_u > 0):
            raise ConfigError("sampled eta mode requires a positive delta_u")
        if not (0.0 <= self.damping < 1.0):
            raise ConfigError(f"damping must lie in [0, 1), got {self.damping}")

    @classmethod
    def base(cls, **overrides) -> "SolverConfig":
        """Exact solver: block-system U and adaptive-quadrature eta."""
        overrides.setdefault("eta_mode", "quadrature")
        overrides.setdefault("u_mode", "exact")
        return cls(**overrides)

    @classmethod
    def fast(cls, **overrides) -> "SolverConfig":
        """Fast solver: exact U with one-point right-rectangle eta."""
        overrides.setdefault("eta_mode", "right_rectangle")
        overrides.setdefault("u_mode", "exact")
        return cls(**overrides)

    @classmethod
    def fast_taylor(cls, delta_u: float = 1e-3, **overrides) -> "SolverConfig":
        """Fully approximate solver: Taylor U and sampled-sum eta."""
        overrides.setdefault("eta_mode", "sampled")
        overrides.setdefault("u_mode", "taylor")
        overrides.setdefault("delta_u", delta_u)
        return cls(**overrides)


@dataclass
class GameSolution:
    """Converged equilibrium with diagnostics.

    ``eta`` holds the integral constants of the returned strategies;
    ``trace`` is the sequence of sup-norm eta changes per iteration.
    The influence-weight matrix ``U`` is assembled lazily from the
    stored opinion blocks on first access.
    """

    eta: np.ndarray
    Z_blocks: list[np.ndarray]
    coeffs: list[StrategyCoeffs]
    iters: int
    converged: bool
    residual: float
    trace: np.ndarray
    network: InfluenceNetwork
    u_mode: str
    _U: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def m(self) -> int:
        return self.coeffs[0].m

    @property
    def U(self) -> np.ndarray:
        if self._U is None:
            self._U = assemble_U(self.Z_blocks, self.network, self.u_mode)
        return self._U

    def U_block(self, j: int, i: int) -> np.ndarray:
        m = self.m
        return self.U[j * m : (j + 1) * m, i * m : (i + 1) * m]

    def U_row(self, j: int) -> list[np.ndarray]:
        return [self.U_block(j, i) for i in range(self.n)]

    def coeff_matrix(self) -> np.ndarray:
        """Strategies stacked as an (n, m) array."""
        return np.stack([s.c for s in self.coeffs])

    def to_json_dict(self) -> dict:
        return {
            "eta": self.eta.tolist(),
            "coeffs": [s.c.tolist() for s in self.coeffs],
            "iters": self.iters,
            "converged": self.converged,
            "residual": self.residual,
            "delta_eta_trace": self.trace.tolist(),
            "u_mode": self.u_mode,
        }


def investment_opinion(alpha: float, eta: float, theta: float, Sigma: np.ndarray) -> np.ndarray:
    """Opinion matrix ``Z = (I + theta/(alpha eta) Sigma^{-1})^{-1}``.

    Computed as the solve ``(Sigma + beta I) Z = Sigma`` with
    ``beta = theta / (alpha eta)``, which avoids forming ``Sigma^{-1}``
    and keeps Z symmetric.  ``theta = 0`` gives the identity; large
    ``theta`` drives Z to zero.
    """
    if not (alpha > 0 and eta > 0 and theta >= 0):
        raise DomainError(
            f"need alpha > 0, eta > 0, theta >= 0; got alpha={alpha}, eta={eta}, theta={theta}"
        )
    Sigma = np.asarray(Sigma, dtype=float)
    m = Sigma.shape[0]
    if theta == 0.0:
        return np.eye(m)
    beta = theta / (alpha * eta)
    try:
        Z = np.linalg.solve(Sigma + beta * np.eye(m), Sigma)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"covariance not invertible: {exc}") from exc
    # exact Z is symmetric (Sigma and the shift share eigenvectors)
    return 0.5 * (Z + Z.T)


def _system_matrix(Z_stack: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Assemble ``A = I_mn - S (W kron I_m)`` blockwise: block (j, i) is
    ``delta_ji I_m - W[j,i] S_j`` with ``S_j = I - Z_j``."""
    n, m, _ = Z_stack.shape
    S = np.eye(m)[None, :, :] - Z_stack
    A = -np.einsum("ji,jab->jaib", W, S).reshape(n * m, n * m)
    A[np.diag_indices(n * m)] += 1.0
    return A


def _spectral_radius(Z_stack: np.ndarray, W: np.ndarray) -> float:
    n, m, _ = Z_stack.shape
    S = np.eye(m)[None, :, :] - Z_stack
    M = np.einsum("ji,jab->jaib", W, S).reshape(n * m, n * m)
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def assemble_U(
    Z_blocks, network: InfluenceNetwork, mode: str = "exact"
) -> np.ndarray:
    """Influence-weight matrix mapping stacked rational strategies to
    stacked equilibrium strategies.

    ``exact`` solves ``[I - S (W kron I_m)] U = Z``; ``taylor`` returns
    the first-order expansion ``[I + S (W kron I_m)] Z``.  In exact mode
    every block row of U sums to the identity.
    """
    if mode not in U_MODES:
        raise ConfigError(f"u_mode must be one of {U_MODES}, got {mode!r}")
    Z_stack = np.stack([np.asarray(Z, dtype=float) for Z in Z_blocks])
    n, m, _ = Z_stack.shape
    if n != network.n:
        raise DimensionError(f"{n} opinion blocks for a {network.n}-agent network")
    W = network.W
    Zbd = block_diag(*Z_stack)
    if mode == "taylor":
        S = np.eye(m)[None, :, :] - Z_stack
        SWZ = np.einsum("ji,jab,ibc->jaic", W, S, Z_stack).reshape(n * m, n * m)
        return Zbd + SWZ
    A = _system_matrix(Z_stack, W)
    try:
        U = np.linalg.solve(A, Zbd)
    except np.linalg.LinAlgError as exc:
        rho = _spectral_radius(Z_stack, W)
        raise SolverError(
            f"singular influence system (spectral radius of S(W kron I) = {rho:.6g}): {exc}"
        ) from exc
    return U


def eta_update(
    coeffs: StrategyCoeffs,
    agent: AgentParams,
    market: MarketParams,
    mode: str = "closed_form",
    delta_u: float | None = None,
) -> float:
    """Integral constant of a strategy,

    ``eta = exp(-a x0 e^{rT} - a I1 + a^2 I2 / 2)`` with
    ``I1 = int e^{r(T-t)} nu' P(t) dt`` and
    ``I2 = int e^{2r(T-t)} P(t)' Sigma P(t) dt``.

    Under the shared time profile both integrands are constant, so the
    closed form ``I1 = T nu'c``, ``I2 = T c'Sigma c`` is exact, and so is
    the one-point right-rectangle rule.  The quadrature and sampled modes
    evaluate the strategy pointwise and integrate numerically; they exist
    as independent oracles and as the approximation whose cost/accuracy
    the benchmarks measure.
    """
    a, x0 = agent.alpha, agent.x0
    r, T, nu, Sigma = market.r, market.T, market.nu, market.Sigma
    c = coeffs.c
    log_zeta = -a * x0 * np.exp(r * T)
    if mode == "closed_form":
        i1 = T * float(nu @ c)
        i2 = T * float(c @ Sigma @ c)
    elif mode == "right_rectangle":
        p_end = evaluate(coeffs, T, market)
        i1 = T * float(nu @ p_end)
        i2 = T * float(p_end @ Sigma @ p_end)
    elif mode == "quadrature":
        def drift_part(t):
            p = evaluate(coeffs, t, market)
            return np.exp(r * (T - t)) * float(nu @ p)

        def variance_part(t):
            p = evaluate(coeffs, t, market)
            return np.exp(2.0 * r * (T - t)) * float(p @ Sigma @ p)

        i1, _ = quad(drift_part, 0.0, T, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        i2, _ = quad(variance_part, 0.0, T, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
    elif mode == "sampled":
        if delta_u is None or delta_u <= 0:
            raise ConfigError("sampled eta mode requires a positive delta_u")
        steps = T / delta_u
        k = round(steps)
        if abs(steps - k) > 1e-9 or k < 1:
            raise ConfigError(f"delta_u = {delta_u} does not divide the horizon T = {T}")
        u = delta_u * np.arange(1, k + 1)
        P = evaluate(coeffs, u, market)
        i1 = float(np.sum(np.exp(r * (T - u)) * (P @ nu))) * delta_u
        i2 = (
            float(np.sum(np.exp(2.0 * r * (T - u)) * np.einsum("ka,ab,kb->k", P, Sigma, P)))
            * delta_u
        )
    else:
        raise ConfigError(f"eta_mode must be one of {ETA_MODES}, got {mode!r}")
    return float(np.exp(log_zeta - a * i1 + 0.5 * a * a * i2))


def _combine_strategies(Z_stack, W, rational_mat, u_mode):
    """One strategy update: stacked solve of the opinion-weighted system
    (exact) or its first-order expansion (taylor).  Returns an (n, m)
    coefficient matrix."""
    n, m, _ = Z_stack.shape
    Y = np.einsum("jab,jb->ja", Z_stack, rational_mat)
    if u_mode == "taylor":
        S = np.eye(m)[None, :, :] - Z_stack
        agg = W @ Y
        return Y + np.einsum("jab,jb->ja", S, agg)
    A = _system_matrix(Z_stack, W)
    try:
        x = np.linalg.solve(A, Y.reshape(n * m))
    except np.linalg.LinAlgError as exc:
        rho = _spectral_radius(Z_stack, W)
        raise SolverError(
            f"singular influence system (spectral radius of S(W kron I) = {rho:.6g}): {exc}"
        ) from exc
    return x.reshape(n, m)


def solve(
    market: MarketParams,
    agents: list[AgentParams],
    network: InfluenceNetwork,
    config: SolverConfig | None = None,
    eta0: np.ndarray | None = None,
) -> GameSolution:
    """Solve for the Nash-equilibrium strategies of all agents.

    Iterates opinion blocks -> stacked strategy solve -> integral
    constants until the sup-norm eta change drops below ``config.eps``.
    ``eta0`` overrides the rational-solution initializer (useful for
    multi-start uniqueness checks).

    Raises
    ------
    ConvergenceError
        If ``config.max_iters`` is exhausted; the exception carries the
        last iterate in ``partial``.
    SolverError
        If the stacked influence system is singular.
    """
    cfg = config if config is not None else SolverConfig()
    n = len(agents)
    if n == 0:
        raise DimensionError("need at least one agent")
    if network.n != n:
        raise DimensionError(f"{n} agents for a {network.n}-agent network")
    alphas = np.array([a.alpha for a in agents])
    thetas = np.array([a.theta for a in agents])
    xs = np.array([a.x0 for a in agents])
    if cfg.u_mode == "taylor" and thetas.max() > cfg.taylor_theta_warn:
        warnings.warn(
            f"Taylor U approximation with max theta = {thetas.max():.3g} above "
            f"{cfg.taylor_theta_warn:.3g}; the first-order expansion may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    W = network.W
    b = market.solve_Sigma(market.nu)
    kappa = max(float(market.nu @ b), 0.0)
    rational_mat = b[None, :] / alphas[:, None]
    zeta = np.exp(-alphas * xs * np.exp(market.r * market.T))

    def build_solution(eta_vec, Z_stack, coeff_mat, iters, converged, residual, trace):
        return GameSolution(
            eta=np.asarray(eta_vec, dtype=float).copy(),
            Z_blocks=[Z_stack[j].copy() for j in range(n)],
            coeffs=[StrategyCoeffs(c=coeff_mat[j].copy()) for j in range(n)],
            iters=iters,
            converged=converged,
            residual=residual,
            trace=np.asarray(trace, dtype=float),
            network=network,
            u_mode=cfg.u_mode,
        )

    if kappa == 0.0:
        # zero excess returns: every rational and equilibrium strategy is 0
        Z_stack = np.stack(
            [investment_opinion(alphas[j], zeta[j], thetas[j], market.Sigma) for j in range(n)]
        )
        coeff_mat = np.zeros((n, market.m))
        return build_solution(zeta, Z_stack, coeff_mat, 0, True, 0.0, [])

    eta = zeta * np.exp(-0.5 * kappa * market.T) if eta0 is None else np.asarray(eta0, dtype=float).copy()
    if eta.shape != (n,) or np.any(eta <= 0):
        raise ConfigError("eta0 must be a positive vector of length n")
    trace = []
    last = None
    for k in range(cfg.max_iters):
        Z_stack = np.stack(
            [investment_opinion(alphas[j], eta[j], thetas[j], market.Sigma) for j in range(n)]
        )
        coeff_mat = _combine_strategies(Z_stack, W, rational_mat, cfg.u_mode)
        eta_new = np.array(
            [
                eta_update(
                    StrategyCoeffs(c=coeff_mat[j]), agents[j], market, cfg.eta_mode, cfg.delta_u
                )
                for j in range(n)
            ]
        )
        if cfg.damping > 0.0:
            eta_new = (1.0 - cfg.damping) * eta_new + cfg.damping * eta
        delta = float(np.max(np.abs(eta_new - eta)))
        trace.append(delta)
        eta = eta_new
        last = (Z_stack, coeff_mat)
        if delta < cfg.eps:
            return build_solution(eta, Z_stack, coeff_mat, k + 1, True, delta, trace)
    partial = build_solution(eta, last[0], last[1], cfg.max_iters, False, trace[-1], trace)
    raise ConvergenceError(
        f"eta iteration did not reach {cfg.eps:g} within {cfg.max_iters} iterations "
        f"(last delta = {trace[-1]:.3g})",
        partial=partial,
    )


def first_order_residual(
    solution: GameSolution,
    market: MarketParams,
    agents: list[AgentParams],
    network: InfluenceNetwork,
) -> np.ndarray:
    """Stationarity residual of each agent's payoff at the solution.

    In coefficient space the optimality condition reads
    ``eta_j (nu - alpha_j Sigma c_j) = theta_j (c_j - q_j)`` with ``q_j``
    the influence-weighted average of the others' coefficients; the
    sup-norm of the mismatch is returned per agent.  Exact equilibria
    give zeros up to roundoff.
    """
    C = solution.coeff_matrix()
    Q = network.W @ C
    res = np.empty(solution.n)
    for j, agent in enumerate(agents):
        lhs = solution.eta[j] * (market.nu - agent.alpha * (market.Sigma @ C[j]))
        rhs = agent.theta * (C[j] - Q[j])
        res[j] = np.max(np.abs(lhs - rhs))
    return res


@dataclass
class OracleResult:
    """Best-response oracle output: fitted coefficients, the sup-norm
    mismatch of each fitted profile against its grid samples, and the
    number of best-response sweeps used."""

    coeffs: list[StrategyCoeffs]
    fit_residuals: np.ndarray
    rounds: int


def oracle_best_response(
    market: MarketParams,
    agents: list[AgentParams],
    network: InfluenceNetwork,
    grid_size: int = 61,
    tol: float = 1e-6,
    max_rounds: int = 200,
) -> OracleResult:
    """Brute-force equilibrium finder on a uniform time grid.

    Each agent's strategy is a free array of grid samples; one sweep
    maximizes every agent's quadrature payoff (via L-BFGS with numeric
    gradients, on the log of the negated payoff for conditioning) while
    the others are held fixed, Gauss-Seidel style.  Sweeps repeat until
    the largest sample movement falls below ``tol``.  Fitted coefficients
    come from a least-squares projection onto the exponential time
    profile; the fit residual exposes any profile violation.

    Intended for small instances (n <= 3, m <= 2); this path shares no
    code with the analytic solver beyond strategy evaluation.
    """
    from .strategy import objective_functional  # local import keeps the dependency one-way

    n = len(agents)
    if network.n != n:
        raise DimensionError(f"{n} agents for a {network.n}-agent network")
    t = time_grid(market, grid_size)
    profile = np.exp(market.r * (t - market.T))
    m = market.m
    P = np.stack([evaluate(rational_strategy(a.alpha, market), t, market) for a in agents])

    def neg_log_payoff(flat, j, Q):
        Pj = flat.reshape(grid_size, m)
        value = objective_functional(Pj, Q, t, agents[j], market)
        # payoff is strictly negative; minimize log(-J) for conditioning
        return np.log(-value)

    rounds_used = None
    for sweep in range(max_rounds):
        max_shift = 0.0
        for j in range(n):
            Q = np.einsum("i,ikm->km", network.W[j], P)
            res = minimize(
                neg_log_payoff,
                P[j].ravel(),
                args=(j, Q),
                method="L-BFGS-B",
                options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-11},
            )
            if not np.all(np.isfinite(res.x)):
                raise OracleError(f"best response for agent {j} diverged")
            Pj_new = res.x.reshape(grid_size, m)
            max_shift = max(max_shift, float(np.max(np.abs(Pj_new - P[j]))))
            P[j] = Pj_new
        if max_shift < tol:
            rounds_used = sweep + 1
            break
    if rounds_used is None:
        raise OracleError(
            f"best-response sweeps did not settle below {tol:g} in {max_rounds} rounds"
        )
    denom = float(profile @ profile)
    coeffs = []
    fit_residuals = np.empty(n)
    for j in range(n):
        c = (profile @ P[j]) / denom
        fit_residuals[j] = np.max(np.abs(P[j] - np.outer(profile, c)))
        coeffs.append(StrategyCoeffs(c=c))
    return OracleResult(coeffs=coeffs, fit_residuals=fit_residuals, rounds=rounds_used)
