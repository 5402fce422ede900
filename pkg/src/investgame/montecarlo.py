"""Monte Carlo validation of the wealth dynamics.

Simulates the wealth SDE ``dX = r X dt + P(t)'(nu dt + sigma dB)`` for
all agents simultaneously under Euler-Maruyama.  Every agent is driven
by the *same* Brownian increments along a path -- they trade in one
market -- which is what makes cross-agent comparisons meaningful.

Paths are processed in fixed-size chunks, each with its own RNG stream
derived from ``(seed, chunk_index)``.  The chunk layout depends only on
the inputs, so the output is bit-identical no matter how many worker
threads process the chunks.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DimensionError
from .market import MarketParams
from .strategy import StrategyCoeffs

_CHUNK = 16384


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``dt = None`` resolves to ``1e-3 * T`` at simulation time.  ``n_jobs``
    only controls how many threads process path chunks; it never changes
    the sampled numbers.
    """

    paths: int = 100_000
    dt: float | None = None
    seed: int = 0
    scheme: str = "euler_maruyama"
    n_jobs: int = 1

    def __post_init__(self):
        if self.paths < 1:
            raise ConfigError(f"paths must be >= 1, got {self.paths}")
        if self.dt is not None and not (self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.scheme != "euler_maruyama":
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.n_jobs < 1:
            raise ConfigError(f"n_jobs must be >= 1, got {self.n_jobs}")


@dataclass
class SimResult:
    """Per-agent terminal-wealth samples and moment estimates."""

    terminal_samples: np.ndarray  # (n_agents, paths)
    mean_hat: np.ndarray
    var_hat: np.ndarray
    stderr_mean: np.ndarray
    stderr_var: np.ndarray


def estimate_moments(samples) -> tuple[float, float, float, float]:
    """Unbiased sample mean and variance with their standard errors.

    The variance standard error uses the fourth-moment formula
    ``Var(s^2) = (m4 - s^4 (N-3)/(N-1)) / N``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.shape[0]
    if n < 2:
        raise DataError(f"need at least 2 samples, got {n}")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    centered = x - mean
    m4 = float(np.mean(centered**4))
    var_of_var = max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n
    return mean, var, float(np.sqrt(var / n)), float(np.sqrt(var_of_var))


def _resolve_steps(market: MarketParams, config: SimConfig) -> tuple[float, int]:
    dt = config.dt if config.dt is not None else 1e-3 * market.T
    if dt > market.T:
        raise ConfigError(f"dt = {dt} exceeds the horizon T = {market.T}")
    steps = market.T / dt
    k = round(steps)
    if abs(steps - k) > 1e-9 or k < 1:
        raise ConfigError(f"dt = {dt} does not divide the horizon T = {market.T}")
    return dt, k


def simulate(
    strategies: list[StrategyCoeffs],
    agents,
    market: MarketParams,
    config: SimConfig | None = None,
) -> SimResult:
    """Euler-Maruyama simulation of all agents' wealth to the horizon.

    ``strategies[j]`` is agent j's coefficient strategy and
    ``agents[j].x0`` the starting wealth.  Returns terminal samples of
    shape ``(n_agents, paths)`` plus moment estimates per agent.
    """
    cfg = config if config is not None else SimConfig()
    n = len(strategies)
    if n == 0 or len(agents) != n:
        raise DimensionError(f"{len(agents)} agents for {n} strategies")
    for s in strategies:
        if s.m != market.m:
            raise DimensionError(f"{s.m}-asset strategy in a {market.m}-asset market")
    dt, steps = _resolve_steps(market, cfg)
    r, T = market.r, market.T
    C = np.stack([s.c for s in strategies])  # (n, m)
    x0 = np.array([a.x0 for a in agents])
    drift = C @ market.nu  # (n,)
    Csig = C @ market.sigma  # (n, m)
    profile = np.exp(r * (dt * np.arange(steps) - T))  # left endpoints
    sqrt_dt = np.sqrt(dt)

    starts = list(range(0, cfg.paths, _CHUNK))
    out = np.empty((n, cfg.paths))

    def run_chunk(chunk_index: int):
        lo = starts[chunk_index]
        width = min(_CHUNK, cfg.paths - lo)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.seed, spawn_key=(chunk_index,))
        )
        X = np.repeat(x0[:, None], width, axis=1)
        for k in range(steps):
            pk = profile[k]
            dB = rng.standard_normal((width, market.m)) * sqrt_dt
            X += (r * X + drift[:, None] * pk) * dt + pk * (Csig @ dB.T)
        out[:, lo : lo + width] = X

    if cfg.n_jobs == 1 or len(starts) == 1:
        for idx in range(len(starts)):
            run_chunk(idx)
    else:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            list(pool.map(run_chunk, range(len(starts))))

    if cfg.paths >= 2:
        stats = np.array([estimate_moments(out[j]) for j in range(n)])
        mean_hat, var_hat, se_mean, se_var = stats.T
    else:
        mean_hat = out[:, 0].astype(float)
        var_hat = np.zeros(n)
        se_mean = np.zeros(n)
        se_var = np.zeros(n)
    return SimResult(
        terminal_samples=out,
        mean_hat=mean_hat,
        var_hat=var_hat,
        stderr_mean=se_mean,
        stderr_var=se_var,
    )


def write_sim_csv(path, result: SimResult):
    """Per-agent moment estimates: ``agent,mean,var,stderr_mean,stderr_var``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["agent", "mean", "var", "stderr_mean", "stderr_var"])
        for j in range(result.terminal_samples.shape[0]):
            writer.writerow(
                [
                    j,
                    repr(float(result.mean_hat[j])),
                    repr(float(result.var_hat[j])),
                    repr(float(result.stderr_mean[j])),
                    repr(float(result.stderr_var[j])),
                ]
            )


def write_samples_csv(path, result: SimResult):
    """Raw terminal-wealth dump, one row per path, one column per agent."""
    samples = result.terminal_samples
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"agent_{j}" for j in range(samples.shape[0])])
        for row in samples.T:
            writer.writerow([repr(float(v)) for v in row])
