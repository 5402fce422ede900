"""Market model: parameters, derived constants, and GBM estimation.

The game is played in a frictionless market of ``m`` risky assets whose
prices follow a geometric Brownian motion.  A market is summarized by the
riskless rate ``r``, the excess-return vector ``nu``, the volatility
factor ``sigma`` with covariance ``Sigma = sigma @ sigma.T``, and the
investment horizon ``T``.  The scalar ``kappa = nu' Sigma^{-1} nu``
appears throughout the equilibrium formulas.

All covariance solves go through a Cholesky factorization; a matrix that
fails to factor is rejected outright rather than regularized, because the
downstream equilibrium algebra silently degrades on near-singular input.
"""

from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DataError, DimensionError, DomainError

TRADING_DAYS_PER_YEAR = 252

_SYMMETRY_TOL = 1e-12


def _as_float_array(x, ndim, name):
    a = np.asarray(x, dtype=float)
    if a.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class MarketParams:
    """Immutable market description.

    Parameters
    ----------
    r : float
        Riskless interest rate per year.
    nu : (m,) array
        Excess return rates of the risky assets, per year.
    sigma : (m, m) array
        Volatility factor; drives the Brownian noise in simulation.
    Sigma : (m, m) array
        Covariance ``sigma @ sigma.T``; must be symmetric positive
        definite.
    T : float
        Investment horizon in years.

    Use :meth:`from_covariance` or :meth:`from_volatility` instead of the
    bare constructor so that ``sigma`` and ``Sigma`` stay consistent.
    """

    r: float
    nu: np.ndarray
    sigma: np.ndarray
    Sigma: np.ndarray
    T: float

    def __post_init__(self):
        nu = _as_float_array(self.nu, 1, "nu")
        sigma = _as_float_array(self.sigma, 2, "sigma")
        Sigma = _as_float_array(self.Sigma, 2, "Sigma")
        m = nu.shape[0]
        if sigma.shape != (m, m) or Sigma.shape != (m, m):
            raise DimensionError(
                f"inconsistent shapes: nu {nu.shape}, sigma {sigma.shape}, Sigma {Sigma.shape}"
            )
        if np.max(np.abs(Sigma - Sigma.T)) >= _SYMMETRY_TOL:
            raise DomainError("Sigma is not symmetric")
        if not np.isfinite(self.r):
            raise DomainError("interest rate must be finite")
        if not (np.isfinite(self.T) and self.T > 0):
            raise DomainError(f"horizon T must be positive, got {self.T}")
        if np.max(np.abs(sigma @ sigma.T - Sigma)) > 1e-10:
            raise DomainError("sigma @ sigma.T does not match Sigma")
        try:
            chol = cho_factor(Sigma, lower=True)
        except np.linalg.LinAlgError as exc:
            raise DomainError(f"Sigma is not positive definite: {exc}") from exc
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "_chol", chol)

    @classmethod
    def from_covariance(cls, r, nu, Sigma, T) -> "MarketParams":
        """Build a market from a covariance matrix; ``sigma`` is its
        (lower) Cholesky factor."""
        Sigma = _as_float_array(Sigma, 2, "Sigma")
        if np.max(np.abs(Sigma - Sigma.T)) >= _SYMMETRY_TOL:
            raise DomainError("Sigma is not symmetric")
        try:
            sigma = np.linalg.cholesky(Sigma)
        except np.linalg.LinAlgError as exc:
            raise DomainError(f"Sigma is not positive definite: {exc}") from exc
        return cls(r=r, nu=nu, sigma=sigma, Sigma=Sigma, T=T)

    @classmethod
    def from_volatility(cls, r, nu, sigma, T) -> "MarketParams":
        """Build a market from the volatility factor; ``Sigma = sigma sigma'``."""
        sigma = _as_float_array(sigma, 2, "sigma")
        return cls(r=r, nu=nu, sigma=sigma, Sigma=sigma @ sigma.T, T=T)

    @property
    def m(self) -> int:
        """Number of risky assets."""
        return self.nu.shape[0]

    def solve_Sigma(self, b: np.ndarray) -> np.ndarray:
        """Return ``Sigma^{-1} b`` via the cached Cholesky factorization."""
        return cho_solve(self._chol, np.asarray(b, dtype=float))

    @property
    def kappa(self) -> float:
        """The squared market price of risk, ``nu' Sigma^{-1} nu``."""
        return compute_kappa(self.Sigma, self.nu)


def compute_kappa(Sigma, nu) -> float:
    """Compute ``kappa = nu' Sigma^{-1} nu`` by Cholesky solve.

    Parameters
    ----------
    Sigma : (m, m) symmetric positive-definite covariance.
    nu : (m,) excess-return vector.

    Returns
    -------
    float
        Nonnegative; zero iff ``nu`` is the zero vector.

    Raises
    ------
    DimensionError
        If shapes are inconsistent.
    DomainError
        If ``Sigma`` is asymmetric or not positive definite.
    """
    Sigma = _as_float_array(Sigma, 2, "Sigma")
    nu = _as_float_array(nu, 1, "nu")
    if Sigma.shape[0] != Sigma.shape[1]:
        raise DimensionError(f"Sigma must be square, got shape {Sigma.shape}")
    if nu.shape[0] != Sigma.shape[0]:
        raise DimensionError(
            f"dimension mismatch: nu has {nu.shape[0]} entries, Sigma is {Sigma.shape[0]}x{Sigma.shape[1]}"
        )
    if np.max(np.abs(Sigma - Sigma.T)) >= _SYMMETRY_TOL:
        raise DomainError("Sigma is not symmetric")
    try:
        chol = cho_factor(Sigma, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"Sigma is singular or not positive definite: {exc}") from exc
    # quadratic form is >= 0 exactly; clamp away roundoff-level negatives
    return max(float(nu @ cho_solve(chol, nu)), 0.0)


def excess_returns(mu, r) -> np.ndarray:
    """Excess returns ``nu = mu - r * 1``."""
    mu = _as_float_array(mu, 1, "mu")
    return mu - float(r)


@dataclass(frozen=True)
class PricePanel:
    """A panel of daily closing prices.

    ``prices`` has one row per observation day and one column per asset;
    ``dt_obs`` is the observation interval in years (1/252 for daily
    closes).
    """

    dates: tuple
    prices: np.ndarray
    dt_obs: float = 1.0 / TRADING_DAYS_PER_YEAR

    def __post_init__(self):
        prices = _as_float_array(self.prices, 2, "prices")
        if prices.shape[0] < 2:
            raise DataError(f"price panel needs at least 2 rows, got {prices.shape[0]}")
        if np.any(prices <= 0):
            raise DataError("price panel contains non-positive prices")
        if len(self.dates) != prices.shape[0]:
            raise DataError(
                f"{len(self.dates)} dates for {prices.shape[0]} price rows"
            )
        if not (self.dt_obs > 0):
            raise DataError(f"dt_obs must be positive, got {self.dt_obs}")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))

    @property
    def m(self) -> int:
        return self.prices.shape[1]


def estimate_gbm(panel: PricePanel) -> tuple[np.ndarray, np.ndarray]:
    """Estimate annualized GBM drift and covariance from a price panel.

    Log-returns ``l_t = ln(p_{t+1}/p_t)`` give the annualized covariance
    ``Sigma = cov(l) / dt_obs`` and the drift
    ``mu = mean(l)/dt_obs + diag(Sigma)/2`` (the standard GBM maximum
    likelihood estimator, with the Ito variance correction).

    Returns
    -------
    (mu, Sigma) : ((m,) array, (m, m) array)

    Raises
    ------
    DataError
        If the panel has fewer than 3 rows (a covariance needs at least
        two return observations).
    """
    if panel.prices.shape[0] < 3:
        raise DataError(
            f"GBM estimation needs >= 3 price rows (2 returns), got {panel.prices.shape[0]}"
        )
    rets = np.diff(np.log(panel.prices), axis=0)
    Sigma = np.atleast_2d(np.cov(rets, rowvar=False, ddof=1)) / panel.dt_obs
    mu = rets.mean(axis=0) / panel.dt_obs + 0.5 * np.diag(Sigma)
    return mu, Sigma


def read_price_csv(path, dt_obs=1.0 / TRADING_DAYS_PER_YEAR) -> PricePanel:
    """Parse a strict price CSV: header ``date,asset1,...,assetM``,
    ISO-8601 dates, positive decimal prices.

    Malformed rows raise :class:`DataError` naming the offending line;
    nothing is skipped silently.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise DataError(f"{path}: line 1: header must be 'date,asset1,...,assetM'")
        n_assets = len(header) - 1
        dates = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n_assets + 1:
                raise DataError(
                    f"{path}: line {lineno}: expected {n_assets + 1} fields, got {len(row)}"
                )
            try:
                day = datetime.date.fromisoformat(row[0].strip())
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: bad date {row[0]!r}: {exc}") from exc
            try:
                prices = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: bad price: {exc}") from exc
            if any(p <= 0 for p in prices):
                raise DataError(f"{path}: line {lineno}: non-positive price")
            dates.append(day.isoformat())
            rows.append(prices)
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, got {len(rows)}")
    return PricePanel(dates=tuple(dates), prices=np.array(rows), dt_obs=dt_obs)


def market_to_json(market: MarketParams) -> dict:
    """Serialize a market as ``{"r", "nu", "Sigma", "T"}``."""
    return {
        "r": market.r,
        "nu": market.nu.tolist(),
        "Sigma": market.Sigma.tolist(),
        "T": market.T,
    }


def market_from_json(obj: dict) -> MarketParams:
    """Deserialize a market saved by :func:`market_to_json`.

    An optional ``"mu"`` key (raw drift estimates) is tolerated and
    ignored; any other unknown key is rejected.
    """
    required = {"r", "nu", "Sigma", "T"}
    missing = required - obj.keys()
    if missing:
        raise DataError(f"market JSON missing keys: {sorted(missing)}")
    unknown = obj.keys() - required - {"mu"}
    if unknown:
        raise DataError(f"market JSON has unknown keys: {sorted(unknown)}")
    return MarketParams.from_covariance(
        r=obj["r"], nu=obj["nu"], Sigma=obj["Sigma"], T=obj["T"]
    )


def load_market(path) -> MarketParams:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from exc
    return market_from_json(obj)


def save_market(market: MarketParams, path, extra=None):
    obj = market_to_json(market)
    if extra:
        obj.update(extra)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def two_stock_market(T=5.0, r=0.0145) -> MarketParams:
    """Bundled 2-asset market: GBM estimates from 2019-2023 daily closes
    of two Shenzhen A-shares, with the 2023 one-year Bank of China
    deposit rate as the riskless rate."""
    mu = np.array([0.0176, 0.0231])
    Sigma = np.array([[0.1304, 0.0498], [0.0498, 0.1839]])
    return MarketParams.from_covariance(r=r, nu=excess_returns(mu, r), Sigma=Sigma, T=T)


def five_stock_market(T=5.0, r=0.0145) -> MarketParams:
    """Bundled 5-asset market: GBM estimates from 2019-2023 daily closes
    of five Chinese A-shares; same riskless rate as
    :func:`two_stock_market`."""
    mu = np.array([0.0448, 0.0423, 0.0421, 0.0360, 0.0233])
    Sigma = np.array(
        [
            [0.1536, 0.0788, 0.0075, 0.0284, 0.0460],
            [0.0788, 0.1796, 0.0061, 0.0347, 0.0560],
            [0.0075, 0.0061, 0.0407, 0.0035, 0.0070],
            [0.0284, 0.0347, 0.0035, 0.1814, 0.0260],
            [0.0460, 0.0560, 0.0070, 0.0260, 0.1281],
        ]
    )
    return MarketParams.from_covariance(r=r, nu=excess_returns(mu, r), Sigma=Sigma, T=T)
