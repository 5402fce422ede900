"""Row-stochastic influence networks.

Entry ``W[j, i]`` is the weight the j-th agent puts on the i-th agent's
strategy.  Rows must be nonnegative and sum to one.  No silent
renormalization happens anywhere: a matrix that fails the contract is an
input error, not something to fix up.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NetworkError

ROW_SUM_TOL = 1e-9


def _check_matrix(W: np.ndarray):
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise NetworkError(f"adjacency matrix must be square, got shape {W.shape}")
    if W.shape[0] < 1:
        raise NetworkError("network needs at least one agent")
    if not np.all(np.isfinite(W)):
        raise NetworkError("adjacency matrix contains non-finite entries")
    if np.any(W < 0):
        j, i = np.argwhere(W < 0)[0]
        raise NetworkError(f"negative influence weight W[{j},{i}] = {W[j, i]}")
    row_sums = W.sum(axis=1)
    bad = np.abs(row_sums - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        j = int(np.argmax(bad))
        raise NetworkError(f"row {j} sums to {row_sums[j]!r}, expected 1")


@dataclass(frozen=True)
class InfluenceNetwork:
    """Validated row-stochastic influence matrix over ``n`` agents."""

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        _check_matrix(W)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]


def validate(W) -> InfluenceNetwork:
    """Validate a candidate adjacency matrix.

    Raises :class:`NetworkError` on negative entries or on any row whose
    sum deviates from 1 by more than ``1e-9``.
    """
    return InfluenceNetwork(W=np.asarray(W, dtype=float))


def homogeneous(n: int) -> InfluenceNetwork:
    """The uniform network where every agent weighs all agents equally."""
    if n < 1:
        raise NetworkError(f"need n >= 1 agents, got {n}")
    return InfluenceNetwork(W=np.full((n, n), 1.0 / n))


def random_network(n: int, seed: int, zero_diagonal: bool = False) -> InfluenceNetwork:
    """Draw a random row-stochastic network, reproducibly.

    Weights are uniform on [0, 1), optionally with a zeroed diagonal
    (no self-influence), then each row is normalized to sum to one.
    """
    if n < 1:
        raise NetworkError(f"need n >= 1 agents, got {n}")
    if zero_diagonal and n < 2:
        raise NetworkError("zero_diagonal requires at least 2 agents")
    rng = np.random.default_rng(seed)
    W = rng.uniform(size=(n, n))
    if zero_diagonal:
        np.fill_diagonal(W, 0.0)
    row_sums = W.sum(axis=1, keepdims=True)
    # uniform draws make an all-zero row a measure-zero event; guard anyway
    if np.any(row_sums == 0):
        raise NetworkError("degenerate draw: a row has no positive weight")
    return InfluenceNetwork(W=W / row_sums)


def leader_network(n: int, leader: int = 0) -> InfluenceNetwork:
    """Every agent (including the leader) follows only ``leader``."""
    if not 0 <= leader < n:
        raise NetworkError(f"leader index {leader} out of range for n = {n}")
    W = np.zeros((n, n))
    W[:, leader] = 1.0
    return InfluenceNetwork(W=W)


def is_homogeneous(network: InfluenceNetwork, tol: float = 1e-12) -> bool:
    """True if every weight equals 1/n."""
    return bool(np.max(np.abs(network.W - 1.0 / network.n)) <= tol)


def network_to_json(network: InfluenceNetwork) -> dict:
    return {"n": network.n, "W": network.W.tolist()}


def network_from_json(obj: dict) -> InfluenceNetwork:
    if set(obj.keys()) != {"n", "W"}:
        raise DataError(f"network JSON must have exactly keys 'n' and 'W', got {sorted(obj.keys())}")
    W = np.asarray(obj["W"], dtype=float)
    if W.shape != (obj["n"], obj["n"]):
        raise DataError(f"network JSON: W has shape {W.shape}, expected ({obj['n']}, {obj['n']})")
    return validate(W)


def load_network(path) -> InfluenceNetwork:
    """Load a network from JSON (``{"n", "W"}``) or CSV (n rows of n floats)."""
    text_path = str(path)
    if text_path.endswith(".csv"):
        rows = []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise DataError(f"{path}: line {lineno}: bad weight: {exc}") from exc
        return validate(np.array(rows))
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from exc
    return network_from_json(obj)


def save_network(network: InfluenceNetwork, path):
    with open(path, "w") as fh:
        json.dump(network_to_json(network), fh, indent=2)
        fh.write("\n")
