"""
Drawing index pairs from a coupling and scoring a coupling against a known matching.
"""

from typing import Optional, Union

import numpy as np

from ..errors import InputError
from ..types import Coupling, PairedSet

SeedLike = Union[int, np.random.Generator]


def _inverse_cdf(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index k with cdf[k-1] <= u * total < cdf[k] for a 1-D weight vector."""
    cumulative = np.cumsum(weights)
    index = np.searchsorted(cumulative, u * cumulative[-1], side="right")
    return np.minimum(index, weights.shape[0] - 1)


def sample_pairs(pi: Coupling, count: int, seed: SeedLike = 0) -> np.ndarray:
    """
    Draw ``count`` i.i.d. (i, j) pairs from pi normalized to a probability table.

    Two stages: i from the row marginal, then j from pi(. | i). Deterministic
    for a fixed integer seed; a Generator is consumed in place.

    Returns:
        (count, 2) int64 array

    Raises:
        InputError: If pi carries no mass or count < 0
    """
    if count < 0:
        raise InputError(f"count must be >= 0, got {count}")
    total = pi.total_mass
    if not total > 0.0:
        raise InputError("cannot sample from a coupling with zero total mass", {"total_mass": total})
    rng = np.random.default_rng(seed)
    rows = _inverse_cdf(pi.row_sums, rng.random(count))
    u_cols = rng.random(count)

    # one conditional cdf per distinct row, never a count x m copy
    cols = np.empty(count, dtype=np.int64)
    order = np.argsort(rows, kind="stable")
    distinct, starts = np.unique(rows[order], return_index=True)
    for row, draws in zip(distinct, np.split(order, starts[1:])):
        cols[draws] = _inverse_cdf(pi.values[row], u_cols[draws])
    return np.stack([rows, cols], axis=1).astype(np.int64)


def expected_matching_accuracy(
    pi: Coupling,
    truth: PairedSet,
    samples: Optional[int] = None,
    seed: SeedLike = 0,
) -> float:
    """
    Mass pi places on the ground-truth pairs, relative to its total mass.

    With ``samples`` set, the value is estimated by drawing that many pairs and
    counting exact hits instead.
    """
    n, m = pi.shape
    truth.validate(n, m)
    total = pi.total_mass
    if not total > 0.0:
        raise InputError("matching accuracy is undefined for a zero-mass coupling")
    if samples is None:
        return float(pi.values[truth.sources, truth.targets].sum() / total)
    if samples < 1:
        raise InputError(f"samples must be >= 1, got {samples}")
    drawn = sample_pairs(pi, samples, seed)
    expected_target = np.full(n, -1, dtype=np.int64)
    expected_target[truth.sources] = truth.targets
    return float(np.mean(expected_target[drawn[:, 0]] == drawn[:, 1]))


__all__ = ["sample_pairs", "expected_matching_accuracy"]
