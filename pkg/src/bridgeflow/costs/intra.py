"""
Intra-space cost matrices and mean normalization.
"""

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DegenerateInputError, InputError
from ..types import CostMatrix, FeatureMatrix, as_matrix

INTRA_METRICS = ("cosine", "sq_euclidean", "one_minus_pearson")

_SCIPY_METRIC = {
    "cosine": "cosine",
    "sq_euclidean": "sqeuclidean",
    "one_minus_pearson": "correlation",
}


def _check_rows(points: np.ndarray, metric: str, name: str) -> None:
    if metric == "cosine":
        norms = np.linalg.norm(points, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise InputError(
                f"{name} row {int(zero[0])} has zero norm; cosine distance is undefined",
                {"rows": zero[:10].tolist(), "metric": metric},
            )
    elif metric == "one_minus_pearson":
        spread = points.std(axis=1)
        flat = np.flatnonzero(spread == 0.0)
        if flat.size:
            raise InputError(
                f"{name} row {int(flat[0])} is constant; Pearson correlation is undefined",
                {"rows": flat[:10].tolist(), "metric": metric},
            )


def pairwise_cost(A: np.ndarray, B: np.ndarray, metric: str) -> np.ndarray:
    """Cost between the rows of A and the rows of B, clipped at 0."""
    if metric not in INTRA_METRICS:
        raise InputError(f"Unknown intra metric {metric!r}. Supported: {list(INTRA_METRICS)}")
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _check_rows(A, metric, "source")
    _check_rows(B, metric, "target")
    values = cdist(A, B, metric=_SCIPY_METRIC[metric])
    return np.maximum(values, 0.0)


def intra_cost(X: FeatureMatrix, metric: str = "cosine") -> CostMatrix:
    """
    Symmetric n×n cost with an exactly zero diagonal.

    Raises:
        InputError: n < 2, or a row is degenerate for the metric (named in the message)
    """
    if X.n < 2:
        raise InputError(f"intra_cost needs at least 2 points, got {X.n}")
    values = pairwise_cost(X.points, X.points, metric)
    values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 0.0)
    return CostMatrix(values=values, kind=metric)


def normalize_by_mean(C: CostMatrix) -> CostMatrix:
    """
    Divide by the mean entry.

    Raises:
        DegenerateInputError: If the mean is not positive (all-zero matrix)
    """
    mean = float(C.values.mean())
    if not mean > 0.0:
        raise DegenerateInputError(
            f"cannot mean-normalize a {C.kind} cost with mean {mean}",
            {"kind": C.kind, "mean": mean},
        )
    return CostMatrix(values=C.values / mean, kind=C.kind, normalized=True)


__all__ = ["INTRA_METRICS", "pairwise_cost", "intra_cost", "normalize_by_mean"]
