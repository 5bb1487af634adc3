"""
KCCA fused cost.

Kernel CCA is fitted on the paired anchors only (centered Gaussian RBF kernels,
ridge-regularized generalized eigenproblem). Every point is then projected
through its kernel section against the anchors and the cost is the cosine
distance in the shared canonical space.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist, pdist

from ..errors import DegenerateInputError, InputError, NumericalError
from ..types import CostMatrix, FeatureMatrix, PairedSet
from .base import BaseFusedCost

DEFAULT_REGULARIZATION = 1e-3
MAX_DEFAULT_COMPONENTS = 10


def rbf_kernel(A: np.ndarray, B: np.ndarray, bandwidth: float) -> np.ndarray:
    """k(a, b) = exp(-||a - b||^2 / (2 sigma^2))"""
    return np.exp(-cdist(A, B, metric="sqeuclidean") / (2.0 * bandwidth ** 2))


def median_bandwidth(anchors: np.ndarray) -> float:
    """Median pairwise distance among the anchors."""
    if anchors.shape[0] < 2:
        raise InputError("median heuristic needs at least two anchors")
    value = float(np.median(pdist(anchors)))
    if not value > 0.0:
        raise DegenerateInputError("anchors coincide; median-heuristic bandwidth is 0")
    return value


def _center_train(K: np.ndarray) -> np.ndarray:
    return K - K.mean(axis=0, keepdims=True) - K.mean(axis=1, keepdims=True) + K.mean()


def _center_sections(K_sections: np.ndarray, K_train: np.ndarray) -> np.ndarray:
    return (
        K_sections
        - K_train.mean(axis=0, keepdims=True)
        - K_sections.mean(axis=1, keepdims=True)
        + K_train.mean()
    )


@dataclass
class KCCAProjection:
    x_anchors: np.ndarray
    y_anchors: np.ndarray
    x_bandwidth: float
    y_bandwidth: float
    alpha: np.ndarray
    beta: np.ndarray
    correlations: np.ndarray

    def project_x(self, points: np.ndarray) -> np.ndarray:
        K_train = rbf_kernel(self.x_anchors, self.x_anchors, self.x_bandwidth)
        sections = rbf_kernel(points, self.x_anchors, self.x_bandwidth)
        return _center_sections(sections, K_train) @ self.alpha

    def project_y(self, points: np.ndarray) -> np.ndarray:
        K_train = rbf_kernel(self.y_anchors, self.y_anchors, self.y_bandwidth)
        sections = rbf_kernel(points, self.y_anchors, self.y_bandwidth)
        return _center_sections(sections, K_train) @ self.beta


def fit_kcca(
    X_anchors: np.ndarray,
    Y_anchors: np.ndarray,
    x_bandwidth: float,
    y_bandwidth: float,
    regularization: float,
    components: int,
) -> KCCAProjection:
    """
    Solve  [0, KxKy; KyKx, 0] w = rho [(Kx+kI)^2, 0; 0, (Ky+kI)^2] w
    and keep the ``components`` largest canonical correlations.
    """
    l = X_anchors.shape[0]
    Kx = _center_train(rbf_kernel(X_anchors, X_anchors, x_bandwidth))
    Ky = _center_train(rbf_kernel(Y_anchors, Y_anchors, y_bandwidth))
    identity = np.eye(l)
    zeros = np.zeros((l, l))
    lhs = np.block([[zeros, Kx @ Ky], [Ky @ Kx, zeros]])
    lhs = 0.5 * (lhs + lhs.T)
    Rx = Kx + regularization * identity
    Ry = Ky + regularization * identity
    rhs = np.block([[Rx @ Rx, zeros], [zeros, Ry @ Ry]])
    rhs = 0.5 * (rhs + rhs.T)
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(lhs, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"KCCA eigen-solve failed: {exc}", {"anchors": l}) from exc
    order = np.argsort(eigenvalues)[::-1][:components]
    vectors = eigenvectors[:, order]
    if not np.all(np.isfinite(vectors)):
        raise NumericalError("KCCA produced non-finite projection vectors")
    return KCCAProjection(
        x_anchors=X_anchors,
        y_anchors=Y_anchors,
        x_bandwidth=x_bandwidth,
        y_bandwidth=y_bandwidth,
        alpha=vectors[:l],
        beta=vectors[l:],
        correlations=eigenvalues[order],
    )


def cosine_distance_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cosine distance in [0, 2]; a zero-norm row is at distance 1 from everything."""
    norm_a = np.linalg.norm(A, axis=1)
    norm_b = np.linalg.norm(B, axis=1)
    safe_a = np.where(norm_a > 0, norm_a, 1.0)
    safe_b = np.where(norm_b > 0, norm_b, 1.0)
    similarity = (A / safe_a[:, None]) @ (B / safe_b[:, None]).T
    similarity[norm_a == 0, :] = 0.0
    similarity[:, norm_b == 0] = 0.0
    return np.clip(1.0 - similarity, 0.0, 2.0)


def kcca_fused_cost(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    kernel_bandwidth: Optional[float] = None,
    regularization: float = DEFAULT_REGULARIZATION,
    components: Optional[int] = None,
) -> CostMatrix:
    """
    Args:
        kernel_bandwidth: RBF width for both spaces; None uses the median heuristic per space
        regularization: ridge term added to the centered kernels
        components: canonical directions kept; None means min(|P| - 1, 10)

    Raises:
        InputError: Too few anchors or invalid options
        NumericalError: Eigen-solve failure or non-finite projections
    """
    P.validate(X.n, Y.n)
    l = len(P)
    if components is None:
        components = min(l - 1, MAX_DEFAULT_COMPONENTS)
    if components < 1 or l < components + 1:
        raise InputError(
            f"KCCA with {components} component(s) needs at least {components + 1} pairs, got {l}",
            {"pairs": l, "components": components},
        )
    if regularization <= 0:
        raise InputError(f"regularization must be > 0, got {regularization}")
    if kernel_bandwidth is not None and kernel_bandwidth <= 0:
        raise InputError(f"kernel_bandwidth must be > 0, got {kernel_bandwidth}")

    X_anchors = X.points[P.sources]
    Y_anchors = Y.points[P.targets]
    x_bandwidth = kernel_bandwidth or median_bandwidth(X_anchors)
    y_bandwidth = kernel_bandwidth or median_bandwidth(Y_anchors)
    projection = fit_kcca(X_anchors, Y_anchors, x_bandwidth, y_bandwidth, regularization, components)

    u_x = projection.project_x(X.points)
    u_y = projection.project_y(Y.points)
    if not (np.all(np.isfinite(u_x)) and np.all(np.isfinite(u_y))):
        raise NumericalError("KCCA projections are non-finite")
    return CostMatrix(values=cosine_distance_rows(u_x, u_y), kind="kcca")


class KccaCost(BaseFusedCost):
    """Cosine distance in the KCCA space fitted on the anchors"""

    def __init__(
        self,
        kernel_bandwidth: Optional[float] = None,
        regularization: float = DEFAULT_REGULARIZATION,
        components: Optional[int] = None,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.kernel_bandwidth = kernel_bandwidth
        self.regularization = regularization
        self.components = components

    def get_cost_name(self) -> str:
        return "kcca"

    def build(self, X: FeatureMatrix, Y: FeatureMatrix, P: PairedSet) -> CostMatrix:
        self.check_anchors(X, Y, P, minimum=2)
        return kcca_fused_cost(X, Y, P, self.kernel_bandwidth, self.regularization, self.components)


__all__ = [
    "rbf_kernel",
    "median_bandwidth",
    "KCCAProjection",
    "fit_kcca",
    "cosine_distance_rows",
    "kcca_fused_cost",
    "KccaCost",
]
