"""
Flow-matching loss with optional marginal reweighting terms.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..errors import ShapeError, TrainingError
from .architectures import ReweightingNets, VelocityField
from .flows import interpolant


@dataclass
class LossResult:
    loss: float
    flow_loss: float
    reweight_loss: float
    grads: Dict[str, np.ndarray]
    reweight_grads: Dict[str, np.ndarray] = field(default_factory=dict)


def genot_loss(
    vf: VelocityField,
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    t: np.ndarray,
    rw: Optional[ReweightingNets] = None,
    w_x: Optional[np.ndarray] = None,
    w_y: Optional[np.ndarray] = None,
    sigma_min: float = 0.0,
    iteration: Optional[int] = None,
) -> LossResult:
    """
    mean_k |v(x_t,k | t_k, x_k) - (y_k - z_k)|^2
      + mean_k [(eta(x_k) - w_x,k)^2 + (xi(y_k) - w_y,k)^2]   (when rw is given)

    Raises:
        ShapeError: Inconsistent batch shapes or missing reweighting targets
        TrainingError: Non-finite loss (carries the iteration index)
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    batch = y.shape[0]
    if x.shape[0] != batch or z.shape != y.shape or t.shape[0] != batch:
        raise ShapeError(
            f"batch shapes disagree: x {x.shape}, y {y.shape}, z {z.shape}, t {t.shape}"
        )

    x_t, target = interpolant(z, y, t, sigma_min)
    residual = vf.velocity(x_t, t, x) - target
    flow_loss = float(np.sum(residual * residual) / batch)
    grads = vf.gradients(x_t, t, x, 2.0 * residual / batch)

    reweight_loss = 0.0
    reweight_grads: Dict[str, np.ndarray] = {}
    if rw is not None:
        if w_x is None or w_y is None:
            raise ShapeError("reweighting networks need both marginal targets w_x and w_y")
        eta_err = rw.eta(x) - np.asarray(w_x, dtype=np.float64).reshape(-1)
        xi_err = rw.xi(y) - np.asarray(w_y, dtype=np.float64).reshape(-1)
        reweight_loss = float((np.sum(eta_err * eta_err) + np.sum(xi_err * xi_err)) / batch)
        reweight_grads = rw.gradients(x, y, 2.0 * eta_err / batch, 2.0 * xi_err / batch)

    loss = flow_loss + reweight_loss
    if not np.isfinite(loss):
        raise TrainingError(
            f"non-finite loss at iteration {iteration}",
            {"iteration": iteration, "flow_loss": flow_loss, "reweight_loss": reweight_loss},
        )
    return LossResult(
        loss=loss,
        flow_loss=flow_loss,
        reweight_loss=reweight_loss,
        grads=grads,
        reweight_grads=reweight_grads,
    )


__all__ = ["LossResult", "genot_loss"]
