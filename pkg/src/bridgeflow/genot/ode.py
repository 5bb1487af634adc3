"""
Fixed-step RK4 integration and push-forward inference.
"""

from typing import Callable, List, Tuple, Union

import numpy as np

from ..errors import InputError, IntegrationError, ShapeError
from .architectures import VelocityField

Field = Callable[[np.ndarray, float], np.ndarray]


def rk4_step(field: Field, y: np.ndarray, t: float, dt: float) -> np.ndarray:
    k1 = field(y, t)
    k2 = field(y + dt * k1 / 2.0, t + dt / 2.0)
    k3 = field(y + dt * k2 / 2.0, t + dt / 2.0)
    k4 = field(y + dt * k3, t + dt)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_rk4(
    field: Field,
    y0: np.ndarray,
    steps: int,
    t0: float = 0.0,
    t1: float = 1.0,
    return_trajectory: bool = False,
) -> Union[np.ndarray, Tuple[np.ndarray, List[np.ndarray]]]:
    """
    Integrate dy/dt = field(y, t) from t0 to t1 in ``steps`` equal steps.

    Raises:
        InputError: steps < 1
        IntegrationError: The state becomes non-finite (the step index is reported)
    """
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")
    dt = (t1 - t0) / steps
    y = np.asarray(y0, dtype=np.float64)
    trajectory = [y.copy()] if return_trajectory else []
    for step in range(steps):
        y = rk4_step(field, y, t0 + step * dt, dt)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(
                f"ODE state became non-finite at step {step + 1} of {steps}",
                {"step": step + 1, "steps": steps},
            )
        if return_trajectory:
            trajectory.append(y.copy())
    if return_trajectory:
        return y, trajectory
    return y


def push_forward(
    vf: VelocityField,
    x,
    z,
    steps: int = 100,
    return_trajectory: bool = False,
):
    """
    Predicted target points for source points x from noise draws z.

    x may be one source point (p,) or a batch (b, p); z matches with (q,) or (b, q).
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
        z = z.reshape(1, -1)
    if z.shape[0] != x.shape[0]:
        raise ShapeError(f"{z.shape[0]} noise draws for {x.shape[0]} source points")

    def field(y: np.ndarray, t: float) -> np.ndarray:
        return vf.velocity(y, np.full(y.shape[0], t), x)

    result = integrate_rk4(field, z, steps, return_trajectory=return_trajectory)
    if return_trajectory:
        y, trajectory = result
        return (y[0], [state[0] for state in trajectory]) if single else (y, trajectory)
    return result[0] if single else result


def sample_noise(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Standard normal draws in target space."""
    return rng.standard_normal((count, dim))


__all__ = ["rk4_step", "integrate_rk4", "push_forward", "sample_noise"]
