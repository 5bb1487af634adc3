"""
Straight-line probability paths between noise and target points.
"""

import numpy as np

from ..errors import ShapeError, SingularityError

TIME_EMBEDDING_DIM = 64
TIME_FREQ_RANGE = (1.0, 1000.0)
_SINGULAR = 1e-12


def time_embedding(t, dim: int = TIME_EMBEDDING_DIM) -> np.ndarray:
    """
    Sinusoidal features [cos(f t), sin(f t)] with frequencies geometrically
    spaced over TIME_FREQ_RANGE. Returns (len(t), dim).
    """
    if dim < 2 or dim % 2:
        raise ValueError(f"time embedding width must be even and >= 2, got {dim}")
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    freqs = np.geomspace(TIME_FREQ_RANGE[0], TIME_FREQ_RANGE[1], dim // 2)
    args = t[:, None] * freqs[None, :]
    return np.concatenate([np.cos(args), np.sin(args)], axis=1)


def _as_time_column(t, rows: int) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 0:
        return np.full((rows, 1), float(t))
    return t.reshape(-1, 1)


def interpolant(z, y, t, sigma_min: float = 0.0):
    """
    Returns (x_t, target velocity).

    x_t = t y + (1 - (1 - sigma_min) t) z and target = y - (1 - sigma_min) z;
    with sigma_min = 0 this is the straight path t y + (1 - t) z with target y - z.
    Works on single points or on batches (rows) with per-row t.
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if z.shape != y.shape:
        raise ShapeError(f"noise shape {z.shape} does not match target shape {y.shape}")
    shrink = 1.0 - sigma_min
    if z.ndim == 1:
        t = float(t)
        return t * y + (1.0 - shrink * t) * z, y - shrink * z
    tc = _as_time_column(t, z.shape[0])
    return tc * y + (1.0 - shrink * tc) * z, y - shrink * z


def cfm_conditional_field(x, x1, t, sigma_min: float = 0.0) -> np.ndarray:
    """
    u_t(x | x1) = (x1 - (1 - sigma_min) x) / (1 - (1 - sigma_min) t)

    Raises:
        SingularityError: If the denominator is below 1e-12 in magnitude
    """
    x = np.asarray(x, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    shrink = 1.0 - sigma_min
    if x.ndim == 1:
        denominator = 1.0 - shrink * float(t)
        if abs(denominator) < _SINGULAR:
            raise SingularityError(
                f"conditional field is singular at t={t} with sigma_min={sigma_min}",
                {"t": float(t), "sigma_min": sigma_min},
            )
        return (x1 - shrink * x) / denominator
    denominator = 1.0 - shrink * _as_time_column(t, x.shape[0])
    if np.any(np.abs(denominator) < _SINGULAR):
        raise SingularityError(f"conditional field is singular for sigma_min={sigma_min} at t=1")
    return (x1 - shrink * x) / denominator


__all__ = ["TIME_EMBEDDING_DIM", "time_embedding", "interpolant", "cfm_conditional_field"]
