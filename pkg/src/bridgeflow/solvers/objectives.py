"""
Entropic objective values for couplings.

All objectives use the same entropy H(pi) = -sum pi log pi (0 log 0 = 0) so
that linear, GW and FGW values are directly comparable for a fixed epsilon.
"""

from typing import Optional

import numpy as np
from scipy.special import entr


def entropy(pi: np.ndarray) -> float:
    return float(entr(pi).sum())


def gw_linearization(C_XX: np.ndarray, C_YY: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """
    L(pi)[i, j] = sum_kl (C_XX[i,k] - C_YY[j,l])^2 pi[k,l]

    Computed with the square-loss split so the n×m×n×m tensor never exists.
    """
    p = pi.sum(axis=1)
    q = pi.sum(axis=0)
    const = (C_XX ** 2) @ p
    const_y = (C_YY ** 2) @ q
    return const[:, None] + const_y[None, :] - 2.0 * (C_XX @ pi @ C_YY.T)


def linear_objective(pi: np.ndarray, C: np.ndarray, epsilon: float = 0.0) -> float:
    """<C, pi> - epsilon H(pi)"""
    return float(np.sum(C * pi)) - epsilon * entropy(pi)


def gw_objective(pi: np.ndarray, C_XX: np.ndarray, C_YY: np.ndarray, epsilon: float = 0.0) -> float:
    """sum_ijkl (C_XX[i,k] - C_YY[j,l])^2 pi[i,j] pi[k,l] - epsilon H(pi)"""
    return float(np.sum(gw_linearization(C_XX, C_YY, pi) * pi)) - epsilon * entropy(pi)


def fused_objective(
    pi: np.ndarray,
    C_XX: np.ndarray,
    C_YY: np.ndarray,
    linear_cost: np.ndarray,
    alpha: float,
    epsilon: float = 0.0,
) -> float:
    """alpha * GW(pi) + (1 - alpha) * <linear_cost, pi> - epsilon H(pi)"""
    quadratic = float(np.sum(gw_linearization(C_XX, C_YY, pi) * pi))
    linear = float(np.sum(linear_cost * pi))
    return alpha * quadratic + (1.0 - alpha) * linear - epsilon * entropy(pi)


def fgw_objective(
    pi: np.ndarray,
    C_XX: np.ndarray,
    C_YY: np.ndarray,
    C_XY: np.ndarray,
    alpha: float,
    epsilon: float = 0.0,
) -> float:
    """alpha * GW(pi) + (1 - alpha) * <C_XY^2, pi> - epsilon H(pi)"""
    return fused_objective(pi, C_XX, C_YY, C_XY ** 2, alpha, epsilon)


__all__ = [
    "entropy",
    "gw_linearization",
    "linear_objective",
    "gw_objective",
    "fused_objective",
    "fgw_objective",
]
