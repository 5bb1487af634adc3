"""
Entropic Gromov-Wasserstein and fused Gromov-Wasserstein.

Both run the same alternating linearization from pi0 = a b^T: at each outer
step the objective is linearized around the current coupling,

    cost = 2 * alpha * L(pi) + (1 - alpha) * C_XY^2

and a warm-started balanced Sinkhorn solve gives the next coupling. GW is the
alpha = 1 case with no inter-space term.
"""

from typing import List

import numpy as np

from ..config import OTConfig
from ..errors import InputError, ShapeError
from ..log import debug_print
from ..types import CostMatrix, Coupling, SolverReport
from .base import BaseOTSolver
from .objectives import fused_objective, gw_linearization
from .sinkhorn import check_marginals, sinkhorn, sinkhorn_arrays


def _check_square(C: CostMatrix, name: str) -> int:
    rows, cols = C.shape
    if rows != cols:
        raise ShapeError(f"{name} must be square, got {C.shape}", {"name": name, "shape": [rows, cols]})
    return rows


def _require_balanced(cfg: OTConfig, solver: str) -> None:
    if not cfg.is_balanced():
        raise InputError(
            f"{solver} supports balanced marginals only (tau_x = tau_y = 1), "
            f"got tau_x={cfg.tau_x}, tau_y={cfg.tau_y}",
            {"solver": solver, "tau_x": cfg.tau_x, "tau_y": cfg.tau_y},
        )


def _alternating_linearization(
    C_XX: np.ndarray,
    C_YY: np.ndarray,
    linear_cost: np.ndarray,
    alpha: float,
    a: np.ndarray,
    b: np.ndarray,
    cfg: OTConfig,
    solver: str,
) -> Coupling:
    pi = np.outer(a, b)
    f = g = None
    history: List[float] = []
    warnings: List[str] = []
    inner_iterations = 0
    converged = False
    inner_converged = False
    outer = 0
    for outer in range(1, cfg.max_outer_iters + 1):
        cost = 2.0 * alpha * gw_linearization(C_XX, C_YY, pi) + (1.0 - alpha) * linear_cost
        state = sinkhorn_arrays(
            a, b, cost, cfg.epsilon, 1.0, 1.0, cfg.max_iters, cfg.tolerance, f_init=f, g_init=g
        )
        f, g = state.f, state.g
        inner_iterations += state.iterations
        inner_converged = state.converged
        warnings.extend(state.warnings)
        change = float(np.max(np.abs(state.pi - pi)))
        pi = state.pi

        history.append(fused_objective(pi, C_XX, C_YY, linear_cost, alpha, cfg.epsilon))
        if len(history) > 1 and history[-1] > history[-2] + cfg.tolerance:
            message = (
                f"{solver} objective increased at outer step {outer}: "
                f"{history[-2]:.6e} -> {history[-1]:.6e}"
            )
            debug_print(f"[WARNING] {message}")
            warnings.append(message)
        if change < cfg.tolerance:
            converged = inner_converged
            break

    if not converged:
        debug_print(f"[WARNING] {solver} stopped after {outer} outer steps without converging")
    violation = float(max(np.max(np.abs(pi.sum(axis=1) - a)), np.max(np.abs(pi.sum(axis=0) - b))))
    report = SolverReport(
        solver=solver,
        iterations=inner_iterations,
        outer_iterations=outer,
        marginal_violation=violation,
        converged=converged,
        objective=history[-1] if history else None,
        objective_history=history,
        warnings=warnings,
    )
    return Coupling(values=pi, source_marginal=a, target_marginal=b, report=report)


def entropic_gw(C_XX: CostMatrix, C_YY: CostMatrix, a, b, cfg: OTConfig) -> Coupling:
    """
    Entropic Gromov-Wasserstein coupling (square loss).

    Raises:
        ShapeError: Non-square intra costs or mismatched weights
        InputError: Unbalanced tau requested
    """
    _require_balanced(cfg, "gw")
    n = _check_square(C_XX, "C_XX")
    m = _check_square(C_YY, "C_YY")
    a, b = check_marginals(a, b, n, m)
    return _alternating_linearization(C_XX.values, C_YY.values, np.zeros((n, m)), 1.0, a, b, cfg, "gw")


def fgw(C_XX: CostMatrix, C_YY: CostMatrix, C_XY: CostMatrix, a, b, cfg: OTConfig) -> Coupling:
    """
    Entropic fused Gromov-Wasserstein coupling.

    ``cfg.alpha = 0`` is exactly ``sinkhorn`` on the squared inter-space cost;
    ``cfg.alpha = 1`` is exactly ``entropic_gw``.

    Raises:
        ShapeError: Inconsistent cost shapes
        InputError: Unbalanced tau requested with alpha > 0
    """
    n = _check_square(C_XX, "C_XX")
    m = _check_square(C_YY, "C_YY")
    if C_XY.shape != (n, m):
        raise ShapeError(
            f"C_XY has shape {C_XY.shape}, expected {(n, m)}",
            {"expected": [n, m], "got": list(C_XY.shape)},
        )
    if cfg.alpha == 0.0:
        debug_print("[DEBUG] fgw with alpha=0 reduces to linear Sinkhorn on C_XY^2")
        squared = CostMatrix(values=C_XY.values ** 2, kind=C_XY.kind, normalized=C_XY.normalized)
        return sinkhorn(a, b, squared, cfg)
    _require_balanced(cfg, "fgw")
    a, b = check_marginals(a, b, n, m)
    return _alternating_linearization(
        C_XX.values, C_YY.values, C_XY.values ** 2, cfg.alpha, a, b, cfg, "fgw"
    )


class GWSolver(BaseOTSolver):
    """Entropic GW on the two intra-space costs (no supervision)"""

    def get_solver_name(self) -> str:
        return "gw"

    def requires_intra_costs(self) -> bool:
        return True

    def solve(self, a, b, C_XY=None, C_XX=None, C_YY=None) -> Coupling:
        if C_XX is None or C_YY is None:
            raise InputError("gw solver needs both intra-space costs", {"solver": "gw"})
        return entropic_gw(C_XX, C_YY, a, b, self.config)


class FGWSolver(BaseOTSolver):
    """Entropic FGW mixing intra-space structure with the fused inter-space cost"""

    def get_solver_name(self) -> str:
        return "fgw"

    def requires_inter_cost(self) -> bool:
        return True

    def requires_intra_costs(self) -> bool:
        return True

    def solve(self, a, b, C_XY=None, C_XX=None, C_YY=None) -> Coupling:
        if C_XY is None or C_XX is None or C_YY is None:
            raise InputError("fgw solver needs the inter-space cost and both intra-space costs", {"solver": "fgw"})
        return fgw(C_XX, C_YY, C_XY, a, b, self.config)


__all__ = ["entropic_gw", "fgw", "GWSolver", "FGWSolver"]
