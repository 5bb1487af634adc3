"""
Log-domain Sinkhorn for balanced and unbalanced linear entropic OT.

Potentials (f, g) are updated with stabilized log-sum-exp sweeps:

    f <- tau_x * eps * (log a - LSE_j((g_j - C_ij) / eps))
    g <- tau_y * eps * (log b - LSE_i((f_i - C_ij) / eps))

and the coupling is pi = exp((f_i + g_j - C_ij) / eps). With tau = 1 this is
the balanced problem; tau < 1 relaxes the marginals through KL penalties of
weight lambda = tau * eps / (1 - tau).
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from ..config import OTConfig
from ..errors import InputError, NumericalError
from ..log import debug_print, is_debug_enabled
from ..types import CostMatrix, Coupling, SolverReport, as_weights
from .base import BaseOTSolver
from .objectives import linear_objective

# allowed slack on the marginal sums before they count as "not summing to 1"
_MASS_SLACK = 1e-9


@dataclass
class SinkhornState:
    """Raw solver output; the duals are kept for warm starts."""

    pi: np.ndarray
    f: np.ndarray
    g: np.ndarray
    iterations: int
    converged: bool
    marginal_violation: float
    dual_history: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


def check_marginals(a, b, n: int, m: int):
    a = as_weights(a, n, "a")
    b = as_weights(b, m, "b")
    for name, w in (("a", a), ("b", b)):
        if abs(w.sum() - 1.0) > _MASS_SLACK * max(n, m) + 1e-12:
            raise InputError(f"marginal {name} must sum to 1, got {w.sum():.12f}", {"name": name})
    return a, b


def _safe_log(w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(w)


def _kl_term(weights: np.ndarray, potential: np.ndarray, lam: float) -> float:
    mask = weights > 0
    return float(-lam * np.sum(weights[mask] * (np.exp(-potential[mask] / lam) - 1.0)))


def _dual_objective(
    f: np.ndarray,
    g: np.ndarray,
    M: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    eps: float,
    tau_x: float,
    tau_y: float,
) -> float:
    """Dual of the (possibly unbalanced) entropic problem; coordinate sweeps never decrease it."""
    mass = float(np.exp((f[:, None] + g[None, :] - M) / eps).sum())
    if tau_x == 1.0:
        fx = float(np.dot(a[a > 0], f[a > 0]))
    else:
        fx = _kl_term(a, f, tau_x * eps / (1.0 - tau_x))
    if tau_y == 1.0:
        gy = float(np.dot(b[b > 0], g[b > 0]))
    else:
        gy = _kl_term(b, g, tau_y * eps / (1.0 - tau_y))
    return fx + gy - eps * (mass - 1.0)


def sinkhorn_arrays(
    a: np.ndarray,
    b: np.ndarray,
    M: np.ndarray,
    epsilon: float,
    tau_x: float = 1.0,
    tau_y: float = 1.0,
    max_iters: int = 2000,
    tolerance: float = 1e-6,
    f_init: Optional[np.ndarray] = None,
    g_init: Optional[np.ndarray] = None,
    track_dual: Optional[bool] = None,
) -> SinkhornState:
    """
    Core log-domain loop on raw arrays (M may be any finite real matrix).

    Balanced runs (tau_x = tau_y = 1) stop once the row-marginal violation is
    below ``tolerance`` (columns are exact after each sweep). Unbalanced runs
    stop once the potentials move by less than ``tolerance``.
    """
    n, m = M.shape
    if not np.all(np.isfinite(M)):
        raise NumericalError("cost passed to Sinkhorn contains non-finite entries")
    if epsilon <= 0:
        raise InputError(f"epsilon must be > 0, got {epsilon}")
    if track_dual is None:
        track_dual = is_debug_enabled()
    balanced = tau_x == 1.0 and tau_y == 1.0
    log_a = _safe_log(a)
    log_b = _safe_log(b)
    f = np.zeros(n) if f_init is None else np.array(f_init, dtype=np.float64)
    g = np.zeros(m) if g_init is None else np.array(g_init, dtype=np.float64)

    history: List[float] = []
    warnings: List[str] = []
    converged = False
    violation = float("inf")
    iterations = 0
    for iterations in range(1, max_iters + 1):
        f_prev, g_prev = f, g
        f = tau_x * epsilon * (log_a - logsumexp((g[None, :] - M) / epsilon, axis=1))
        g = tau_y * epsilon * (log_b - logsumexp((f[:, None] - M) / epsilon, axis=0))

        if track_dual:
            history.append(-_dual_objective(f, g, M, a, b, epsilon, tau_x, tau_y))
            if len(history) > 1 and history[-1] > history[-2] + 1e-9 * max(1.0, abs(history[-2])):
                message = (
                    f"entropic objective increased at sweep {iterations}: "
                    f"{history[-2]:.6e} -> {history[-1]:.6e}"
                )
                debug_print(f"[WARNING] {message}")
                warnings.append(message)

        if balanced:
            row_sums = np.exp((f[:, None] + g[None, :] - M) / epsilon).sum(axis=1)
            violation = float(np.max(np.abs(row_sums - a)))
            if violation <= tolerance:
                converged = True
                break
        else:
            with np.errstate(invalid="ignore"):
                change = max(
                    float(np.max(np.abs(np.nan_to_num(f - f_prev, nan=0.0)))),
                    float(np.max(np.abs(np.nan_to_num(g - g_prev, nan=0.0)))),
                )
            if change <= tolerance:
                converged = True
                break

    pi = np.exp((f[:, None] + g[None, :] - M) / epsilon)
    if not np.all(np.isfinite(pi)):
        raise NumericalError("Sinkhorn produced a non-finite coupling", {"iterations": iterations})
    violation = float(max(np.max(np.abs(pi.sum(axis=1) - a)), np.max(np.abs(pi.sum(axis=0) - b))))
    return SinkhornState(
        pi=pi,
        f=f,
        g=g,
        iterations=iterations,
        converged=converged,
        marginal_violation=violation,
        dual_history=history,
        warnings=warnings,
    )


def _to_coupling(state: SinkhornState, a: np.ndarray, b: np.ndarray, solver: str, objective: float) -> Coupling:
    report = SolverReport(
        solver=solver,
        iterations=state.iterations,
        outer_iterations=0,
        marginal_violation=state.marginal_violation,
        converged=state.converged,
        objective=objective,
        objective_history=list(state.dual_history),
        warnings=list(state.warnings),
    )
    if not state.converged:
        debug_print(
            f"[WARNING] {solver} Sinkhorn stopped after {state.iterations} sweeps without converging "
            f"(marginal violation {state.marginal_violation:.3e})"
        )
    return Coupling(values=state.pi, source_marginal=a, target_marginal=b, report=report)


def sinkhorn(a, b, C: CostMatrix, cfg: OTConfig) -> Coupling:
    """
    Entropic linear OT between weights a and b under cost C.

    Balanced when ``cfg.tau_x == cfg.tau_y == 1``; otherwise the marginals are
    KL-relaxed. Non-convergence is reported through ``report.converged``.

    Raises:
        ShapeError: If a or b do not match C
        InputError: If a or b do not sum to 1
    """
    n, m = C.shape
    a, b = check_marginals(a, b, n, m)
    if cfg.is_balanced():
        return sinkhorn_balanced(a, b, C.values, cfg)
    return sinkhorn_unbalanced(a, b, C.values, cfg)


def sinkhorn_balanced(a: np.ndarray, b: np.ndarray, M: np.ndarray, cfg: OTConfig) -> Coupling:
    state = sinkhorn_arrays(a, b, M, cfg.epsilon, 1.0, 1.0, cfg.max_iters, cfg.tolerance)
    return _to_coupling(state, a, b, "linear", linear_objective(state.pi, M, cfg.epsilon))


def sinkhorn_unbalanced(a: np.ndarray, b: np.ndarray, M: np.ndarray, cfg: OTConfig) -> Coupling:
    state = sinkhorn_arrays(a, b, M, cfg.epsilon, cfg.tau_x, cfg.tau_y, cfg.max_iters, cfg.tolerance)
    solver = "linear" if cfg.is_balanced() else "linear_unbalanced"
    return _to_coupling(state, a, b, solver, linear_objective(state.pi, M, cfg.epsilon))


class LinearSolver(BaseOTSolver):
    """Entropic linear OT on the inter-space cost"""

    def get_solver_name(self) -> str:
        return "linear"

    def requires_inter_cost(self) -> bool:
        return True

    def solve(self, a, b, C_XY=None, C_XX=None, C_YY=None) -> Coupling:
        if C_XY is None:
            raise InputError("linear solver needs an inter-space cost", {"solver": "linear"})
        return sinkhorn(a, b, C_XY, self.config)


__all__ = [
    "SinkhornState",
    "check_marginals",
    "sinkhorn_arrays",
    "sinkhorn",
    "sinkhorn_balanced",
    "sinkhorn_unbalanced",
    "LinearSolver",
]
