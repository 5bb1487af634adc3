from typing import Dict, List, Optional

from ..config import OTConfig
from ..errors import InputError
from ..log import debug_print
from ..types import CostMatrix, Coupling
from .base import BaseOTSolver

LinearSolver = None
GWSolver = None
FGWSolver = None


def _resolve_linear_solver():
    global LinearSolver
    if LinearSolver is None:
        from .sinkhorn import LinearSolver as _LinearSolver
        LinearSolver = _LinearSolver
    return LinearSolver


def _resolve_gw_solver():
    global GWSolver
    if GWSolver is None:
        from .gromov import GWSolver as _GWSolver
        GWSolver = _GWSolver
    return GWSolver


def _resolve_fgw_solver():
    global FGWSolver
    if FGWSolver is None:
        from .gromov import FGWSolver as _FGWSolver
        FGWSolver = _FGWSolver
    return FGWSolver


_RESOLVERS = {
    "linear": _resolve_linear_solver,
    "gw": _resolve_gw_solver,
    "fgw": _resolve_fgw_solver,
}


class SolverManager:
    """Registry of OT solvers sharing one OTConfig"""

    SUPPORTED_SOLVERS = frozenset(_RESOLVERS)

    def __init__(self, config: Optional[OTConfig] = None):
        self.config = config or OTConfig()
        self.solvers: Dict[str, BaseOTSolver] = {}

    def get_solver(self, name: str) -> BaseOTSolver:
        key = (name or "").strip().lower()
        if key not in self.SUPPORTED_SOLVERS:
            raise InputError(
                f"Unknown solver {name!r}. Supported: {sorted(self.SUPPORTED_SOLVERS)}",
                {"solver": name},
            )
        if key not in self.solvers:
            self.solvers[key] = _RESOLVERS[key]()(self.config)
            debug_print(f"[DEBUG] {key} solver initialized ({self.config.model_dump()})")
        return self.solvers[key]

    def get_available_solvers(self) -> List[str]:
        return sorted(self.SUPPORTED_SOLVERS)

    def solve(
        self,
        name: str,
        a=None,
        b=None,
        C_XY: Optional[CostMatrix] = None,
        C_XX: Optional[CostMatrix] = None,
        C_YY: Optional[CostMatrix] = None,
    ) -> Coupling:
        """Run solver ``name``; None weights mean uniform."""
        solver = self.get_solver(name)
        shape = _problem_shape(C_XY, C_XX, C_YY)
        if a is None:
            a = [1.0 / shape[0]] * shape[0]
        if b is None:
            b = [1.0 / shape[1]] * shape[1]
        coupling = solver.solve(a, b, C_XY=C_XY, C_XX=C_XX, C_YY=C_YY)
        report = coupling.report
        debug_print(
            f"[INFO] {report.solver} solve: {shape[0]}x{shape[1]}, iterations={report.iterations}, "
            f"outer={report.outer_iterations}, violation={report.marginal_violation:.3e}, "
            f"converged={report.converged}"
        )
        return coupling


def _problem_shape(C_XY, C_XX, C_YY):
    if C_XY is not None:
        return C_XY.shape
    if C_XX is not None and C_YY is not None:
        return C_XX.shape[0], C_YY.shape[0]
    raise InputError("no cost matrices given to the solver")


__all__ = ["SolverManager"]
