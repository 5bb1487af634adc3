"""
Discrete entropic OT solvers and coupling sampling.
"""

from .base import BaseOTSolver
from .gromov import FGWSolver, GWSolver, entropic_gw, fgw
from .objectives import fgw_objective, gw_objective, linear_objective
from .sampling import expected_matching_accuracy, sample_pairs
from .sinkhorn import LinearSolver, sinkhorn, sinkhorn_balanced, sinkhorn_unbalanced
from .solver_manager import SolverManager

__all__ = [
    "BaseOTSolver",
    "LinearSolver",
    "GWSolver",
    "FGWSolver",
    "SolverManager",
    "sinkhorn",
    "sinkhorn_balanced",
    "sinkhorn_unbalanced",
    "entropic_gw",
    "fgw",
    "linear_objective",
    "gw_objective",
    "fgw_objective",
    "sample_pairs",
    "expected_matching_accuracy",
]
