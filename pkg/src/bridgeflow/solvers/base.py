from abc import ABC, abstractmethod
from typing import Optional

from ..config import OTConfig
from ..types import CostMatrix, Coupling


class BaseOTSolver(ABC):
    """Base class for discrete entropic OT solvers"""

    def __init__(self, config: Optional[OTConfig] = None):
        """Initialize the solver with its OT parameters"""
        self.config = config or OTConfig()

    @abstractmethod
    def solve(
        self,
        a,
        b,
        C_XY: Optional[CostMatrix] = None,
        C_XX: Optional[CostMatrix] = None,
        C_YY: Optional[CostMatrix] = None,
    ) -> Coupling:
        """
        Solve for a coupling between weights a and b

        Args:
            a: Source weights (None for uniform)
            b: Target weights (None for uniform)
            C_XY: Inter-space cost (linear and fused solvers)
            C_XX: Source intra-space cost (quadratic solvers)
            C_YY: Target intra-space cost (quadratic solvers)

        Returns:
            Coupling: Transport plan with its solver report
        """
        pass

    @abstractmethod
    def get_solver_name(self) -> str:
        """Get the registry name of this solver"""
        pass

    def requires_inter_cost(self) -> bool:
        return False

    def requires_intra_costs(self) -> bool:
        return False
