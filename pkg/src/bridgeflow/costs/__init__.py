"""
Intra-space and fused inter-space cost matrices.
"""

from .base import BaseFusedCost
from .bridge import BridgeCost, bridge_cost
from .cost_manager import CostManager
from .intra import INTRA_METRICS, intra_cost, normalize_by_mean, pairwise_cost
from .kcca import KccaCost, kcca_fused_cost
from .knn import KnnCost, knn_fused_cost

__all__ = [
    "BaseFusedCost",
    "BridgeCost",
    "KnnCost",
    "KccaCost",
    "CostManager",
    "INTRA_METRICS",
    "intra_cost",
    "pairwise_cost",
    "normalize_by_mean",
    "bridge_cost",
    "knn_fused_cost",
    "kcca_fused_cost",
]
