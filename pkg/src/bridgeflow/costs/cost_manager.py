from typing import Dict, List, Optional

from ..config import AlignmentConfig
from ..errors import InputError
from ..log import debug_print
from .base import BaseFusedCost

BridgeCost = None
KnnCost = None
KccaCost = None


def _resolve_bridge_cost():
    global BridgeCost
    if BridgeCost is None:
        from .bridge import BridgeCost as _BridgeCost
        BridgeCost = _BridgeCost
    return BridgeCost


def _resolve_knn_cost():
    global KnnCost
    if KnnCost is None:
        from .knn import KnnCost as _KnnCost
        KnnCost = _KnnCost
    return KnnCost


def _resolve_kcca_cost():
    global KccaCost
    if KccaCost is None:
        from .kcca import KccaCost as _KccaCost
        KccaCost = _KccaCost
    return KccaCost


class CostManager:
    """Builds fused-cost builders from an alignment configuration"""

    SUPPORTED_COSTS = frozenset({"bridge", "knn", "kcca"})

    def __init__(self, config: Optional[AlignmentConfig] = None):
        self.config = config or AlignmentConfig()
        self.builders: Dict[str, BaseFusedCost] = {}

    def _create(self, kind: str) -> BaseFusedCost:
        if kind == "bridge":
            return _resolve_bridge_cost()(intra_metric=self.config.intra_metric)
        if kind == "knn":
            return _resolve_knn_cost()(k=self.config.knn_k, cross_weight=self.config.knn_cross_weight)
        return _resolve_kcca_cost()(
            kernel_bandwidth=self.config.kcca_bandwidth,
            regularization=self.config.kcca_regularization,
            components=self.config.kcca_components,
        )

    def get_builder(self, kind: Optional[str] = None) -> BaseFusedCost:
        """Get the builder for ``kind`` (default: the configured cost kind)"""
        kind = (kind or self.config.cost_kind).strip().lower()
        if kind not in self.SUPPORTED_COSTS:
            raise InputError(
                f"Unknown fused cost kind {kind!r}. Supported: {sorted(self.SUPPORTED_COSTS)}",
                {"kind": kind},
            )
        if kind not in self.builders:
            self.builders[kind] = self._create(kind)
            debug_print(f"[DEBUG] {kind} cost builder initialized")
        return self.builders[kind]

    def get_available_costs(self) -> List[str]:
        return sorted(self.SUPPORTED_COSTS)


__all__ = ["CostManager"]
