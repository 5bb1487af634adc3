"""
Bridge cost: paired points act as zero-cost links between the two spaces.

For a pair (i, j) in P the cost is 0; otherwise the cheapest route through an
anchor (x_p, y_p):

    C(i, j) = min_p  C_XX(i, x_p) + C_YY(y_p, j)
"""

import numpy as np

from ..errors import InputError, ShapeError
from ..types import CostMatrix, FeatureMatrix, PairedSet
from .base import BaseFusedCost
from .intra import intra_cost

# entries of the (n, block, m) intermediate kept in memory at once
_BLOCK_BUDGET = 1 << 22


def bridge_from_anchor_costs(source_to_anchor: np.ndarray, anchor_to_target: np.ndarray) -> np.ndarray:
    """min over anchors p of source_to_anchor[:, p] + anchor_to_target[p, :]"""
    n, l = source_to_anchor.shape
    m = anchor_to_target.shape[1]
    block = max(1, min(l, _BLOCK_BUDGET // max(1, n * m)))
    result = np.full((n, m), np.inf)
    for start in range(0, l, block):
        stop = min(l, start + block)
        routes = source_to_anchor[:, start:stop, None] + anchor_to_target[None, start:stop, :]
        np.minimum(result, routes.min(axis=1), out=result)
    return result


def bridge_cost(C_XX: CostMatrix, C_YY: CostMatrix, P: PairedSet) -> CostMatrix:
    """
    Raises:
        InputError: If P is empty
        ShapeError: If the intra costs are not square
    """
    n, n2 = C_XX.shape
    m, m2 = C_YY.shape
    if n != n2 or m != m2:
        raise ShapeError(f"intra costs must be square, got {C_XX.shape} and {C_YY.shape}")
    if len(P) == 0:
        raise InputError("bridge cost needs at least one paired point", {"pairs": 0})
    P.validate(n, m)
    values = bridge_from_anchor_costs(C_XX.values[:, P.sources], C_YY.values[P.targets, :])
    values[P.sources, P.targets] = 0.0
    return CostMatrix(values=values, kind="bridge")


class BridgeCost(BaseFusedCost):
    """Bridge cost on top of an intra-space metric"""

    def __init__(self, intra_metric: str = "cosine", **kwargs):
        super().__init__(**kwargs)
        self.intra_metric = intra_metric

    def get_cost_name(self) -> str:
        return "bridge"

    def build(self, X: FeatureMatrix, Y: FeatureMatrix, P: PairedSet) -> CostMatrix:
        self.check_anchors(X, Y, P)
        return bridge_cost(intra_cost(X, self.intra_metric), intra_cost(Y, self.intra_metric), P)


__all__ = ["bridge_cost", "bridge_from_anchor_costs", "BridgeCost"]
