from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from ..errors import InputError
from ..types import CostMatrix, FeatureMatrix, PairedSet


class BaseFusedCost(ABC):
    """Base class for inter-space costs built from paired anchors"""

    def __init__(self, **kwargs):
        """Initialize the cost builder with its options"""
        self.config = kwargs

    @abstractmethod
    def build(self, X: FeatureMatrix, Y: FeatureMatrix, P: PairedSet) -> CostMatrix:
        """
        Build the n×m fused cost between X and Y

        Args:
            X: Source points
            Y: Target points
            P: Paired anchors indexing rows of X and Y

        Returns:
            CostMatrix: Nonnegative cost, zero on paired index pairs
        """
        pass

    @abstractmethod
    def get_cost_name(self) -> str:
        """Get the cost kind produced by this builder"""
        pass

    def check_anchors(self, X: FeatureMatrix, Y: FeatureMatrix, P: PairedSet, minimum: int = 1) -> None:
        P.validate(X.n, Y.n)
        if len(P) < minimum:
            raise InputError(
                f"{self.get_cost_name()} cost needs at least {minimum} paired point(s), got {len(P)}",
                {"kind": self.get_cost_name(), "pairs": len(P)},
            )

    def build_for_batch(
        self,
        X: FeatureMatrix,
        Y: FeatureMatrix,
        P: PairedSet,
        source_index: np.ndarray,
        target_index: np.ndarray,
    ) -> CostMatrix:
        """
        Cost restricted to a batch while keeping every anchor of P usable.

        The cost is built on the batch extended with the anchors that are not
        already in it (batch rows first), then sliced back to the batch. A
        batch covering the whole dataset in order yields exactly ``build``.
        """
        ext_src, batch_rows = _extend_with_anchors(source_index, P.sources)
        ext_tgt, batch_cols = _extend_with_anchors(target_index, P.targets)
        local_pairs = P.restricted_to(ext_src, ext_tgt)
        full = self.build(X.subset(ext_src), Y.subset(ext_tgt), local_pairs)
        return CostMatrix(
            values=full.values[np.ix_(batch_rows, batch_cols)],
            kind=full.kind,
            normalized=full.normalized,
        )


def _extend_with_anchors(batch: np.ndarray, anchors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    batch = np.asarray(batch, dtype=np.int64)
    present = set(batch.tolist())
    extra = [int(a) for a in anchors if int(a) not in present]
    # keep the anchor order stable so the extension is deterministic
    extended = np.concatenate([batch, np.asarray(extra, dtype=np.int64)])
    return extended, np.arange(batch.shape[0])
