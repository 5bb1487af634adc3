"""
Core data carriers shared by every module.

All matrices are dense ``numpy`` float64 arrays; the dataclasses below add the
invariants the rest of the package relies on (finite entries, matching label
lengths, in-range pair indices, nonnegative mass).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, ShapeError, ValidationError

COST_KINDS = ("cosine", "sq_euclidean", "one_minus_pearson", "bridge", "knn", "kcca")


def as_matrix(values: Any, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise ShapeError(
            f"{name} must be 2-dimensional, got shape {array.shape}",
            {"name": name, "shape": list(array.shape)},
        )
    if not np.all(np.isfinite(array)):
        bad_rows = np.unique(np.argwhere(~np.isfinite(array))[:, 0]).tolist()
        raise InputError(
            f"{name} contains non-finite entries (rows {bad_rows[:10]})",
            {"name": name, "rows": bad_rows[:10]},
        )
    return array


def as_weights(values: Any, size: int, name: str) -> np.ndarray:
    """Coerce a marginal weight vector; ``None`` means uniform."""
    if values is None:
        return np.full(size, 1.0 / size)
    weights = np.asarray(values, dtype=np.float64).reshape(-1)
    if weights.shape[0] != size:
        raise ShapeError(
            f"{name} has length {weights.shape[0]}, expected {size}",
            {"name": name, "expected": size, "got": int(weights.shape[0])},
        )
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise InputError(f"{name} must be finite and nonnegative", {"name": name})
    return weights


@dataclass
class FeatureMatrix:
    """n×d latent points with optional integer labels and row identifiers."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    ids: Optional[List[str]] = None

    def __post_init__(self):
        self.points = as_matrix(self.points, "points")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
            if self.labels.shape[0] != self.n:
                raise ShapeError(
                    f"labels length {self.labels.shape[0]} does not match {self.n} rows",
                    {"labels": int(self.labels.shape[0]), "rows": self.n},
                )
        if self.ids is not None and len(self.ids) != self.n:
            raise ShapeError(
                f"ids length {len(self.ids)} does not match {self.n} rows",
                {"ids": len(self.ids), "rows": self.n},
            )

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def has_labels(self) -> bool:
        return self.labels is not None

    def subset(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            points=self.points[idx],
            labels=None if self.labels is None else self.labels[idx],
            ids=None if self.ids is None else [self.ids[i] for i in idx],
        )


@dataclass
class PairedSet:
    """Known cross-domain correspondences as (source_index, target_index) rows."""

    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64)
        if pairs.size == 0:
            pairs = pairs.reshape(0, 2)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ShapeError(
                f"pairs must have shape (l, 2), got {pairs.shape}",
                {"shape": list(pairs.shape)},
            )
        if np.any(pairs < 0):
            raise ValidationError("pair indices must be nonnegative")
        for column, side in ((0, "source"), (1, "target")):
            values, counts = np.unique(pairs[:, column], return_counts=True)
            duplicated = values[counts > 1]
            if duplicated.size:
                raise ValidationError(
                    f"duplicate {side} index in paired set: {duplicated[:10].tolist()}",
                    {"side": side, "indices": duplicated[:10].tolist()},
                )
        self.pairs = pairs

    @classmethod
    def identity(cls, n: int) -> "PairedSet":
        idx = np.arange(n, dtype=np.int64)
        return cls(np.stack([idx, idx], axis=1))

    @classmethod
    def from_list(cls, pairs: Sequence[Tuple[int, int]]) -> "PairedSet":
        return cls(np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2))

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def sources(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def targets(self) -> np.ndarray:
        return self.pairs[:, 1]

    def as_dict(self) -> Dict[int, int]:
        return {int(i): int(j) for i, j in self.pairs}

    def validate(self, n: int, m: int) -> "PairedSet":
        """Check indices against an n×m problem."""
        if len(self) and (self.sources.max() >= n or self.targets.max() >= m):
            bad = [
                (int(i), int(j)) for i, j in self.pairs if i >= n or j >= m
            ]
            raise ValidationError(
                f"pair index out of range for a {n}x{m} problem: {bad[:10]}",
                {"n": n, "m": m, "pairs": bad[:10]},
            )
        if len(self) > max(n, m):
            raise ValidationError(f"paired set larger than max(n, m) = {max(n, m)}")
        return self

    def restricted_to(self, source_index: np.ndarray, target_index: np.ndarray) -> "PairedSet":
        """Pairs with both endpoints in the given index lists, renumbered locally."""
        src_pos = {int(i): k for k, i in enumerate(source_index)}
        tgt_pos = {int(j): k for k, j in enumerate(target_index)}
        local = [
            (src_pos[int(i)], tgt_pos[int(j)])
            for i, j in self.pairs
            if int(i) in src_pos and int(j) in tgt_pos
        ]
        return PairedSet.from_list(local)


@dataclass
class CostMatrix:
    """n×m nonnegative cost with provenance."""

    values: np.ndarray
    kind: str
    normalized: bool = False

    def __post_init__(self):
        self.values = as_matrix(self.values, f"{self.kind} cost")
        if self.kind not in COST_KINDS:
            raise InputError(f"Unknown cost kind {self.kind!r}. Supported: {list(COST_KINDS)}")
        if np.any(self.values < 0):
            raise ValidationError(
                f"{self.kind} cost has negative entries (min {self.values.min():.3e})",
                {"kind": self.kind},
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.values.shape[0]), int(self.values.shape[1])


@dataclass
class SolverReport:
    solver: str
    iterations: int = 0
    outer_iterations: int = 0
    marginal_violation: float = float("nan")
    converged: bool = False
    objective: Optional[float] = None
    objective_history: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "solver": self.solver,
            "iterations": self.iterations,
            "outer_iterations": self.outer_iterations,
            "marginal_violation": self.marginal_violation,
            "converged": self.converged,
            "objective": self.objective,
            "objective_history": list(self.objective_history),
            "warnings": list(self.warnings),
            "extra": dict(self.extra),
        }


@dataclass
class Coupling:
    """Joint nonnegative mass over source×target with the intended marginals."""

    values: np.ndarray
    source_marginal: np.ndarray
    target_marginal: np.ndarray
    report: SolverReport = field(default_factory=lambda: SolverReport(solver="none"))

    def __post_init__(self):
        self.values = as_matrix(self.values, "coupling")
        if np.any(self.values < 0):
            raise ValidationError("coupling has negative mass")
        n, m = self.values.shape
        self.source_marginal = as_weights(self.source_marginal, n, "source_marginal")
        self.target_marginal = as_weights(self.target_marginal, m, "target_marginal")

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.values.shape[0]), int(self.values.shape[1])

    @property
    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)

    @property
    def total_mass(self) -> float:
        return float(self.values.sum())

    def marginal_violation(self) -> float:
        return float(max(
            np.max(np.abs(self.row_sums - self.source_marginal)),
            np.max(np.abs(self.col_sums - self.target_marginal)),
        ))


__all__ = [
    "COST_KINDS",
    "as_matrix",
    "as_weights",
    "FeatureMatrix",
    "PairedSet",
    "CostMatrix",
    "SolverReport",
    "Coupling",
]
