"""
Evaluation metrics.

Every metric that goes into ``metrics.json`` returns a ``MetricReport``;
``aes_ratio`` and ``energy_distance`` are plain scalars used in sweeps and
acceptance checks.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Hashable, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.spatial.distance import cdist

from .atomic import atomic_write_text
from .errors import InputError, ShapeError
from .solvers.sampling import expected_matching_accuracy, sample_pairs
from .types import Coupling, FeatureMatrix, PairedSet, as_matrix

DEFAULT_OVERLAP_K = 15
AES_FLOOR = 1e-3
_ROW_BLOCK = 1024


class MetricReport(BaseModel):
    """One metric value with optional per-class breakdown."""

    name: str
    value: float
    breakdown: Optional[Dict[str, float]] = None
    sample_count: Optional[int] = None
    seed: Optional[int] = None
    details: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("value")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"metric value must be finite, got {value}")
        return value

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def write_metrics_json(
    path: Union[str, Path],
    reports: Sequence[MetricReport],
    config_hash: Optional[str] = None,
) -> Path:
    """Write ``{config_hash, metrics: [...]}`` with sorted keys (byte-stable for equal inputs)."""
    payload = {
        "config_hash": config_hash,
        "metrics": [dict(report.to_dict(), config_hash=config_hash) for report in reports],
    }
    return atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _label_key(label: Hashable) -> str:
    return str(int(label)) if isinstance(label, (int, np.integer)) else str(label)


# ========== Representation metrics ==========

def feature_overlap(
    X: FeatureMatrix,
    k: int = DEFAULT_OVERLAP_K,
    batch: Optional[int] = None,
    seed: int = 0,
) -> MetricReport:
    """
    Mean fraction of each point's k Euclidean nearest neighbours (self
    excluded) that carry a different label.

    ``batch`` evaluates on a uniform random subset of that many points.
    Distance ties go to the lower row index.

    Raises:
        InputError: Missing labels or n <= k
    """
    if not X.has_labels():
        raise InputError("feature_overlap needs labelled points")
    points, labels = X.points, X.labels
    if batch is not None and batch < X.n:
        chosen = np.sort(np.random.default_rng(seed).choice(X.n, size=batch, replace=False))
        points, labels = points[chosen], labels[chosen]
    n = points.shape[0]
    if k < 1 or n <= k:
        raise InputError(f"feature_overlap needs 1 <= k < n, got k={k}, n={n}", {"k": k, "n": n})

    fractions = np.empty(n)
    for start in range(0, n, _ROW_BLOCK):
        stop = min(n, start + _ROW_BLOCK)
        distances = cdist(points[start:stop], points)
        distances[np.arange(stop - start), np.arange(start, stop)] = np.inf
        neighbours = np.argsort(distances, axis=1, kind="stable")[:, :k]
        fractions[start:stop] = np.mean(labels[neighbours] != labels[start:stop, None], axis=1)

    breakdown = {
        _label_key(c): float(fractions[labels == c].mean()) for c in np.unique(labels)
    }
    return MetricReport(
        name="feature_overlap",
        value=float(fractions.mean()),
        breakdown=breakdown,
        sample_count=n,
        seed=seed if batch is not None else None,
        details={"k": k},
    )


def nn_decode_accuracy(
    predictions: Any,
    anchors: FeatureMatrix,
    true_labels: Sequence[int],
) -> MetricReport:
    """
    Fraction of predictions whose cosine-nearest anchor has the true label.

    Ties go to the lowest anchor index. Zero-norm predictions are excluded from
    the search, counted as wrong and listed under ``details["zero_norm_rows"]``.

    Raises:
        InputError: Unlabelled or zero-norm anchors
        ShapeError: Dimension or length mismatch
    """
    predictions = as_matrix(predictions, "predictions")
    true_labels = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    if not anchors.has_labels():
        raise InputError("nn_decode_accuracy needs labelled anchors")
    if predictions.shape[1] != anchors.dim:
        raise ShapeError(
            f"predictions have {predictions.shape[1]} columns, anchors have {anchors.dim}",
            {"predictions": predictions.shape[1], "anchors": anchors.dim},
        )
    if true_labels.shape[0] != predictions.shape[0]:
        raise ShapeError(f"{true_labels.shape[0]} labels for {predictions.shape[0]} predictions")
    anchor_norms = np.linalg.norm(anchors.points, axis=1)
    if np.any(anchor_norms == 0.0):
        raise InputError(
            f"anchor row {int(np.flatnonzero(anchor_norms == 0.0)[0])} has zero norm",
            {"rows": np.flatnonzero(anchor_norms == 0.0)[:10].tolist()},
        )

    norms = np.linalg.norm(predictions, axis=1)
    valid = norms > 0.0
    correct = np.zeros(predictions.shape[0], dtype=bool)
    if np.any(valid):
        similarity = (predictions[valid] / norms[valid, None]) @ (anchors.points / anchor_norms[:, None]).T
        nearest = np.argmin(1.0 - similarity, axis=1)
        correct[valid] = anchors.labels[nearest] == true_labels[valid]

    breakdown = {
        _label_key(c): float(correct[true_labels == c].mean()) for c in np.unique(true_labels)
    }
    zero_rows = np.flatnonzero(~valid).tolist()
    details: Dict[str, Any] = {"zero_norm_rows": zero_rows[:100], "zero_norm_count": len(zero_rows)}
    return MetricReport(
        name="nn_decode_accuracy",
        value=float(correct.mean()) if correct.size else 0.0,
        breakdown=breakdown,
        sample_count=int(predictions.shape[0]),
        details=details,
    )


def per_class_pixel_mse(
    true_groups: Mapping[Hashable, Sequence[Any]],
    recon_groups: Mapping[Hashable, Sequence[Any]],
) -> MetricReport:
    """
    Per class: squared difference between the mean true array and the mean
    reconstructed array, averaged over entries. Overall value is the mean over
    classes.

    Raises:
        InputError: Mismatched class keys or an empty class (named)
        ShapeError: Arrays with different flat sizes
    """
    if set(true_groups) != set(recon_groups):
        raise InputError(
            "true and reconstructed groups have different classes",
            {"true": sorted(map(str, true_groups)), "recon": sorted(map(str, recon_groups))},
        )
    if not true_groups:
        raise InputError("per_class_pixel_mse needs at least one class")
    size: Optional[int] = None
    breakdown: Dict[str, float] = {}
    for label in sorted(true_groups, key=str):
        means = []
        for side, groups in (("true", true_groups), ("recon", recon_groups)):
            items = list(groups[label])
            if not items:
                raise InputError(f"class {label!r} has no {side} arrays", {"class": str(label), "side": side})
            flat = np.stack([np.asarray(item, dtype=np.float64).reshape(-1) for item in items])
            if size is None:
                size = flat.shape[1]
            if flat.shape[1] != size:
                raise ShapeError(
                    f"class {label!r} {side} arrays have {flat.shape[1]} entries, expected {size}",
                    {"class": str(label), "side": side},
                )
            means.append(flat.mean(axis=0))
        breakdown[_label_key(label)] = float(np.mean((means[0] - means[1]) ** 2))
    return MetricReport(
        name="per_class_pixel_mse",
        value=float(np.mean(list(breakdown.values()))),
        breakdown=breakdown,
        sample_count=len(breakdown),
    )


# ========== Coupling metrics ==========

def matching_accuracy(pi: Coupling, truth: PairedSet, samples: Optional[int] = None, seed: int = 0) -> MetricReport:
    return MetricReport(
        name="matching_accuracy",
        value=expected_matching_accuracy(pi, truth, samples, seed),
        sample_count=samples,
        seed=seed if samples is not None else None,
    )


def excluded_ratio(
    pi: Coupling,
    sample_count: int,
    seed: int = 0,
    formula: str = "corrected",
) -> MetricReport:
    """
    Share of the dataset never drawn when sampling ``sample_count`` pairs from pi.

    ``corrected``: 1 - (unique sources + unique targets) / (n + m), always in [0, 1].
    ``printed``: 1 - unique sources / N - unique targets / N, which can go negative.
    """
    if sample_count < 1:
        raise InputError(f"sample_count must be >= 1, got {sample_count}")
    n, m = pi.shape
    drawn = sample_pairs(pi, sample_count, seed)
    unique_x = int(np.unique(drawn[:, 0]).size)
    unique_y = int(np.unique(drawn[:, 1]).size)
    if formula == "corrected":
        value = 1.0 - (unique_x + unique_y) / (n + m)
    elif formula == "printed":
        value = 1.0 - unique_x / sample_count - unique_y / sample_count
    else:
        raise InputError(f"formula must be 'corrected' or 'printed', got {formula!r}")
    return MetricReport(
        name="excluded_ratio",
        value=float(value),
        sample_count=sample_count,
        seed=seed,
        details={"formula": formula, "unique_sources": unique_x, "unique_targets": unique_y},
    )


def aes_ratio(matching_acc: float, excluded: float, floor: float = AES_FLOOR) -> float:
    """matching accuracy / max(excluded ratio, floor)"""
    return float(matching_acc / max(excluded, floor))


# ========== Distribution fit ==========

def _samples(values: Any, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    array = as_matrix(array, name)
    if array.shape[0] == 0:
        raise InputError(f"{name} is empty")
    return array


def energy_distance(A: Any, B: Any) -> float:
    """
    V-statistic energy distance 2 E|a - b| - E|a - a'| - E|b - b'|, clamped at 0.

    1-D inputs are read as scalar samples.
    """
    A = _samples(A, "A")
    B = _samples(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ShapeError(f"sample dimensions differ: {A.shape[1]} vs {B.shape[1]}")
    cross = cdist(A, B).mean()
    within_a = cdist(A, A).mean()
    within_b = cdist(B, B).mean()
    return float(max(0.0, 2.0 * cross - within_a - within_b))


__all__ = [
    "DEFAULT_OVERLAP_K",
    "AES_FLOOR",
    "MetricReport",
    "write_metrics_json",
    "feature_overlap",
    "nn_decode_accuracy",
    "per_class_pixel_mse",
    "matching_accuracy",
    "excluded_ratio",
    "aes_ratio",
    "energy_distance",
]
