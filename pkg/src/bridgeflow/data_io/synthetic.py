"""
Synthetic datasets: Swiss roll, Archimedean spiral and paired Gaussian clusters.

Every generator is a pure function of its arguments; the seed fully determines
the output.
"""

import math
from typing import Tuple, Union

import numpy as np

from ..config import SyntheticSpec
from ..errors import InputError
from ..types import FeatureMatrix, PairedSet

SWISS_ROLL_T = (1.5 * math.pi, 4.5 * math.pi)
SWISS_ROLL_HEIGHT = 21.0
SPIRAL_THETA_MAX = 4.0 * math.pi
SPIRAL_GROWTH = 0.5
MODALITY_NOISE = 0.01

Generated = Union[FeatureMatrix, Tuple[FeatureMatrix, np.ndarray]]


def _check_size(n: int, kind: str) -> None:
    if n < 10:
        raise InputError(f"{kind} needs n >= 10, got {n}", {"kind": kind, "n": n})


def gen_swiss_roll(n: int, noise: float = 0.0, seed: int = 0, return_params: bool = False) -> Generated:
    """
    Points (t cos t, h, t sin t) with t in [1.5 pi, 4.5 pi] and h in [0, 21].

    With ``return_params`` the (n, 2) array of (t, h) is returned as well.
    """
    _check_size(n, "swiss_roll_3d")
    rng = np.random.default_rng(seed)
    t = rng.uniform(SWISS_ROLL_T[0], SWISS_ROLL_T[1], size=n)
    h = rng.uniform(0.0, SWISS_ROLL_HEIGHT, size=n)
    points = np.stack([t * np.cos(t), h, t * np.sin(t)], axis=1)
    if noise > 0:
        points = points + noise * rng.standard_normal(points.shape)
    features = FeatureMatrix(points)
    if return_params:
        return features, np.stack([t, h], axis=1)
    return features


def gen_spiral(n: int, noise: float = 0.0, seed: int = 0, return_params: bool = False) -> Generated:
    """Archimedean spiral r = 0.5 theta, theta in [0, 4 pi]."""
    _check_size(n, "spiral_2d")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, SPIRAL_THETA_MAX, size=n)
    radius = SPIRAL_GROWTH * theta
    points = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
    if noise > 0:
        points = points + noise * rng.standard_normal(points.shape)
    features = FeatureMatrix(points)
    if return_params:
        return features, theta.reshape(-1, 1)
    return features


def _orthonormal_columns(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    # Fix column signs so the map does not depend on the LAPACK sign convention.
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def _class_centers(rng: np.random.Generator, classes: int, latent_dim: int, separation: float) -> np.ndarray:
    if classes <= latent_dim:
        centers = _orthonormal_columns(rng, latent_dim, classes).T
    else:
        centers = rng.standard_normal((classes, latent_dim))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    return separation * centers


def gen_paired_clusters(spec: SyntheticSpec) -> Tuple[FeatureMatrix, FeatureMatrix, PairedSet]:
    """
    Shared latent Gaussian clusters rendered in two modalities.

    Each class gets a center and a random rotation of an anisotropic noise
    shape in a latent space; every sample is then embedded into p and q
    dimensions by two independent orthonormal maps plus a little per-modality
    noise. Row i of X and row i of Y are the same sample.

    Raises:
        InputError: Fewer than two classes or latent_dim > min(p, q)
    """
    p, q = spec.source_dim, spec.target_dim
    if spec.classes < 2:
        raise InputError(f"paired clusters need classes >= 2, got {spec.classes}")
    if spec.n < spec.classes:
        raise InputError(f"n ({spec.n}) must be >= classes ({spec.classes})")
    latent_dim = spec.latent_dim if spec.latent_dim is not None else min(p, q)
    if latent_dim > min(p, q):
        raise InputError(
            f"latent_dim ({latent_dim}) must be <= min(source_dim, target_dim) = {min(p, q)}",
            {"latent_dim": latent_dim, "source_dim": p, "target_dim": q},
        )

    rng = np.random.default_rng(spec.seed)
    centers = _class_centers(rng, spec.classes, latent_dim, spec.separation)
    rotations = [_orthonormal_columns(rng, latent_dim, latent_dim) for _ in range(spec.classes)]
    axis_scales = np.linspace(1.0, 0.5, latent_dim)

    labels = rng.permutation(np.arange(spec.n) % spec.classes).astype(np.int64)
    deviations = rng.standard_normal((spec.n, latent_dim)) * axis_scales
    deviations *= spec.noise_scale / math.sqrt(latent_dim)
    latent = np.empty((spec.n, latent_dim))
    for c in range(spec.classes):
        members = labels == c
        latent[members] = centers[c] + deviations[members] @ rotations[c].T

    embed_x = _orthonormal_columns(rng, p, latent_dim)
    embed_y = _orthonormal_columns(rng, q, latent_dim)
    x_points = latent @ embed_x.T + MODALITY_NOISE * spec.noise_scale * rng.standard_normal((spec.n, p))
    y_points = latent @ embed_y.T + MODALITY_NOISE * spec.noise_scale * rng.standard_normal((spec.n, q))

    X = FeatureMatrix(x_points, labels=labels.copy())
    Y = FeatureMatrix(y_points, labels=labels.copy())
    return X, Y, PairedSet.identity(spec.n)


def generate(spec: SyntheticSpec) -> Union[FeatureMatrix, Tuple[FeatureMatrix, FeatureMatrix, PairedSet]]:
    """Dispatch on ``spec.kind``."""
    if spec.kind == "swiss_roll_3d":
        return gen_swiss_roll(spec.n, spec.noise_scale, spec.seed)
    if spec.kind == "spiral_2d":
        return gen_spiral(spec.n, spec.noise_scale, spec.seed)
    return gen_paired_clusters(spec)


def subsample_pairs(truth: PairedSet, ratio: float, seed: int = 0) -> PairedSet:
    """
    Uniform subset of ceil(ratio * l) pairs without replacement, kept in the
    original order.

    Raises:
        InputError: ratio outside (0, 1]
    """
    if not 0.0 < ratio <= 1.0:
        raise InputError(f"ratio must be in (0, 1], got {ratio}", {"ratio": ratio})
    count = math.ceil(round(ratio * len(truth), 9))
    if count >= len(truth):
        return PairedSet(truth.pairs.copy())
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(truth), size=count, replace=False))
    return PairedSet(truth.pairs[chosen])


__all__ = [
    "gen_swiss_roll",
    "gen_spiral",
    "gen_paired_clusters",
    "generate",
    "subsample_pairs",
]
