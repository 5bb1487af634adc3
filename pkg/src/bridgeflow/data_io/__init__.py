"""
Synthetic generators and on-disk formats.
"""

from .formats import (
    load_cost,
    load_coupling,
    load_features,
    load_pairs,
    save_cost,
    save_coupling,
    save_features,
    save_pairs,
)
from .synthetic import gen_paired_clusters, gen_spiral, gen_swiss_roll, generate, subsample_pairs

__all__ = [
    "gen_swiss_roll",
    "gen_spiral",
    "gen_paired_clusters",
    "generate",
    "subsample_pairs",
    "load_features",
    "save_features",
    "load_pairs",
    "save_pairs",
    "load_cost",
    "save_cost",
    "load_coupling",
    "save_coupling",
]
