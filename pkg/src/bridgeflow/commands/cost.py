"""
``bridgeflow cost``: build a fused inter-space cost from features and paired points.
"""

from pathlib import Path
from typing import Any, Dict

from ..config import AlignmentConfig
from ..costs import CostManager, intra_cost
from ..data_io import load_features, load_pairs, save_cost
from ..log import debug_print
from .common import existing_file, require_flag


def alignment_config_from_args(args) -> AlignmentConfig:
    return AlignmentConfig(
        cost_kind=args.kind,
        intra_metric=args.intra_metric,
        knn_k=args.knn_k,
        knn_cross_weight=args.knn_cross_weight,
        kcca_bandwidth=args.kcca_bandwidth,
        kcca_regularization=args.kcca_regularization,
        kcca_components=args.kcca_components,
    )


def run(args, settings) -> Dict[str, Any]:
    require_flag(args.pairs, "--pairs", f"for the {args.kind} cost")
    X = load_features(existing_file(args.x, "--x"))
    Y = load_features(existing_file(args.y, "--y"))
    P = load_pairs(existing_file(args.pairs, "--pairs"), X.n, Y.n)
    config = alignment_config_from_args(args)

    builder = CostManager(config).get_builder(args.kind)
    cost = builder.build(X, Y, P)
    files = {"cost": str(save_cost(Path(args.out), cost))}
    if args.cxx_out:
        files["cxx"] = str(save_cost(Path(args.cxx_out), intra_cost(X, config.intra_metric)))
    if args.cyy_out:
        files["cyy"] = str(save_cost(Path(args.cyy_out), intra_cost(Y, config.intra_metric)))
    debug_print(f"[INFO] {args.kind} cost {cost.shape[0]}x{cost.shape[1]} written to {args.out}")
    return {
        "kind": cost.kind,
        "shape": list(cost.shape),
        "pairs": len(P),
        "mean": float(cost.values.mean()),
        "files": files,
    }
