"""
``bridgeflow eval``: score predictions or a coupling and write metrics.json.

- decode:  --pred labelled predictions, --truth labelled target anchors
- overlap: --pred labelled features (--truth unused)
- mse:     --pred and --truth labelled features, compared per class
- match:   --pred coupling file, --truth pairs CSV
"""

from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from ..data_io import load_coupling, load_features, load_pairs
from ..errors import InputError
from ..metrics import feature_overlap, matching_accuracy, nn_decode_accuracy, per_class_pixel_mse, write_metrics_json
from ..types import FeatureMatrix
from .common import existing_file, require_flag

METRICS = ("decode", "overlap", "mse", "match")


def _labelled(features: FeatureMatrix, flag: str) -> FeatureMatrix:
    if not features.has_labels():
        raise InputError(f"{flag} must carry a label column for this metric", {"flag": flag})
    return features


def _groups(features: FeatureMatrix) -> Dict[int, List[np.ndarray]]:
    return {
        int(c): list(features.points[features.labels == c]) for c in np.unique(features.labels)
    }


def run(args, settings) -> Dict[str, Any]:
    pred_path = existing_file(args.pred, "--pred")
    if args.metric == "overlap":
        report = feature_overlap(_labelled(load_features(pred_path), "--pred"), args.k, args.batch, args.seed)
    else:
        truth_path = existing_file(require_flag(args.truth, "--truth", f"for the {args.metric} metric"), "--truth")
        if args.metric == "decode":
            predictions = _labelled(load_features(pred_path), "--pred")
            anchors = _labelled(load_features(truth_path), "--truth")
            report = nn_decode_accuracy(predictions.points, anchors, predictions.labels)
        elif args.metric == "mse":
            predictions = _labelled(load_features(pred_path), "--pred")
            truth = _labelled(load_features(truth_path), "--truth")
            report = per_class_pixel_mse(_groups(truth), _groups(predictions))
        else:
            coupling = load_coupling(pred_path)
            n, m = coupling.shape
            report = matching_accuracy(coupling, load_pairs(truth_path, n, m), args.samples, args.seed)

    written = write_metrics_json(Path(args.out), [report])
    return {"metric": args.metric, "value": report.value, "metrics": str(written)}
