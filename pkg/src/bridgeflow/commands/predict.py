"""
``bridgeflow predict``: push source points through a trained velocity field.
"""

import csv
import io
from pathlib import Path
from typing import Any, Dict

import numpy as np

from ..atomic import atomic_write_text
from ..data_io import load_features, save_features
from ..errors import InputError
from ..genot import load_checkpoint, push_forward
from ..types import FeatureMatrix
from .common import existing_file


def trajectory_csv(trajectory, steps: int, samples_per_input: int) -> str:
    """One row per (step, output row); rows are source-major like the predictions."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    dim = trajectory[0].shape[1]
    writer.writerow(["step", "t", "row", "input", "sample"] + [f"dim{k}" for k in range(dim)])
    for step, state in enumerate(trajectory):
        t = step / steps
        for row in range(state.shape[0]):
            writer.writerow(
                [step, repr(t), row, row // samples_per_input, row % samples_per_input]
                + [repr(float(v)) for v in state[row]]
            )
    return buffer.getvalue()


def run(args, settings) -> Dict[str, Any]:
    if args.samples_per_input < 1:
        raise InputError("--samples-per-input must be >= 1", {"flag": "--samples-per-input"})
    vf, _, metadata = load_checkpoint(existing_file(args.checkpoint, "--checkpoint"))
    X = load_features(existing_file(args.x, "--x"))
    if X.dim != vf.source_dim:
        raise InputError(
            f"--x has {X.dim} columns but the checkpoint expects {vf.source_dim}",
            {"flag": "--x", "expected": vf.source_dim, "got": X.dim},
        )

    k = args.samples_per_input
    rows = np.repeat(np.arange(X.n), k)
    rng = np.random.default_rng(args.seed)
    z = rng.standard_normal((rows.size, vf.target_dim))
    result = push_forward(vf, X.points[rows], z, args.steps, return_trajectory=bool(args.dump_trajectory))
    predicted, trajectory = result if args.dump_trajectory else (result, None)

    labels = None if X.labels is None else X.labels[rows]
    written = save_features(Path(args.out), FeatureMatrix(predicted, labels=labels))
    files = {"predictions": str(written)}
    if trajectory is not None:
        files["trajectory"] = str(atomic_write_text(args.dump_trajectory, trajectory_csv(trajectory, args.steps, k)))
    return {
        "rows": int(predicted.shape[0]),
        "dim": int(predicted.shape[1]),
        "steps": args.steps,
        "samples_per_input": k,
        "seed": args.seed,
        "checkpoint_config_hash": metadata.get("config_hash"),
        "files": files,
    }
