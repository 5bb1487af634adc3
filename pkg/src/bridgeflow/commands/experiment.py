"""
Experiment driver: data -> alignment plan -> flow training -> evaluation -> artifacts.

A run directory holds:

- ``config.json``   resolved experiment config
- ``manifest.json`` provenance and timestamps (the only file with timestamps)
- ``model.bfck``    velocity field (and reweighting nets) checkpoint
- ``history.csv``   per-iteration losses and validation values
- ``metrics.json``  final metrics, byte-stable for a fixed config and seed
- ``summary.json``  run outcome
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..alignment import AlignmentPlan
from ..atomic import atomic_write_text
from ..config import BridgeflowSettings, ExperimentConfig, canonical_json, config_hash
from ..data_io import gen_paired_clusters, generate, load_features, load_pairs, subsample_pairs
from ..errors import InputError
from ..genot import build_reweighting_nets, build_velocity_field, push_forward, save_checkpoint, train
from ..genot.architectures import VelocityField
from ..log import debug_print
from ..metrics import (
    MetricReport,
    energy_distance,
    feature_overlap,
    matching_accuracy,
    nn_decode_accuracy,
    write_metrics_json,
)
from ..types import FeatureMatrix, PairedSet
from .common import RunManifest, write_json

VALIDATION_POINTS = 256
ENERGY_POINTS = 2000
_VALIDATION_STREAM = 1
_EVALUATION_STREAM = 2


@dataclass
class ExperimentData:
    X: FeatureMatrix
    Y: FeatureMatrix
    truth: Optional[PairedSet]
    pairs: PairedSet


def _resolve(settings: BridgeflowSettings, path: str) -> Path:
    resolved = settings.resolve_data_path(path)
    if not resolved.is_file():
        raise InputError(f"dataset file not found: {path} (resolved to {resolved})", {"file": str(path)})
    return resolved


def load_experiment_data(config: ExperimentConfig, settings: BridgeflowSettings) -> ExperimentData:
    """
    Build or load X, Y, the ground truth and the paired subset.

    Paired points come from ``dataset.pairs_path`` when given, otherwise they
    are a ``paired_ratio`` subsample of the ground truth.
    """
    truth: Optional[PairedSet] = None
    pairs: Optional[PairedSet] = None
    if config.synthetic is not None:
        if config.synthetic.kind == "paired_gaussian_clusters":
            X, Y, truth = gen_paired_clusters(config.synthetic)
        else:
            X = generate(config.synthetic)
            Y = generate(config.target_synthetic)
    else:
        refs = config.dataset
        X = load_features(_resolve(settings, refs.x_path))
        Y = load_features(_resolve(settings, refs.y_path))
        if refs.truth_path:
            truth = load_pairs(_resolve(settings, refs.truth_path), X.n, Y.n)
        if refs.pairs_path:
            pairs = load_pairs(_resolve(settings, refs.pairs_path), X.n, Y.n)

    if pairs is None:
        if truth is not None and len(truth):
            pairs = subsample_pairs(truth, config.paired_ratio, config.seed)
        else:
            pairs = PairedSet.from_list([])
    if len(pairs) == 0 and (config.alignment.strategy == "true" or config.alignment.solver != "gw"):
        raise InputError(
            f"{config.alignment.strategy}/{config.alignment.solver} alignment needs paired points; "
            "provide ground truth or pairs, or use the gw solver",
            {"strategy": config.alignment.strategy, "solver": config.alignment.solver},
        )
    return ExperimentData(X=X, Y=Y, truth=truth, pairs=pairs)


def _subset(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    return np.arange(n) if n <= size else np.sort(rng.choice(n, size=size, replace=False))


def make_validation(data: ExperimentData, steps: int, seed: int) -> Callable[[VelocityField], float]:
    """
    Higher-is-better score on a fixed subset with fixed noise: decode accuracy
    when both sides are labelled, negative energy distance otherwise.
    """
    rng = np.random.default_rng([seed, _VALIDATION_STREAM])
    rows = _subset(rng, data.X.n, VALIDATION_POINTS)
    x = data.X.points[rows]
    z = rng.standard_normal((rows.size, data.Y.dim))
    if data.X.has_labels() and data.Y.has_labels():
        labels = data.X.labels[rows]

        def decode(vf: VelocityField) -> float:
            return nn_decode_accuracy(push_forward(vf, x, z, steps), data.Y, labels).value

        return decode

    target = data.Y.points[_subset(rng, data.Y.n, VALIDATION_POINTS)]

    def fit(vf: VelocityField) -> float:
        return -energy_distance(push_forward(vf, x, z, steps), target)

    return fit


def evaluate_run(
    data: ExperimentData,
    vf: VelocityField,
    plan: AlignmentPlan,
    steps: int,
    seed: int,
) -> List[MetricReport]:
    rng = np.random.default_rng([seed, _EVALUATION_STREAM])
    z = rng.standard_normal((data.X.n, data.Y.dim))
    predictions = push_forward(vf, data.X.points, z, steps)

    reports: List[MetricReport] = []
    if data.X.has_labels() and data.Y.has_labels():
        reports.append(nn_decode_accuracy(predictions, data.Y, data.X.labels))
        if data.X.n > 15:
            reports.append(feature_overlap(FeatureMatrix(predictions, labels=data.X.labels)))

    pred_rows = _subset(rng, data.X.n, ENERGY_POINTS)
    target_rows = _subset(rng, data.Y.n, ENERGY_POINTS)
    target = data.Y.points[target_rows]
    baseline = energy_distance(z[pred_rows], target)
    reports.append(MetricReport(
        name="energy_distance",
        value=energy_distance(predictions[pred_rows], target),
        sample_count=int(pred_rows.size),
        seed=seed,
        details={"noise_baseline": baseline},
    ))
    if plan.coupling is not None and data.truth is not None and len(data.truth):
        reports.append(matching_accuracy(plan.coupling, data.truth))
    return reports


def run_experiment(
    config: ExperimentConfig,
    out_dir: Path,
    settings: Optional[BridgeflowSettings] = None,
) -> Dict[str, Any]:
    """
    Run one experiment end to end and write every artifact into ``out_dir``.

    Raises:
        InputError: Missing data or paired points
        NumericalError: Solver, training or integration failure (manifest marked failed)
    """
    settings = settings or BridgeflowSettings()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)
    train_cfg = config.train

    data = load_experiment_data(config, settings)
    atomic_write_text(out_dir / "config.json", canonical_json(config) + "\n")
    manifest = RunManifest(
        config=config.model_dump(mode="json"),
        config_hash=digest,
        seed=config.seed,
        artifacts={
            "config": "config.json",
            "checkpoint": "model.bfck",
            "history": "history.csv",
            "metrics": "metrics.json",
            "summary": "summary.json",
        },
    )
    manifest.write(out_dir)
    debug_print(
        f"[INFO] experiment {digest[:12]}: X {data.X.n}x{data.X.dim}, Y {data.Y.n}x{data.Y.dim}, "
        f"pairs={len(data.pairs)}, arch={config.arch}"
    )

    try:
        plan = AlignmentPlan.build(data.X, data.Y, data.pairs, config.alignment)
        vf = build_velocity_field(
            config.arch, data.X.dim, data.Y.dim, seed=config.seed, hidden=config.hidden, layers=config.layers
        )
        rw = build_reweighting_nets(data.X.dim, data.Y.dim, seed=config.seed) if train_cfg.unbalanced else None
        validation = make_validation(data, train_cfg.ode_steps, config.seed)
        result = train(plan, vf, train_cfg, rw=rw, validation=validation)
    except Exception:
        manifest.finalize(out_dir, "failed", converged=False, stopped_reason="error")
        raise

    metadata = {"config_hash": digest, "iterations": result.iterations, "converged": result.converged}
    save_checkpoint(out_dir / "model.bfck", result.vf, result.rw, metadata)
    atomic_write_text(out_dir / "history.csv", result.history.to_csv())

    reports = evaluate_run(data, result.vf, plan, train_cfg.ode_steps, config.seed)
    write_metrics_json(out_dir / "metrics.json", reports, digest)

    losses = result.history.losses()
    summary = {
        "config_hash": digest,
        "iterations": result.iterations,
        "converged": result.converged,
        "stopped_reason": result.stopped_reason,
        "best_val": result.best_val,
        "final_loss": losses[-1] if losses else None,
        "pairs": len(data.pairs),
        "metrics": {report.name: report.value for report in reports},
    }
    write_json(out_dir / "summary.json", summary)
    if plan.coupling is not None:
        manifest.warnings.extend(plan.coupling.report.warnings)
    manifest.finalize(out_dir, "completed", result.converged, result.stopped_reason)
    return summary


__all__ = [
    "ExperimentData",
    "load_experiment_data",
    "make_validation",
    "evaluate_run",
    "run_experiment",
]
