"""
``bridgeflow train``: run an experiment config end to end.
"""

from pathlib import Path
from typing import Any, Dict

from ..config import ExperimentConfig, load_experiment_config
from .common import existing_file
from .experiment import run_experiment


def apply_overrides(config: ExperimentConfig, seed=None, max_hours=None) -> ExperimentConfig:
    """Flag overrides are validated like the file and end up in the config hash."""
    data = config.model_dump()
    if max_hours is not None:
        data["train"]["max_hours"] = max_hours
    if seed is not None:
        data["seed"] = seed
        data["train"]["seed"] = seed
    return ExperimentConfig.model_validate(data)


def run(args, settings) -> Dict[str, Any]:
    config = load_experiment_config(str(existing_file(args.config, "--config")))
    config = apply_overrides(config, seed=args.seed, max_hours=args.max_hours)
    out_dir = Path(args.out)
    summary = run_experiment(config, out_dir, settings)
    return dict(summary, out=str(out_dir))
