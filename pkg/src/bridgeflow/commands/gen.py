"""
``bridgeflow gen``: write a synthetic dataset described by a SyntheticSpec JSON file.
"""

from pathlib import Path
from typing import Any, Dict

from ..config import SyntheticSpec, config_hash
from ..data_io import gen_paired_clusters, generate, save_features, save_pairs
from ..log import debug_print
from .common import existing_file, write_json


def run(args, settings) -> Dict[str, Any]:
    spec_path = existing_file(args.spec, "--spec")
    spec = SyntheticSpec.model_validate_json(spec_path.read_text(encoding="utf-8"))
    out_dir = Path(args.out)
    ext = args.format

    files: Dict[str, str] = {}
    if spec.kind == "paired_gaussian_clusters":
        X, Y, truth = gen_paired_clusters(spec)
        files["x"] = str(save_features(out_dir / f"x.{ext}", X))
        files["y"] = str(save_features(out_dir / f"y.{ext}", Y))
        files["truth"] = str(save_pairs(out_dir / "truth.csv", truth))
        shape = {"n": X.n, "source_dim": X.dim, "target_dim": Y.dim}
    else:
        points = generate(spec)
        files["points"] = str(save_features(out_dir / f"{spec.kind}.{ext}", points))
        shape = {"n": points.n, "dim": points.dim}

    result = {
        "kind": spec.kind,
        "spec": spec.model_dump(mode="json"),
        "config_hash": config_hash(spec),
        "files": files,
        **shape,
    }
    write_json(out_dir / "dataset.json", result)
    debug_print(f"[INFO] generated {spec.kind} dataset in {out_dir}")
    return result
