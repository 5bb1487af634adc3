"""
Shared helpers for subcommands: result payloads, flag checks and the run manifest.
"""

import json
import os
import platform
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from .. import __version__
from ..atomic import atomic_write_text
from ..errors import BridgeflowError, InputError

RESULT_VERSION = "1.0"
THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)
_VERSIONED_PACKAGES = ("numpy", "scipy", "networkx", "pydantic", "pydantic-settings")


def configure_threads(threads: int) -> None:
    """Must run before numpy is first imported to take effect."""
    for name in THREAD_ENV_VARS:
        os.environ[name] = str(threads)


def build_success_result(result: Dict[str, Any]) -> Dict[str, Any]:
    return {"version": RESULT_VERSION, "ok": True, "result": result, "error": None}


def build_error_result(code: str, message: str, details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "version": RESULT_VERSION,
        "ok": False,
        "result": None,
        "error": {"code": code, "message": message, "details": details or {}},
    }


def error_result_from(error: BridgeflowError) -> Dict[str, Any]:
    payload = error.to_dict()
    return build_error_result(payload["code"], payload["message"], payload["details"])


def emit(payload: Dict[str, Any]) -> None:
    """Write one JSON document to stdout."""
    sys.stdout.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
    sys.stdout.flush()


def require_flag(value: Any, flag: str, reason: str) -> Any:
    if value is None:
        raise InputError(f"{flag} is required {reason}", {"flag": flag})
    return value


def existing_file(path: Optional[str], flag: str) -> Path:
    if path is None:
        raise InputError(f"{flag} is required", {"flag": flag})
    candidate = Path(path)
    if not candidate.is_file():
        raise InputError(f"{flag}: file not found: {path}", {"flag": flag, "file": str(path)})
    return candidate


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n")


def package_versions() -> Dict[str, str]:
    versions = {"bridgeflow": __version__, "python": platform.python_version()}
    for name in _VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunManifest(BaseModel):
    """
    Provenance record for one training run.

    Written before training starts and rewritten when the run ends. Only the
    manifest carries timestamps.
    """

    config: Dict[str, Any]
    config_hash: str
    seed: int
    versions: Dict[str, str] = Field(default_factory=package_versions)
    started_at: str = Field(default_factory=utc_now)
    finished_at: Optional[str] = None
    status: str = "running"
    converged: Optional[bool] = None
    stopped_reason: Optional[str] = None
    artifacts: Dict[str, str] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        return write_json(out_dir / "manifest.json", self.model_dump(mode="json"))

    def finalize(self, out_dir: Path, status: str, converged: Optional[bool], stopped_reason: Optional[str]) -> Path:
        self.finished_at = utc_now()
        self.status = status
        self.converged = converged
        self.stopped_reason = stopped_reason
        return self.write(out_dir)


__all__ = [
    "RESULT_VERSION",
    "configure_threads",
    "build_success_result",
    "build_error_result",
    "error_result_from",
    "emit",
    "require_flag",
    "existing_file",
    "write_json",
    "package_versions",
    "RunManifest",
]
