"""
Configuration management for bridgeflow.

Process-level settings come from environment variables and ``.env`` through
Pydantic BaseSettings. Experiment settings are plain Pydantic models loaded
from a JSON file; their canonical JSON dump is hashed into ``config_hash`` so
every artifact can be traced back to the exact configuration that made it.
"""

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class BridgeflowSettings(BaseSettings):
    """
    Process-level settings.

    Only things that shape *how* a run executes live here; anything that
    changes results belongs to ExperimentConfig so that it is hashed.
    """

    # ========== Data Configuration ==========
    data_dir: str = Field(
        default="./data",
        description="Default root for relative dataset paths",
        validation_alias=AliasChoices('BRIDGEFLOW_DATA_DIR', 'data_dir')
    )

    # ========== Execution Configuration ==========
    threads: int = Field(
        default=1,
        description="Internal BLAS parallelism; results do not depend on it",
        validation_alias=AliasChoices('BRIDGEFLOW_THREADS', 'threads')
    )

    # ========== Logging Configuration ==========
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
        validation_alias=AliasChoices('BRIDGEFLOW_LOG_LEVEL', 'log_level')
    )

    debug: bool = Field(
        default=False,
        description="Enable debug messages and solver self-checks",
        validation_alias=AliasChoices('BRIDGEFLOW_DEBUG', 'debug')
    )

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    @field_validator("log_level")
    @classmethod
    def _normalize_log_level(cls, value: str) -> str:
        return (value or "INFO").strip().upper()

    def effective_log_level(self) -> str:
        return "DEBUG" if self.debug else self.log_level

    def resolve_data_path(self, path: str) -> Path:
        """Resolve a dataset path, treating relative paths as relative to data_dir when they do not exist."""
        candidate = Path(path)
        if candidate.is_absolute() or candidate.exists():
            return candidate
        return Path(self.data_dir) / candidate

    def validate_settings(self) -> None:
        """
        Raises:
            ValueError: If a setting is out of range
        """
        if self.log_level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Invalid BRIDGEFLOW_LOG_LEVEL: {self.log_level}")
        if self.threads < 1:
            raise ValueError(f"BRIDGEFLOW_THREADS must be >= 1, got {self.threads}")

    def __str__(self) -> str:
        return (
            f"BridgeflowSettings(data_dir={self.data_dir}, threads={self.threads}, "
            f"log_level={self.effective_log_level()})"
        )


def load_settings() -> BridgeflowSettings:
    settings = BridgeflowSettings()
    settings.validate_settings()
    return settings


# ========== Experiment Configuration ==========

class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OTConfig(_StrictModel):
    """Entropic OT solver parameters; tau = lambda / (lambda + epsilon)."""

    epsilon: float = Field(default=5e-3, gt=0, description="Entropy regularization on mean-normalized costs")
    tau_x: float = Field(default=1.0, gt=0, le=1, description="Source unbalancedness; 1 = strict marginal")
    tau_y: float = Field(default=1.0, gt=0, le=1, description="Target unbalancedness; 1 = strict marginal")
    alpha: float = Field(default=0.5, ge=0, le=1, description="FGW trade-off between quadratic and linear terms")
    max_iters: int = Field(default=2000, ge=1, description="Sinkhorn sweeps per solve")
    max_outer_iters: int = Field(default=50, ge=1, description="GW/FGW linearization steps")
    tolerance: float = Field(default=1e-6, gt=0, description="Marginal-violation stopping threshold")

    def is_balanced(self) -> bool:
        return self.tau_x == 1.0 and self.tau_y == 1.0


class TrainConfig(_StrictModel):
    batch_size: int = Field(default=256, ge=2)
    lr: float = Field(default=1e-4, ge=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(default=1e-8, gt=0)
    T_iter: int = Field(default=10000, ge=0)
    sigma_min: float = Field(default=0.0, ge=0, le=1)
    unbalanced: bool = False
    seed: int = Field(default=0, description="Training stream seed; follows ExperimentConfig.seed unless set")
    eval_every: int = Field(default=500, ge=1)
    early_stop_patience: Optional[int] = Field(default=None, ge=1)
    max_hours: Optional[float] = Field(default=None, gt=0)
    ode_steps: int = Field(default=100, ge=1)


class AlignmentConfig(_StrictModel):
    """Serialized AlignmentPlan recipe."""

    strategy: Literal["true", "global", "local"] = "global"
    solver: Literal["linear", "gw", "fgw"] = "linear"
    cost_kind: Literal["bridge", "knn", "kcca"] = "bridge"
    intra_metric: Literal["cosine", "sq_euclidean", "one_minus_pearson"] = "cosine"
    batch_size: int = Field(default=256, ge=2)
    anchor_scope: Literal["global", "batch"] = "global"
    knn_k: int = Field(default=10, ge=1)
    knn_cross_weight: float = Field(default=0.0, ge=0)
    kcca_bandwidth: Optional[float] = Field(default=None, gt=0)
    kcca_regularization: float = Field(default=1e-3, gt=0)
    kcca_components: Optional[int] = Field(default=None, ge=1)
    ot: OTConfig = Field(default_factory=OTConfig)


class SyntheticSpec(_StrictModel):
    kind: Literal["swiss_roll_3d", "spiral_2d", "paired_gaussian_clusters"]
    n: int = Field(default=1000, ge=1)
    classes: int = Field(default=10, ge=1)
    noise_scale: float = Field(default=0.1, ge=0)
    separation: float = Field(default=1.0, ge=0)
    source_dim: int = Field(default=16, ge=2)
    target_dim: int = Field(default=8, ge=2)
    latent_dim: Optional[int] = Field(default=None, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_sizes(self) -> "SyntheticSpec":
        if self.kind == "paired_gaussian_clusters" and self.n < self.classes:
            raise ValueError(f"n ({self.n}) must be >= classes ({self.classes})")
        if self.kind != "paired_gaussian_clusters" and self.n < 10:
            raise ValueError(f"{self.kind} needs n >= 10, got {self.n}")
        return self


class DatasetRefs(_StrictModel):
    """File-based dataset: source/target features, optional ground-truth pairs."""

    x_path: str
    y_path: str
    truth_path: Optional[str] = None
    pairs_path: Optional[str] = None


class ExperimentConfig(_StrictModel):
    synthetic: Optional[SyntheticSpec] = None
    target_synthetic: Optional[SyntheticSpec] = None
    dataset: Optional[DatasetRefs] = None
    alignment: AlignmentConfig = Field(default_factory=AlignmentConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    arch: Literal[
        "mlp_small", "mlp_medium", "mlp_large", "adaln_small", "adaln_medium", "adaln_large"
    ] = "adaln_small"
    hidden: Optional[int] = Field(default=None, ge=1, description="Override the preset hidden width")
    layers: Optional[int] = Field(default=None, ge=1, description="Override the preset depth")
    paired_ratio: float = Field(default=1.0, gt=0, le=1)
    seed: int = 0

    @model_validator(mode="after")
    def _train_seed_follows_seed(self) -> "ExperimentConfig":
        if "seed" not in self.train.model_fields_set:
            self.train = self.train.model_copy(update={"seed": self.seed})
        return self

    @model_validator(mode="after")
    def _check_dataset(self) -> "ExperimentConfig":
        if (self.synthetic is None) == (self.dataset is None):
            raise ValueError("exactly one of 'synthetic' or 'dataset' must be set")
        if self.synthetic is not None and self.synthetic.kind != "paired_gaussian_clusters":
            if self.target_synthetic is None:
                raise ValueError(
                    f"synthetic kind {self.synthetic.kind!r} is single-space; set 'target_synthetic' too"
                )
        return self

    def referenced_files(self) -> List[str]:
        if self.dataset is None:
            return []
        refs = [self.dataset.x_path, self.dataset.y_path]
        refs += [p for p in (self.dataset.truth_path, self.dataset.pairs_path) if p]
        return refs


def canonical_json(config: BaseModel) -> str:
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def config_hash(config: BaseModel) -> str:
    """SHA-256 of the canonical JSON dump."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def load_experiment_config(path: str) -> ExperimentConfig:
    """
    Load an experiment config JSON file.

    Raises:
        FileNotFoundError: If the file does not exist
        pydantic.ValidationError: If the content does not match the schema
    """
    text = Path(path).read_text(encoding="utf-8")
    return ExperimentConfig.model_validate_json(text)


__all__ = [
    "BridgeflowSettings",
    "load_settings",
    "OTConfig",
    "TrainConfig",
    "AlignmentConfig",
    "SyntheticSpec",
    "DatasetRefs",
    "ExperimentConfig",
    "canonical_json",
    "config_hash",
    "load_experiment_config",
]
