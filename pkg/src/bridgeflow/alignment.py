"""
Training couplings for the three alignment strategies.

- ``true``: mass 1/l on each labelled pair.
- ``global``: one OT solve over the whole dataset on the mean-normalized fused cost.
- ``local``: a fresh OT solve on a uniformly drawn minibatch at every training step.

Also holds the solver tuning sweeps (FGW alpha, unbalancedness tau) and the
global-vs-local runtime benchmark.
"""

import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import AlignmentConfig, OTConfig
from .costs import CostManager, intra_cost, normalize_by_mean
from .errors import InputError
from .log import debug_print
from .metrics import aes_ratio, excluded_ratio
from .solvers import SolverManager, expected_matching_accuracy
from .types import CostMatrix, Coupling, FeatureMatrix, PairedSet, SolverReport

STRATEGIES = ("true", "global", "local")
ALIGNMENT_SOLVERS = ("linear", "gw", "fgw")
DEFAULT_ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def true_coupling(P: PairedSet, n: int, m: int) -> Coupling:
    """
    Raises:
        InputError: If P is empty
    """
    if len(P) == 0:
        raise InputError("true alignment needs at least one paired point", {"pairs": 0})
    P.validate(n, m)
    l = len(P)
    values = np.zeros((n, m))
    values[P.sources, P.targets] = 1.0 / l
    a = np.zeros(n)
    b = np.zeros(m)
    a[P.sources] = 1.0 / l
    b[P.targets] = 1.0 / l
    report = SolverReport(solver="true", marginal_violation=0.0, converged=True)
    return Coupling(values=values, source_marginal=a, target_marginal=b, report=report)


def _with_kind(config: Optional[AlignmentConfig], cost_kind: str) -> AlignmentConfig:
    base = config or AlignmentConfig()
    return base.model_copy(update={"cost_kind": cost_kind})


def _check_solver(solver: str) -> None:
    if solver not in ALIGNMENT_SOLVERS:
        raise InputError(f"Unknown alignment solver {solver!r}. Supported: {list(ALIGNMENT_SOLVERS)}")


def _intra_costs(X: FeatureMatrix, Y: FeatureMatrix, metric: str) -> Tuple[CostMatrix, CostMatrix]:
    return normalize_by_mean(intra_cost(X, metric)), normalize_by_mean(intra_cost(Y, metric))


def _solve(
    solver: str,
    cfg: OTConfig,
    C_XY: Optional[CostMatrix],
    X: FeatureMatrix,
    Y: FeatureMatrix,
    metric: str,
) -> Coupling:
    manager = SolverManager(cfg)
    if solver == "linear":
        return manager.solve("linear", C_XY=C_XY)
    C_XX, C_YY = _intra_costs(X, Y, metric)
    if solver == "gw":
        return manager.solve("gw", C_XX=C_XX, C_YY=C_YY)
    return manager.solve("fgw", C_XY=C_XY, C_XX=C_XX, C_YY=C_YY)


def global_align(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    cost_kind: str,
    cfg: OTConfig,
    solver: str = "linear",
    config: Optional[AlignmentConfig] = None,
) -> Coupling:
    """
    One OT solve over the whole dataset.

    The fused cost (bridge, knn or kcca) is built from P and mean-normalized;
    the ``gw`` solver ignores P and aligns the intra-space costs only.
    """
    _check_solver(solver)
    config = _with_kind(config, cost_kind)
    C_XY = None
    if solver != "gw":
        builder = CostManager(config).get_builder(cost_kind)
        C_XY = normalize_by_mean(builder.build(X, Y, P))
    return _solve(solver, cfg, C_XY, X, Y, config.intra_metric)


def local_batch_coupling(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    source_index: np.ndarray,
    target_index: np.ndarray,
    cost_kind: str,
    cfg: OTConfig,
    solver: str = "linear",
    anchor_scope: str = "global",
    config: Optional[AlignmentConfig] = None,
) -> Coupling:
    """
    Coupling between the batch rows ``X[source_index]`` and ``Y[target_index]``.

    With ``anchor_scope="global"`` every anchor of P stays usable for the fused
    cost and only the OT problem is restricted to the batch. With ``"batch"``
    only pairs with both ends in the batch are used; when none remain the solve
    falls back to GW on the intra-space costs and the report records it.
    """
    _check_solver(solver)
    config = _with_kind(config, cost_kind)
    source_index = np.asarray(source_index, dtype=np.int64)
    target_index = np.asarray(target_index, dtype=np.int64)
    X_batch = X.subset(source_index)
    Y_batch = Y.subset(target_index)
    if solver == "gw":
        return _solve("gw", cfg, None, X_batch, Y_batch, config.intra_metric)

    builder = CostManager(config).get_builder(cost_kind)
    if anchor_scope == "global":
        C_XY = builder.build_for_batch(X, Y, P, source_index, target_index)
    elif anchor_scope == "batch":
        local_pairs = P.restricted_to(source_index, target_index)
        minimum = 2 if cost_kind == "kcca" else 1
        if len(local_pairs) < minimum:
            debug_print(
                f"[WARNING] batch holds {len(local_pairs)} paired point(s); "
                f"falling back to GW on intra-space costs"
            )
            coupling = _solve("gw", cfg.model_copy(update={"tau_x": 1.0, "tau_y": 1.0}),
                              None, X_batch, Y_batch, config.intra_metric)
            coupling.report.warnings.append(
                f"no usable paired points in batch for {cost_kind} cost; used gw fallback"
            )
            coupling.report.extra["fallback"] = "gw"
            return coupling
        C_XY = builder.build(X_batch, Y_batch, local_pairs)
    else:
        raise InputError(f"anchor_scope must be 'global' or 'batch', got {anchor_scope!r}")
    return _solve(solver, cfg, normalize_by_mean(C_XY), X_batch, Y_batch, config.intra_metric)


def sample_batch_indices(rng: np.random.Generator, n: int, m: int, batch_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Independent uniform draws without replacement on each side."""
    source_index = rng.choice(n, size=min(batch_size, n), replace=False)
    target_index = rng.choice(m, size=min(batch_size, m), replace=False)
    return source_index.astype(np.int64), target_index.astype(np.int64)


@dataclass
class AlignmentPlan:
    """
    The coupling recipe consumed by the training loop.

    ``true`` and ``global`` plans carry a fixed coupling; ``local`` plans carry
    the data and recompute a batch coupling on every call.
    """

    strategy: str
    paired_set: PairedSet
    config: AlignmentConfig
    X: FeatureMatrix
    Y: FeatureMatrix
    coupling: Optional[Coupling] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InputError(f"Unknown alignment strategy {self.strategy!r}. Supported: {list(STRATEGIES)}")
        if self.strategy == "true" and len(self.paired_set) == 0:
            raise InputError("true alignment needs at least one paired point", {"pairs": 0})
        if self.strategy == "local" and self.config.batch_size < 2:
            raise InputError(f"local batch size must be >= 2, got {self.config.batch_size}")
        if self.strategy != "local" and self.coupling is None:
            raise InputError(f"{self.strategy} plan needs a precomputed coupling")

    @classmethod
    def build(cls, X: FeatureMatrix, Y: FeatureMatrix, P: PairedSet, config: AlignmentConfig) -> "AlignmentPlan":
        coupling = None
        if config.strategy == "true":
            coupling = true_coupling(P, X.n, Y.n)
        elif config.strategy == "global":
            coupling = global_align(X, Y, P, config.cost_kind, config.ot, config.solver, config)
        debug_print(
            f"[INFO] alignment plan: strategy={config.strategy}, solver={config.solver}, "
            f"cost={config.cost_kind}, pairs={len(P)}"
        )
        return cls(strategy=config.strategy, paired_set=P, config=config, X=X, Y=Y, coupling=coupling)

    def coupling_for_iteration(self, rng: np.random.Generator) -> Tuple[Coupling, np.ndarray, np.ndarray]:
        """
        Returns:
            (coupling, source index map, target index map); coupling row r is
            dataset row ``source_map[r]``, column c is ``target_map[c]``
        """
        if self.strategy != "local":
            return self.coupling, np.arange(self.X.n), np.arange(self.Y.n)
        source_index, target_index = sample_batch_indices(rng, self.X.n, self.Y.n, self.config.batch_size)
        coupling = local_batch_coupling(
            self.X,
            self.Y,
            self.paired_set,
            source_index,
            target_index,
            self.config.cost_kind,
            self.config.ot,
            self.config.solver,
            self.config.anchor_scope,
            self.config,
        )
        return coupling, source_index, target_index


# ========== Tuning sweeps ==========

@dataclass
class AlphaSweep:
    alphas: List[float]
    accuracies: List[float]
    best_alpha: float

    def to_dict(self) -> Dict[str, object]:
        return {"alphas": self.alphas, "accuracies": self.accuracies, "best_alpha": self.best_alpha}


def tune_alpha(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    truth: PairedSet,
    cost_kind: str,
    alphas: Sequence[float] = DEFAULT_ALPHA_GRID,
    cfg: Optional[OTConfig] = None,
    config: Optional[AlignmentConfig] = None,
) -> AlphaSweep:
    """
    FGW matching accuracy for every alpha in the grid; ties go to the lowest alpha.

    alpha = 0 is the linear solver on the squared fused cost.
    """
    if not alphas:
        raise InputError("alpha grid is empty")
    cfg = cfg or OTConfig()
    config = _with_kind(config, cost_kind)
    builder = CostManager(config).get_builder(cost_kind)
    C_XY = normalize_by_mean(builder.build(X, Y, P))
    C_XX, C_YY = _intra_costs(X, Y, config.intra_metric)
    accuracies: List[float] = []
    for alpha in alphas:
        manager = SolverManager(cfg.model_copy(update={"alpha": float(alpha)}))
        coupling = manager.solve("fgw", C_XY=C_XY, C_XX=C_XX, C_YY=C_YY)
        accuracy = expected_matching_accuracy(coupling, truth)
        debug_print(f"[INFO] alpha={alpha}: matching accuracy {accuracy:.4f}")
        accuracies.append(accuracy)
    best = int(np.argmax(accuracies))
    return AlphaSweep(alphas=[float(a) for a in alphas], accuracies=accuracies, best_alpha=float(alphas[best]))


@dataclass
class TauSweep:
    entries: List[Dict[str, float]] = field(default_factory=list)
    best: Optional[Dict[str, float]] = None

    def to_dict(self) -> Dict[str, object]:
        return {"entries": self.entries, "best": self.best}


def tune_unbalancedness(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    truth: PairedSet,
    cost_kind: str,
    taus: Sequence[float] = (1.0, 0.99, 0.95, 0.9),
    cfg: Optional[OTConfig] = None,
    sample_count: int = 10000,
    seed: int = 0,
    config: Optional[AlignmentConfig] = None,
) -> TauSweep:
    """
    Unbalanced linear OT over every (tau_x, tau_y) in ``taus x taus``, scored by
    matching accuracy over excluded ratio (aes). The best entry maximizes aes.
    """
    if not taus:
        raise InputError("tau grid is empty")
    cfg = cfg or OTConfig()
    config = _with_kind(config, cost_kind)
    builder = CostManager(config).get_builder(cost_kind)
    C_XY = normalize_by_mean(builder.build(X, Y, P))
    sweep = TauSweep()
    for tau_x, tau_y in itertools.product(taus, taus):
        manager = SolverManager(cfg.model_copy(update={"tau_x": float(tau_x), "tau_y": float(tau_y)}))
        coupling = manager.solve("linear", C_XY=C_XY)
        accuracy = expected_matching_accuracy(coupling, truth)
        excluded = excluded_ratio(coupling, sample_count, seed).value
        entry = {
            "tau_x": float(tau_x),
            "tau_y": float(tau_y),
            "matching_accuracy": accuracy,
            "excluded_ratio": excluded,
            "aes": aes_ratio(accuracy, excluded),
        }
        debug_print(f"[INFO] tau=({tau_x}, {tau_y}): {entry}")
        sweep.entries.append(entry)
        if sweep.best is None or entry["aes"] > sweep.best["aes"]:
            sweep.best = entry
    return sweep


@dataclass
class AlignmentBenchmark:
    global_seconds: float
    global_per_iteration: float
    local_per_iteration: float
    iterations: int

    def to_dict(self) -> Dict[str, float]:
        return {
            "global_seconds": self.global_seconds,
            "global_per_iteration": self.global_per_iteration,
            "local_per_iteration": self.local_per_iteration,
            "iterations": self.iterations,
        }


def benchmark_alignment(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    cost_kind: str,
    cfg: OTConfig,
    solver: str = "linear",
    batch_size: int = 256,
    iterations: int = 10,
    seed: int = 0,
    config: Optional[AlignmentConfig] = None,
) -> AlignmentBenchmark:
    """
    Wall time of one global solve amortized over ``iterations`` training steps
    against the mean time of a local batch coupling.
    """
    if iterations < 1:
        raise InputError(f"iterations must be >= 1, got {iterations}")
    start = time.perf_counter()
    global_align(X, Y, P, cost_kind, cfg, solver, config)
    global_seconds = time.perf_counter() - start

    rng = np.random.default_rng(seed)
    local_total = 0.0
    for _ in range(iterations):
        source_index, target_index = sample_batch_indices(rng, X.n, Y.n, batch_size)
        start = time.perf_counter()
        local_batch_coupling(X, Y, P, source_index, target_index, cost_kind, cfg, solver, config=config)
        local_total += time.perf_counter() - start
    result = AlignmentBenchmark(
        global_seconds=global_seconds,
        global_per_iteration=global_seconds / iterations,
        local_per_iteration=local_total / iterations,
        iterations=iterations,
    )
    debug_print(f"[INFO] alignment benchmark: {result.to_dict()}")
    return result


__all__ = [
    "STRATEGIES",
    "DEFAULT_ALPHA_GRID",
    "true_coupling",
    "global_align",
    "local_batch_coupling",
    "sample_batch_indices",
    "AlignmentPlan",
    "AlphaSweep",
    "tune_alpha",
    "TauSweep",
    "tune_unbalancedness",
    "AlignmentBenchmark",
    "benchmark_alignment",
]
