"""
Training loop for the conditional velocity field.

Each iteration: get a coupling from the alignment plan (fixed for true/global,
fresh minibatch solve for local), draw b index pairs from it, draw noise and
times, and take one Adam step on the flow-matching loss. All randomness comes
from one generator seeded with ``TrainConfig.seed``.
"""

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ..alignment import AlignmentPlan
from ..config import TrainConfig
from ..errors import InputError, ShapeError
from ..log import debug_print
from ..nn import adam_step
from ..solvers import sample_pairs
from .architectures import ReweightingNets, VelocityField
from .loss import genot_loss

Validation = Callable[[VelocityField], float]

HISTORY_COLUMNS = ("iteration", "loss", "flow_loss", "reweight_loss", "val")


@dataclass
class HistoryRow:
    iteration: int
    loss: float
    flow_loss: float
    reweight_loss: float
    val: Optional[float] = None


@dataclass
class TrainingHistory:
    rows: List[HistoryRow] = field(default_factory=list)

    def losses(self) -> List[float]:
        return [row.loss for row in self.rows]

    def validation(self) -> List[tuple]:
        return [(row.iteration, row.val) for row in self.rows if row.val is not None]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(HISTORY_COLUMNS)
        for row in self.rows:
            writer.writerow([
                row.iteration,
                repr(row.loss),
                repr(row.flow_loss),
                repr(row.reweight_loss),
                "" if row.val is None else repr(row.val),
            ])
        return buffer.getvalue()


@dataclass
class TrainResult:
    vf: VelocityField
    rw: Optional[ReweightingNets]
    history: TrainingHistory
    iterations: int
    converged: bool
    stopped_reason: str
    best_val: Optional[float] = None


def reweighting_targets(coupling, rows: np.ndarray, cols: np.ndarray):
    """N * pi_X(i) and M * pi_Y(j), so uniform balanced couplings give 1."""
    n, m = coupling.shape
    return n * coupling.row_sums[rows], m * coupling.col_sums[cols]


def train(
    plan: AlignmentPlan,
    vf: VelocityField,
    cfg: TrainConfig,
    rw: Optional[ReweightingNets] = None,
    validation: Optional[Validation] = None,
) -> TrainResult:
    """
    Run ``cfg.T_iter`` iterations (or fewer when the wall-clock budget or
    early stopping ends the run; the parameters are left in a usable state).

    Raises:
        ShapeError: Plan data does not match the field's dimensions
        InputError: Unbalanced training without reweighting networks
        TrainingError: Non-finite loss or gradient
    """
    if plan.X.dim != vf.source_dim or plan.Y.dim != vf.target_dim:
        raise ShapeError(
            f"plan data is {plan.X.dim}->{plan.Y.dim} but the field expects {vf.source_dim}->{vf.target_dim}"
        )
    if cfg.unbalanced and rw is None:
        raise InputError("unbalanced training needs reweighting networks")

    rng = np.random.default_rng(cfg.seed)
    history = TrainingHistory()
    start = time.monotonic()
    budget = None if cfg.max_hours is None else cfg.max_hours * 3600.0
    best_val: Optional[float] = None
    stale = 0
    stopped_reason = "completed"
    converged = True
    iteration = 0

    for iteration in range(1, cfg.T_iter + 1):
        coupling, source_map, target_map = plan.coupling_for_iteration(rng)
        drawn = sample_pairs(coupling, cfg.batch_size, rng)
        x = plan.X.points[source_map[drawn[:, 0]]]
        y = plan.Y.points[target_map[drawn[:, 1]]]
        z = rng.standard_normal(y.shape)
        t = rng.random(y.shape[0])

        w_x = w_y = None
        if cfg.unbalanced:
            w_x, w_y = reweighting_targets(coupling, drawn[:, 0], drawn[:, 1])
        result = genot_loss(
            vf, x, y, z, t,
            rw=rw if cfg.unbalanced else None,
            w_x=w_x,
            w_y=w_y,
            sigma_min=cfg.sigma_min,
            iteration=iteration,
        )
        adam_step(vf.store, result.grads, cfg.lr, cfg.betas, cfg.adam_eps)
        if cfg.unbalanced:
            adam_step(rw.store, result.reweight_grads, cfg.lr, cfg.betas, cfg.adam_eps)

        row = HistoryRow(iteration, result.loss, result.flow_loss, result.reweight_loss)
        if iteration % cfg.eval_every == 0 or iteration == cfg.T_iter:
            if validation is not None:
                row.val = float(validation(vf))
            debug_print(
                f"[INFO] iteration {iteration}/{cfg.T_iter}: loss={result.loss:.6f}"
                + ("" if row.val is None else f", val={row.val:.4f}")
            )
            if row.val is not None:
                if best_val is None or row.val > best_val:
                    best_val, stale = row.val, 0
                else:
                    stale += 1
        history.rows.append(row)

        if cfg.early_stop_patience is not None and stale >= cfg.early_stop_patience:
            stopped_reason = "early_stop"
            debug_print(f"[INFO] early stop at iteration {iteration}: no improvement for {stale} evaluations")
            break
        if budget is not None and time.monotonic() - start > budget:
            stopped_reason = "time_budget"
            converged = False
            debug_print(f"[WARNING] wall-clock budget of {cfg.max_hours} h reached at iteration {iteration}")
            break

    return TrainResult(
        vf=vf,
        rw=rw,
        history=history,
        iterations=iteration,
        converged=converged,
        stopped_reason=stopped_reason,
        best_val=best_val,
    )


__all__ = [
    "HISTORY_COLUMNS",
    "HistoryRow",
    "TrainingHistory",
    "TrainResult",
    "reweighting_targets",
    "train",
]
