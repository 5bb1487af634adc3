"""
``bridgeflow ot``: solve an entropic coupling from cost files and print the solver report.
"""

from pathlib import Path
from typing import Any, Dict, Optional

from ..config import OTConfig
from ..costs import normalize_by_mean
from ..data_io import load_cost, save_coupling
from ..errors import InputError
from ..solvers import SolverManager
from ..types import CostMatrix
from .common import existing_file


def ot_config_from_args(args) -> OTConfig:
    return OTConfig(
        epsilon=args.epsilon,
        tau_x=args.tau_x,
        tau_y=args.tau_y,
        alpha=args.alpha,
        max_iters=args.max_iters,
        max_outer_iters=args.max_outer_iters,
        tolerance=args.tolerance,
    )


def _load(path: Optional[str], flag: str, normalize: bool) -> Optional[CostMatrix]:
    if path is None:
        return None
    cost = load_cost(existing_file(path, flag))
    return normalize_by_mean(cost) if normalize else cost


def inter_cost_for(solver: str, C_XY: CostMatrix, power: float) -> CostMatrix:
    """
    Raise the inter-space cost to ``power`` for the linear and fgw solvers.

    fgw squares its inter cost internally, so it receives C**(power/2) and
    linear receives the square of that same matrix: both solve on bit-identical
    values, and ``fgw --alpha 0`` writes the same coupling as ``linear``.
    """
    if power <= 0:
        raise InputError(f"--cost-power must be > 0, got {power}", {"flag": "--cost-power"})
    base = C_XY.values if power == 2.0 else C_XY.values ** (power / 2.0)
    values = base ** 2 if solver == "linear" else base
    return CostMatrix(values=values, kind=C_XY.kind, normalized=C_XY.normalized)


def run(args, settings) -> Dict[str, Any]:
    normalize = not args.no_normalize
    C_XY = _load(args.cost, "--cost", normalize)
    C_XX = _load(args.cxx, "--cxx", normalize)
    C_YY = _load(args.cyy, "--cyy", normalize)

    if args.solver in ("linear", "fgw") and C_XY is None:
        raise InputError(f"--cost is required for the {args.solver} solver", {"flag": "--cost"})
    if args.solver in ("gw", "fgw"):
        for value, flag in ((C_XX, "--cxx"), (C_YY, "--cyy")):
            if value is None:
                raise InputError(f"{flag} is required for the {args.solver} solver", {"flag": flag})
    if C_XY is not None and args.solver != "gw":
        C_XY = inter_cost_for(args.solver, C_XY, args.cost_power)

    coupling = SolverManager(ot_config_from_args(args)).solve(args.solver, C_XY=C_XY, C_XX=C_XX, C_YY=C_YY)
    if C_XY is not None and args.solver != "gw":
        coupling.report.extra["cost_power"] = args.cost_power
    written = save_coupling(Path(args.out), coupling)
    return {
        "coupling": str(written),
        "shape": list(coupling.shape),
        "total_mass": coupling.total_mass,
        "report": coupling.report.to_dict(),
    }
