"""
Velocity-field checkpoints on top of the BFCK tensor format.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from ..errors import ValidationError
from ..log import debug_print
from ..nn import ParamStore
from ..nn.checkpoint import load_param_store, save_param_store
from .architectures import ReweightingNets, VelocityField

_FIELD_KEY = "velocity_field"
_REWEIGHT_KEY = "reweighting"


def _split_store(store: ParamStore, names) -> ParamStore:
    names = set(names)
    return ParamStore(
        params={k: v for k, v in store.params.items() if k in names},
        m={k: v for k, v in store.m.items() if k in names},
        v={k: v for k, v in store.v.items() if k in names},
        step=store.step,
    )


def save_checkpoint(
    path: Union[str, Path],
    vf: VelocityField,
    rw: Optional[ReweightingNets] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write parameters, Adam state and the architecture description atomically."""
    store = vf.store if rw is None else vf.store.merge(rw.store)
    meta = dict(metadata or {})
    meta[_FIELD_KEY] = {
        "arch": vf.arch,
        "source_dim": vf.source_dim,
        "target_dim": vf.target_dim,
        "hidden": vf.hidden,
        "layers": vf.layers,
    }
    meta[_REWEIGHT_KEY] = None if rw is None else {"hidden": rw.hidden, "step": rw.store.step}
    written = save_param_store(path, store, meta)
    debug_print(f"[INFO] checkpoint written to {written}")
    return written


def load_checkpoint(path: Union[str, Path]) -> Tuple[VelocityField, Optional[ReweightingNets], Dict[str, Any]]:
    """
    Raises:
        ParseError: Malformed file
        ValidationError: Missing architecture description
    """
    store, metadata = load_param_store(path)
    description = metadata.pop(_FIELD_KEY, None)
    if not isinstance(description, dict):
        raise ValidationError(f"{path}: checkpoint has no velocity-field description", {"file": str(path)})
    reweighting = metadata.pop(_REWEIGHT_KEY, None)

    rw = None
    field_names = [k for k in store.params if not k.startswith(("eta.", "xi."))]
    if reweighting is not None:
        rw_store = _split_store(store, [k for k in store.params if k.startswith(("eta.", "xi."))])
        rw_store.step = int(reweighting.get("step", store.step))
        rw = ReweightingNets(
            source_dim=int(description["source_dim"]),
            target_dim=int(description["target_dim"]),
            hidden=int(reweighting["hidden"]),
            store=rw_store,
        )
    vf = VelocityField(
        arch=description["arch"],
        source_dim=int(description["source_dim"]),
        target_dim=int(description["target_dim"]),
        hidden=int(description["hidden"]),
        layers=int(description["layers"]),
        store=_split_store(store, field_names),
    )
    return vf, rw, metadata


__all__ = ["save_checkpoint", "load_checkpoint"]
