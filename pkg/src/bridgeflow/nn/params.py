"""
Named parameter storage and the Adam optimizer.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from ..errors import ShapeError, TrainingError


@dataclass
class ParamStore:
    """Named float64 tensors with per-parameter Adam moments and a step counter."""

    params: Dict[str, np.ndarray]
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    def __post_init__(self):
        self.params = {name: np.asarray(value, dtype=np.float64) for name, value in self.params.items()}
        for name, value in self.params.items():
            self.m.setdefault(name, np.zeros_like(value))
            self.v.setdefault(name, np.zeros_like(value))
            if self.m[name].shape != value.shape or self.v[name].shape != value.shape:
                raise ShapeError(f"Adam moments for {name} do not match parameter shape {value.shape}")
        if self.step < 0:
            raise ValueError("step must be >= 0")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(sorted(self.params))

    def num_parameters(self) -> int:
        return int(sum(value.size for value in self.params.values()))

    def copy(self) -> "ParamStore":
        return ParamStore(
            params={k: v.copy() for k, v in self.params.items()},
            m={k: v.copy() for k, v in self.m.items()},
            v={k: v.copy() for k, v in self.v.items()},
            step=self.step,
        )

    def merge(self, other: "ParamStore") -> "ParamStore":
        overlap = set(self.params) & set(other.params)
        if overlap:
            raise ValueError(f"parameter name collision: {sorted(overlap)[:5]}")
        return ParamStore(
            params={**self.params, **other.params},
            m={**self.m, **other.m},
            v={**self.v, **other.v},
            step=max(self.step, other.step),
        )

    def subset(self, prefix: str) -> Dict[str, np.ndarray]:
        return {k: v for k, v in self.params.items() if k.startswith(prefix)}


def adam_step(
    store: ParamStore,
    grads: Mapping[str, np.ndarray],
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> ParamStore:
    """
    One Adam update with bias correction, applied in place.

    Parameters without an entry in ``grads`` see a zero gradient.

    Raises:
        ShapeError: If a gradient does not match its parameter
        TrainingError: If a gradient is non-finite (the parameter is named)
    """
    unknown = set(grads) - set(store.params)
    if unknown:
        raise ShapeError(f"gradients for unknown parameters: {sorted(unknown)[:5]}")
    for name, grad in grads.items():
        if np.shape(grad) != store.params[name].shape:
            raise ShapeError(
                f"gradient for {name} has shape {np.shape(grad)}, expected {store.params[name].shape}",
                {"parameter": name},
            )
        if not np.all(np.isfinite(grad)):
            raise TrainingError(f"non-finite gradient for parameter {name}", {"parameter": name})

    beta1, beta2 = betas
    store.step += 1
    correction1 = 1.0 - beta1 ** store.step
    correction2 = 1.0 - beta2 ** store.step
    for name in store.names:
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(store.params[name])
        store.m[name] = beta1 * store.m[name] + (1.0 - beta1) * grad
        store.v[name] = beta2 * store.v[name] + (1.0 - beta2) * (grad * grad)
        m_hat = store.m[name] / correction1
        v_hat = store.v[name] / correction2
        store.params[name] = store.params[name] - lr * m_hat / (np.sqrt(v_hat) + eps)
    return store


def global_grad_norm(grads: Iterable[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


__all__ = ["ParamStore", "adam_step", "global_grad_norm"]
