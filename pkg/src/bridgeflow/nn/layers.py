"""
Layer sequences with exact reverse-mode gradients.

A network is a tuple of ``LayerSpec``. Besides the usual dense / activation /
normalization layers, two kinds implement adaptive-layer-norm blocks in a flat
sequence:

- ``adaln_modulation`` regresses (shift, scale, gate) from ``silu(conditioning)``,
  stores its input on a residual stack and returns ``LN(x) * (1 + scale) + shift``;
- ``residual_gate`` pops that entry and returns ``residual + gate * x``.

So ``[adaln_modulation, dense, silu, residual_gate]`` is one gated residual
block. Backward recomputes the forward pass and walks it in reverse.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..errors import ShapeError

LAYER_KINDS = ("dense", "silu", "layer_norm", "adaln_modulation", "residual_gate", "softplus")
LN_EPS = 1e-6

Network = Tuple["LayerSpec", ...]


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_dim: int
    out_dim: int
    name: str = ""
    cond_dim: int = 0

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"Unknown layer kind {self.kind!r}. Supported: {LAYER_KINDS}")
        if self.in_dim <= 0 or self.out_dim <= 0:
            raise ValueError(f"Layer {self.name or self.kind} needs positive dims")
        if self.kind != "dense" and self.in_dim != self.out_dim:
            raise ValueError(f"{self.kind} layer must preserve width ({self.in_dim} != {self.out_dim})")
        if self.kind == "adaln_modulation" and self.cond_dim <= 0:
            raise ValueError(f"adaln_modulation layer {self.name} needs cond_dim > 0")
        if self.kind in ("dense", "adaln_modulation") and not self.name:
            raise ValueError(f"{self.kind} layer needs a parameter name")

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        if self.kind == "dense":
            return {f"{self.name}.W": (self.in_dim, self.out_dim), f"{self.name}.b": (self.out_dim,)}
        if self.kind == "adaln_modulation":
            return {
                f"{self.name}.W": (self.cond_dim, 3 * self.out_dim),
                f"{self.name}.b": (3 * self.out_dim,),
            }
        return {}


# ---------- construction helpers ----------

def dense(name: str, in_dim: int, out_dim: int) -> LayerSpec:
    return LayerSpec("dense", in_dim, out_dim, name)


def silu_layer(dim: int) -> LayerSpec:
    return LayerSpec("silu", dim, dim)


def layer_norm(dim: int) -> LayerSpec:
    return LayerSpec("layer_norm", dim, dim)


def softplus_layer(dim: int) -> LayerSpec:
    return LayerSpec("softplus", dim, dim)


def adaln_block(name: str, dim: int, cond_dim: int) -> List[LayerSpec]:
    return [
        LayerSpec("adaln_modulation", dim, dim, f"{name}.mod", cond_dim),
        dense(f"{name}.dense", dim, dim),
        silu_layer(dim),
        LayerSpec("residual_gate", dim, dim),
    ]


def mlp(name: str, in_dim: int, hidden: int, depth: int, out_dim: Optional[int] = None) -> List[LayerSpec]:
    """``depth`` dense+SiLU layers; an optional linear head of width ``out_dim``."""
    layers: List[LayerSpec] = []
    width = in_dim
    for k in range(depth):
        layers += [dense(f"{name}.{k}", width, hidden), silu_layer(hidden)]
        width = hidden
    if out_dim is not None:
        layers.append(dense(f"{name}.out", width, out_dim))
    return layers


def needs_conditioning(net: Sequence[LayerSpec]) -> bool:
    return any(layer.kind == "adaln_modulation" for layer in net)


def conditioning_dim(net: Sequence[LayerSpec]) -> int:
    dims = {layer.cond_dim for layer in net if layer.kind == "adaln_modulation"}
    if len(dims) > 1:
        raise ValueError(f"modulation layers disagree on conditioning width: {sorted(dims)}")
    return dims.pop() if dims else 0


def init_params(
    net: Sequence[LayerSpec],
    rng: np.random.Generator,
    zero_layers: Sequence[str] = (),
) -> Dict[str, np.ndarray]:
    """
    Glorot-uniform dense weights, zero biases, zero modulation (so every
    adaLN block starts as the identity). Layers named in ``zero_layers`` are
    zeroed entirely.
    """
    params: Dict[str, np.ndarray] = {}
    for layer in net:
        if layer.kind == "dense":
            if layer.name in zero_layers:
                weight = np.zeros((layer.in_dim, layer.out_dim))
            else:
                limit = np.sqrt(6.0 / (layer.in_dim + layer.out_dim))
                weight = rng.uniform(-limit, limit, size=(layer.in_dim, layer.out_dim))
            params[f"{layer.name}.W"] = weight
            params[f"{layer.name}.b"] = np.zeros(layer.out_dim)
        elif layer.kind == "adaln_modulation":
            params[f"{layer.name}.W"] = np.zeros((layer.cond_dim, 3 * layer.out_dim))
            params[f"{layer.name}.b"] = np.zeros(3 * layer.out_dim)
    return params


# ---------- elementwise kernels ----------

def silu(x: np.ndarray) -> np.ndarray:
    return x * expit(x)


def silu_grad(x: np.ndarray) -> np.ndarray:
    s = expit(x)
    return s * (1.0 + x * (1.0 - s))


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _layer_norm_forward(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    centered = x - x.mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=1, keepdims=True) + LN_EPS)
    return centered * inv_std, inv_std


def _layer_norm_backward(grad: np.ndarray, normed: np.ndarray, inv_std: np.ndarray) -> np.ndarray:
    mean_grad = grad.mean(axis=1, keepdims=True)
    mean_grad_normed = (grad * normed).mean(axis=1, keepdims=True)
    return inv_std * (grad - mean_grad - normed * mean_grad_normed)


# ---------- forward / backward ----------

def _check_inputs(
    net: Sequence[LayerSpec],
    params: Dict[str, np.ndarray],
    inputs: np.ndarray,
    conditioning: Optional[np.ndarray],
) -> None:
    if not net:
        raise ShapeError("empty network")
    if inputs.ndim != 2 or inputs.shape[1] != net[0].in_dim:
        raise ShapeError(
            f"input has shape {inputs.shape}, network expects {net[0].in_dim} columns",
            {"expected": net[0].in_dim, "got": list(inputs.shape)},
        )
    for prev, nxt in zip(net[:-1], net[1:]):
        if prev.out_dim != nxt.in_dim:
            raise ShapeError(
                f"layer {prev.name or prev.kind} outputs {prev.out_dim} but "
                f"{nxt.name or nxt.kind} expects {nxt.in_dim}"
            )
    if needs_conditioning(net):
        if conditioning is None:
            raise ShapeError("network has adaLN modulation layers but no conditioning was given")
        width = conditioning_dim(net)
        if conditioning.ndim != 2 or conditioning.shape != (inputs.shape[0], width):
            raise ShapeError(
                f"conditioning has shape {conditioning.shape}, expected ({inputs.shape[0]}, {width})",
                {"expected": [inputs.shape[0], width], "got": list(conditioning.shape)},
            )
    elif conditioning is not None:
        raise ShapeError("conditioning given to a network without modulation layers")
    for layer in net:
        for key, shape in layer.param_shapes().items():
            if key not in params:
                raise ShapeError(f"missing parameter {key}")
            if params[key].shape != shape:
                raise ShapeError(
                    f"parameter {key} has shape {params[key].shape}, expected {shape}",
                    {"parameter": key},
                )


def _run_forward(net, params, inputs, conditioning):
    x = inputs
    cond_act = silu(conditioning) if conditioning is not None else None
    caches: List[tuple] = []
    residuals: List[tuple] = []
    for layer in net:
        if layer.kind == "dense":
            caches.append((x,))
            x = x @ params[f"{layer.name}.W"] + params[f"{layer.name}.b"]
        elif layer.kind == "silu":
            caches.append((x,))
            x = silu(x)
        elif layer.kind == "softplus":
            caches.append((x,))
            x = softplus(x)
        elif layer.kind == "layer_norm":
            normed, inv_std = _layer_norm_forward(x)
            caches.append((normed, inv_std))
            x = normed
        elif layer.kind == "adaln_modulation":
            modulation = cond_act @ params[f"{layer.name}.W"] + params[f"{layer.name}.b"]
            shift, scale, gate = np.split(modulation, 3, axis=1)
            normed, inv_std = _layer_norm_forward(x)
            residuals.append((x, gate))
            caches.append((normed, inv_std, scale))
            x = normed * (1.0 + scale) + shift
        elif layer.kind == "residual_gate":
            if not residuals:
                raise ShapeError("residual_gate without a preceding adaln_modulation")
            residual, gate = residuals.pop()
            caches.append((x, gate))
            x = residual + gate * x
    if residuals:
        raise ShapeError("adaln_modulation without a closing residual_gate")
    return x, caches, cond_act


def forward(
    net: Sequence[LayerSpec],
    params: Dict[str, np.ndarray],
    inputs: np.ndarray,
    conditioning: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Evaluate the network on a batch (rows are samples)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    conditioning = None if conditioning is None else np.asarray(conditioning, dtype=np.float64)
    _check_inputs(net, params, inputs, conditioning)
    output, _, _ = _run_forward(net, params, inputs, conditioning)
    return output


def backward(
    net: Sequence[LayerSpec],
    params: Dict[str, np.ndarray],
    inputs: np.ndarray,
    conditioning: Optional[np.ndarray],
    output_grad: np.ndarray,
) -> Tuple[Dict[str, np.ndarray], np.ndarray, Optional[np.ndarray]]:
    """
    Reverse-mode gradients of ``sum(output * output_grad)``.

    Returns:
        (parameter gradients, input gradient, conditioning gradient or None)
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    conditioning = None if conditioning is None else np.asarray(conditioning, dtype=np.float64)
    _check_inputs(net, params, inputs, conditioning)
    output, caches, cond_act = _run_forward(net, params, inputs, conditioning)
    grad = np.asarray(output_grad, dtype=np.float64)
    if grad.shape != output.shape:
        raise ShapeError(
            f"output_grad has shape {grad.shape}, output has shape {output.shape}",
            {"expected": list(output.shape), "got": list(grad.shape)},
        )

    grads: Dict[str, np.ndarray] = {}
    cond_act_grad = np.zeros_like(cond_act) if cond_act is not None else None
    pending: List[tuple] = []

    for layer, cache in zip(reversed(net), reversed(caches)):
        if layer.kind == "dense":
            (x_in,) = cache
            grads[f"{layer.name}.W"] = x_in.T @ grad
            grads[f"{layer.name}.b"] = grad.sum(axis=0)
            grad = grad @ params[f"{layer.name}.W"].T
        elif layer.kind == "silu":
            (x_in,) = cache
            grad = grad * silu_grad(x_in)
        elif layer.kind == "softplus":
            (x_in,) = cache
            grad = grad * expit(x_in)
        elif layer.kind == "layer_norm":
            normed, inv_std = cache
            grad = _layer_norm_backward(grad, normed, inv_std)
        elif layer.kind == "residual_gate":
            inner, gate = cache
            pending.append((grad, grad * inner))
            grad = grad * gate
        elif layer.kind == "adaln_modulation":
            normed, inv_std, scale = cache
            residual_grad, gate_grad = pending.pop()
            modulation_grad = np.concatenate([grad, grad * normed, gate_grad], axis=1)
            grads[f"{layer.name}.W"] = cond_act.T @ modulation_grad
            grads[f"{layer.name}.b"] = modulation_grad.sum(axis=0)
            cond_act_grad += modulation_grad @ params[f"{layer.name}.W"].T
            grad = _layer_norm_backward(grad * (1.0 + scale), normed, inv_std) + residual_grad

    cond_grad = None
    if cond_act_grad is not None:
        cond_grad = cond_act_grad * silu_grad(conditioning)
    return grads, grad, cond_grad


__all__ = [
    "LAYER_KINDS",
    "LayerSpec",
    "Network",
    "dense",
    "silu_layer",
    "layer_norm",
    "softplus_layer",
    "adaln_block",
    "mlp",
    "needs_conditioning",
    "conditioning_dim",
    "init_params",
    "silu",
    "silu_grad",
    "softplus",
    "forward",
    "backward",
]
