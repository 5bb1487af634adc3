"""
Velocity-field and reweighting networks.

Both architecture families embed the time (sinusoidal features -> 2-layer MLP)
and the source point (2-layer MLP) independently. They differ in how that
conditioning reaches the state x_t:

- ``mlp_*``: the state gets its own 2-layer embedding, the three embeddings
  are concatenated and a depth-N MLP with a zero-initialized linear head
  predicts the velocity;
- ``adaln_*``: the state is projected to width d and passed through N gated
  adaLN residual blocks whose shift/scale/gate are regressed from
  concat(time embedding, source embedding); a final layer norm and a
  zero-initialized linear head follow.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import InputError, ShapeError
from ..nn import ParamStore, backward, forward, init_params
from ..nn.layers import LayerSpec, adaln_block, dense, layer_norm, mlp, softplus_layer
from .flows import TIME_EMBEDDING_DIM, time_embedding

# (layers N, hidden width d)
ARCHITECTURES: Dict[str, Tuple[int, int]] = {
    "mlp_small": (4, 256),
    "mlp_medium": (6, 512),
    "mlp_large": (8, 1680),
    "adaln_small": (5, 128),
    "adaln_medium": (7, 256),
    "adaln_large": (8, 1024),
}

EMBED_DEPTH = 2
HEAD = "head.out"


def arch_family(arch: str) -> str:
    if arch not in ARCHITECTURES:
        raise InputError(f"Unknown architecture {arch!r}. Supported: {sorted(ARCHITECTURES)}")
    return arch.split("_", 1)[0]


def _split(grad: np.ndarray, widths: List[int]) -> List[np.ndarray]:
    return np.split(grad, np.cumsum(widths)[:-1], axis=1)


def _accumulate(total: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
    for name, value in grads.items():
        if name in total:
            total[name] = total[name] + value
        else:
            total[name] = value


@dataclass
class VelocityField:
    """v(x_t | t, x): target-space velocity conditioned on time and a source point."""

    arch: str
    source_dim: int
    target_dim: int
    hidden: int
    layers: int
    store: ParamStore
    networks: Dict[str, Tuple[LayerSpec, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.networks:
            self.networks = velocity_networks(self.arch, self.source_dim, self.target_dim, self.hidden, self.layers)
        expected = {
            name for net in self.networks.values() for layer in net for name in layer.param_shapes()
        }
        if set(self.store.params) != expected:
            missing = sorted(expected - set(self.store.params))
            extra = sorted(set(self.store.params) - expected)
            raise ShapeError(
                f"{self.arch} parameters do not match the architecture (missing {missing[:5]}, extra {extra[:5]})",
                {"missing": missing[:20], "extra": extra[:20]},
            )

    @property
    def family(self) -> str:
        return arch_family(self.arch)

    @property
    def params(self) -> Dict[str, np.ndarray]:
        return self.store.params

    def _check(self, y: np.ndarray, x: np.ndarray) -> None:
        if y.ndim != 2 or y.shape[1] != self.target_dim:
            raise ShapeError(f"state has shape {y.shape}, expected (b, {self.target_dim})")
        if x.ndim != 2 or x.shape != (y.shape[0], self.source_dim):
            raise ShapeError(f"source batch has shape {x.shape}, expected ({y.shape[0]}, {self.source_dim})")

    def _embeddings(self, t: np.ndarray, x: np.ndarray):
        t_features = time_embedding(t)
        h_t = forward(self.networks["time"], self.params, t_features)
        h_x = forward(self.networks["source"], self.params, x)
        return t_features, h_t, h_x

    def velocity(self, y, t, x) -> np.ndarray:
        """Velocity for a batch: y (b, q), t scalar or (b,), x (b, p)."""
        y = np.asarray(y, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        self._check(y, x)
        t = np.broadcast_to(np.asarray(t, dtype=np.float64).reshape(-1), (y.shape[0],))
        _, h_t, h_x = self._embeddings(t, x)
        if self.family == "mlp":
            h_y = forward(self.networks["state"], self.params, y)
            return forward(self.networks["head"], self.params, np.concatenate([h_t, h_x, h_y], axis=1))
        return forward(self.networks["trunk"], self.params, y, np.concatenate([h_t, h_x], axis=1))

    def gradients(self, y, t, x, output_grad: np.ndarray) -> Dict[str, np.ndarray]:
        """Parameter gradients of sum(velocity(y, t, x) * output_grad)."""
        y = np.asarray(y, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        self._check(y, x)
        t = np.broadcast_to(np.asarray(t, dtype=np.float64).reshape(-1), (y.shape[0],))
        t_features, h_t, h_x = self._embeddings(t, x)
        d = self.hidden
        grads: Dict[str, np.ndarray] = {}
        if self.family == "mlp":
            h_y = forward(self.networks["state"], self.params, y)
            combined = np.concatenate([h_t, h_x, h_y], axis=1)
            head_grads, combined_grad, _ = backward(self.networks["head"], self.params, combined, None, output_grad)
            _accumulate(grads, head_grads)
            g_t, g_x, g_y = _split(combined_grad, [d, d, d])
            _accumulate(grads, backward(self.networks["state"], self.params, y, None, g_y)[0])
        else:
            conditioning = np.concatenate([h_t, h_x], axis=1)
            trunk_grads, _, cond_grad = backward(self.networks["trunk"], self.params, y, conditioning, output_grad)
            _accumulate(grads, trunk_grads)
            g_t, g_x = _split(cond_grad, [d, d])
        _accumulate(grads, backward(self.networks["time"], self.params, t_features, None, g_t)[0])
        _accumulate(grads, backward(self.networks["source"], self.params, x, None, g_x)[0])
        return grads


def velocity_networks(
    arch: str, source_dim: int, target_dim: int, hidden: int, layers: int
) -> Dict[str, Tuple[LayerSpec, ...]]:
    family = arch_family(arch)
    if hidden < 1 or layers < 1:
        raise InputError(f"hidden and layers must be >= 1, got hidden={hidden}, layers={layers}")
    networks = {
        "time": tuple(mlp("time", TIME_EMBEDDING_DIM, hidden, EMBED_DEPTH)),
        "source": tuple(mlp("source", source_dim, hidden, EMBED_DEPTH)),
    }
    if family == "mlp":
        networks["state"] = tuple(mlp("state", target_dim, hidden, EMBED_DEPTH))
        networks["head"] = tuple(mlp("head", 3 * hidden, hidden, layers, out_dim=target_dim))
    else:
        trunk: List[LayerSpec] = [dense("state.in", target_dim, hidden)]
        for k in range(layers):
            trunk += adaln_block(f"block{k}", hidden, 2 * hidden)
        trunk += [layer_norm(hidden), dense(HEAD, hidden, target_dim)]
        networks["trunk"] = tuple(trunk)
    return networks


def build_velocity_field(
    arch: str,
    source_dim: int,
    target_dim: int,
    seed: int = 0,
    hidden: Optional[int] = None,
    layers: Optional[int] = None,
) -> VelocityField:
    """
    Fresh velocity field with the tabulated sizes unless overridden.

    Dense weights are Glorot-uniform, biases and adaLN modulation zero and
    the output head zero, so the initial field is identically 0.
    """
    arch_family(arch)
    default_layers, default_hidden = ARCHITECTURES[arch]
    hidden = hidden or default_hidden
    layers = layers or default_layers
    networks = velocity_networks(arch, source_dim, target_dim, hidden, layers)
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    for name in sorted(networks):
        params.update(init_params(networks[name], rng, zero_layers=(HEAD,)))
    return VelocityField(
        arch=arch,
        source_dim=source_dim,
        target_dim=target_dim,
        hidden=hidden,
        layers=layers,
        store=ParamStore(params),
        networks=networks,
    )


@dataclass
class ReweightingNets:
    """eta: source -> R+ and xi: target -> R+, each an MLP with a softplus head."""

    source_dim: int
    target_dim: int
    hidden: int
    store: ParamStore
    networks: Dict[str, Tuple[LayerSpec, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.networks:
            self.networks = reweighting_networks(self.source_dim, self.target_dim, self.hidden)

    @property
    def params(self) -> Dict[str, np.ndarray]:
        return self.store.params

    def eta(self, x) -> np.ndarray:
        return forward(self.networks["eta"], self.params, np.asarray(x, dtype=np.float64))[:, 0]

    def xi(self, y) -> np.ndarray:
        return forward(self.networks["xi"], self.params, np.asarray(y, dtype=np.float64))[:, 0]

    def gradients(self, x, y, eta_grad: np.ndarray, xi_grad: np.ndarray) -> Dict[str, np.ndarray]:
        grads = dict(backward(self.networks["eta"], self.params, np.asarray(x, dtype=np.float64), None,
                              np.asarray(eta_grad, dtype=np.float64).reshape(-1, 1))[0])
        grads.update(backward(self.networks["xi"], self.params, np.asarray(y, dtype=np.float64), None,
                              np.asarray(xi_grad, dtype=np.float64).reshape(-1, 1))[0])
        return grads


def reweighting_networks(source_dim: int, target_dim: int, hidden: int) -> Dict[str, Tuple[LayerSpec, ...]]:
    return {
        "eta": tuple(mlp("eta", source_dim, hidden, EMBED_DEPTH, out_dim=1) + [softplus_layer(1)]),
        "xi": tuple(mlp("xi", target_dim, hidden, EMBED_DEPTH, out_dim=1) + [softplus_layer(1)]),
    }


def build_reweighting_nets(source_dim: int, target_dim: int, seed: int = 0, hidden: int = 64) -> ReweightingNets:
    networks = reweighting_networks(source_dim, target_dim, hidden)
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    for name in sorted(networks):
        params.update(init_params(networks[name], rng))
    return ReweightingNets(
        source_dim=source_dim,
        target_dim=target_dim,
        hidden=hidden,
        store=ParamStore(params),
        networks=networks,
    )


__all__ = [
    "ARCHITECTURES",
    "arch_family",
    "VelocityField",
    "velocity_networks",
    "build_velocity_field",
    "ReweightingNets",
    "reweighting_networks",
    "build_reweighting_nets",
]
