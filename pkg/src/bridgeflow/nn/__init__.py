from .layers import LayerSpec, backward, forward, init_params
from .params import ParamStore, adam_step

__all__ = ["LayerSpec", "forward", "backward", "init_params", "ParamStore", "adam_step"]
