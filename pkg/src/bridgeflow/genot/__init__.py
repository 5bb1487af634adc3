"""
Conditional flow matching across domains: velocity fields, training and ODE inference.
"""

from .architectures import (
    ARCHITECTURES,
    ReweightingNets,
    VelocityField,
    build_reweighting_nets,
    build_velocity_field,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .flows import cfm_conditional_field, interpolant, time_embedding
from .loss import LossResult, genot_loss
from .ode import integrate_rk4, push_forward
from .trainer import TrainingHistory, TrainResult, train

__all__ = [
    "ARCHITECTURES",
    "VelocityField",
    "ReweightingNets",
    "build_velocity_field",
    "build_reweighting_nets",
    "save_checkpoint",
    "load_checkpoint",
    "interpolant",
    "cfm_conditional_field",
    "time_embedding",
    "LossResult",
    "genot_loss",
    "integrate_rk4",
    "push_forward",
    "TrainingHistory",
    "TrainResult",
    "train",
]
