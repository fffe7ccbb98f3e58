"""
自动微分模块

固定拓扑的反向模式自动微分与 Adam 优化，供分布网络、调制矩阵和解调网络共用。
"""

from . import ops
from .checkpoint import load_parameters, parameters_from_dict, parameters_to_dict, save_parameters
from .gradcheck import GradCheckResult, finite_difference_check, random_projection_loss
from .layers import Activation, DenseLayer, dense_forward
from .optim import AdamConfig, adam_step, zero_grad
from .tensor import Parameter, Tensor, backward, constant, ensure_tensor

__all__ = [
    "ops",
    "Tensor",
    "Parameter",
    "backward",
    "constant",
    "ensure_tensor",
    "Activation",
    "DenseLayer",
    "dense_forward",
    "AdamConfig",
    "adam_step",
    "zero_grad",
    "save_parameters",
    "load_parameters",
    "parameters_to_dict",
    "parameters_from_dict",
    "GradCheckResult",
    "finite_difference_check",
    "random_projection_loss",
]
