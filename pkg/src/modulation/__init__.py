"""
调制模块

可训练星座矩阵与能量归一化、QAM 基线星座以及 Maxwell-Boltzmann 整形。
"""

from .constellation import (
    SUPPORTED_QAM_ORDERS,
    Constellation,
    energy_error,
    energy_scale,
    initial_points,
    modulate,
    normalize,
    normalize_tensor,
    psk_points,
    qam,
    qam_grid,
)
from .maxwell_boltzmann import MaxwellBoltzmannShaping, maxwell_boltzmann_distribution

__all__ = [
    "SUPPORTED_QAM_ORDERS",
    "Constellation",
    "energy_error",
    "energy_scale",
    "initial_points",
    "modulate",
    "normalize",
    "normalize_tensor",
    "psk_points",
    "qam",
    "qam_grid",
    "MaxwellBoltzmannShaping",
    "maxwell_boltzmann_distribution",
]
