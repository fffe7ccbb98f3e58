"""
目标函数模块

交叉熵 L、源熵 H(S)、修正损失 L̂ = L − H、交叉熵分解，以及互信息参照与参考曲线。
所有对外报告的量都以比特为单位。
"""

from .baselines import (
    MaxwellBoltzmannOptimum,
    capacity_curve,
    ergodic_capacity_curve,
    golden_section_maximize,
    mb_qam_curve,
    optimize_maxwell_boltzmann,
    qam_curve,
    rayleigh_bound_curve,
    require_awgn,
)
from .decomposition import DecompositionResult, decomposition_check, mi_lower_bound_monte_carlo
from .losses import (
    NATS_TO_BITS,
    POSTERIOR_FLOOR,
    ClampCounter,
    CorrectedLoss,
    corrected_loss,
    cross_entropy_loss,
    nats_to_bits,
    source_entropy,
)
from .models import LossBreakdown, MICurve
from .mutual_information import (
    MIN_MC_SAMPLES,
    information_density,
    mi_oracle,
    mi_oracle_monte_carlo,
    mi_oracle_quadrature,
)

__all__ = [
    "MaxwellBoltzmannOptimum",
    "capacity_curve",
    "ergodic_capacity_curve",
    "golden_section_maximize",
    "mb_qam_curve",
    "optimize_maxwell_boltzmann",
    "qam_curve",
    "rayleigh_bound_curve",
    "require_awgn",
    "DecompositionResult",
    "decomposition_check",
    "mi_lower_bound_monte_carlo",
    "NATS_TO_BITS",
    "POSTERIOR_FLOOR",
    "ClampCounter",
    "CorrectedLoss",
    "corrected_loss",
    "cross_entropy_loss",
    "nats_to_bits",
    "source_entropy",
    "LossBreakdown",
    "MICurve",
    "MIN_MC_SAMPLES",
    "information_density",
    "mi_oracle",
    "mi_oracle_monte_carlo",
    "mi_oracle_quadrature",
]
