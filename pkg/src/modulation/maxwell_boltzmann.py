"""
Maxwell-Boltzmann 整形

p_s ∝ exp(−ν|x_s|²)，在固定几何下是 AWGN 信道的互信息最优分布族。
"""

from dataclasses import dataclass

import numpy as np

from src.errors import InvalidArgumentError
from src.shaping import SymbolDistribution, logits_to_distribution

from .constellation import Constellation, normalize


@dataclass(frozen=True)
class MaxwellBoltzmannShaping:
    """以 ν 为参数的 Maxwell-Boltzmann 整形"""

    nu: float
    base: Constellation

    def __post_init__(self):
        if not self.nu >= 0:
            raise InvalidArgumentError(f"nu 必须非负: {self.nu}")

    @property
    def distribution(self) -> SymbolDistribution:
        return maxwell_boltzmann_distribution(self.base, self.nu)

    def constellation(self) -> Constellation:
        """整形后重新归一化能量的星座"""
        dist = self.distribution
        return normalize(self.base.points, dist)


def maxwell_boltzmann_distribution(base: Constellation, nu: float) -> SymbolDistribution:
    """
    在未重新归一化的基础几何上计算 Maxwell-Boltzmann 分布

    整形会改变平均能量，调用方需要随后重新归一化星座。

    Args:
        base: 基础星座
        nu: 非负整形参数

    Returns:
        SymbolDistribution: 整形分布
    """
    if not nu >= 0:
        raise InvalidArgumentError(f"nu 必须非负: {nu}")
    energies = (base.points**2).sum(axis=1)
    return logits_to_distribution(-nu * energies)
