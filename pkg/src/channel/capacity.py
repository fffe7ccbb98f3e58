"""
信道容量参考曲线
"""

import math

import numpy as np

from src.errors import InvalidArgumentError

from .models import SnrPoint
from .rayleigh import draw_fading, lmmse_coefficient

MIN_MC_SAMPLES = 100_000


def capacity_awgn(snr: SnrPoint) -> float:
    """AWGN 容量 log2(1 + snr)"""
    return math.log2(1.0 + snr.snr_linear)


def _check_samples(mc_samples: int):
    if mc_samples < MIN_MC_SAMPLES:
        raise InvalidArgumentError(f"蒙特卡洛样本数至少为 {MIN_MC_SAMPLES}，收到 {mc_samples}")


def capacity_rayleigh_lower_bound(
    snr: SnrPoint,
    mc_samples: int,
    rng: np.random.Generator,
    pilot_count: int = 1,
    perfect_csi: bool = False,
    fading: bool = True,
) -> float:
    """
    LMMSE 均衡信道在高斯输入下的可达速率下界

    估计误差 e = h − ĥ 与 ĥ 独立、方差为 1/(Pρ+1)，把残余干扰与噪声视为高斯:
    E_ĥ[log2(1 + |ĥ|² / (MSE + σ²))]。

    Args:
        snr: SNR
        mc_samples: 蒙特卡洛样本数（≥ 1e5）
        rng: 随机数生成器
        pilot_count: 导频个数
        perfect_csi: 测试钩子，ĥ = h 且 MSE = 0
        fading: 测试钩子，False 时 h = 1（需配合 perfect_csi）

    Returns:
        float: 比特/符号
    """
    _check_samples(mc_samples)
    realization = draw_fading(
        mc_samples, snr, rng, pilot_count=pilot_count, perfect_csi=perfect_csi, fading=fading
    )
    rho = snr.snr_linear
    if perfect_csi or not fading:
        mse = 0.0
    else:
        mse = 1.0 - float(lmmse_coefficient(np.array(rho), pilot_count))
    interference = mse + snr.noise_variance
    if interference == 0:
        return math.inf
    effective_snr = np.abs(realization.h_hat) ** 2 / interference
    return float(np.mean(np.log2(1.0 + effective_snr)))


def capacity_rayleigh_ergodic(snr: SnrPoint, mc_samples: int, rng: np.random.Generator) -> float:
    """完美 CSI 下的遍历容量 E[log2(1 + ρ|h|²)]"""
    _check_samples(mc_samples)
    h = (rng.normal(size=mc_samples) + 1j * rng.normal(size=mc_samples)) / math.sqrt(2.0)
    return float(np.mean(np.log2(1.0 + snr.snr_linear * np.abs(h) ** 2)))
