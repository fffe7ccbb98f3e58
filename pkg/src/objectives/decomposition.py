"""
交叉熵分解

L = H(S) − I(X;Y) + E_y[D_KL(p(s|y) ‖ p̃(s|y))]。四项分别独立估计:
H 用闭式，I 用求积参照，KL 与 L 用互相独立的蒙特卡洛样本。
"""

import math
from dataclasses import dataclass
from typing import Protocol, Tuple

import numpy as np
from loguru import logger

from src.channel import ChannelModel, SnrPoint
from src.modulation import Constellation
from src.shaping import SymbolDistribution

from .losses import NATS_TO_BITS, POSTERIOR_FLOOR
from .mutual_information import MC_CHUNK, information_density, mi_oracle_quadrature


class Demodulator(Protocol):
    def predict(self, y: np.ndarray, snr_db) -> np.ndarray: ...


class _RunningMean:
    def __init__(self):
        self.total = 0.0
        self.total_sq = 0.0
        self.count = 0

    def add(self, values: np.ndarray):
        self.total += float(values.sum())
        self.total_sq += float((values**2).sum())
        self.count += values.size

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        variance = max(self.total_sq / self.count - self.mean**2, 0.0)
        return math.sqrt(variance * self.count / (self.count - 1) / self.count)


@dataclass(frozen=True)
class DecompositionResult:
    """分解各项（比特）及蒙特卡洛标准误差"""

    cross_entropy_bits: float
    entropy_bits: float
    mi_bits: float
    kl_bits: float
    cross_entropy_std_error: float
    kl_std_error: float

    @property
    def residual_bits(self) -> float:
        """|L − (H − I + KL)|"""
        return abs(self.cross_entropy_bits - (self.entropy_bits - self.mi_bits + self.kl_bits))

    @property
    def combined_std_error(self) -> float:
        return math.hypot(self.cross_entropy_std_error, self.kl_std_error)

    def holds(self, sigmas: float = 3.0) -> bool:
        return self.residual_bits < sigmas * self.combined_std_error

    def to_dict(self) -> dict:
        return {
            "cross_entropy_bits": self.cross_entropy_bits,
            "entropy_bits": self.entropy_bits,
            "mi_bits": self.mi_bits,
            "kl_bits": self.kl_bits,
            "residual_bits": self.residual_bits,
            "combined_std_error": self.combined_std_error,
        }


def _demod_log_probs(demod: Demodulator, y: np.ndarray, snr_db: float) -> np.ndarray:
    probs = demod.predict(y, snr_db)
    return np.log(np.maximum(probs, POSTERIOR_FLOOR))


def _cross_entropy_samples(
    c: Constellation,
    dist: SymbolDistribution,
    demod: Demodulator,
    channel: ChannelModel,
    snr: SnrPoint,
    samples: int,
    rng: np.random.Generator,
) -> _RunningMean:
    stats = _RunningMean()
    drawn = 0
    while drawn < samples:
        size = min(MC_CHUNK, samples - drawn)
        symbols, y, _ = information_density(c, dist, channel, snr, size, rng)
        log_q = _demod_log_probs(demod, y, snr.snr_db)
        stats.add(-log_q[np.arange(size), symbols] * NATS_TO_BITS)
        drawn += size
    return stats


def decomposition_check(
    c: Constellation,
    dist: SymbolDistribution,
    demod: Demodulator,
    snr: SnrPoint,
    samples: int,
    rng: np.random.Generator,
) -> DecompositionResult:
    """
    独立估计分解的每一项并给出残差

    Args:
        c: 星座
        dist: 符号分布
        demod: 任何提供 predict(y, snr_db) -> (batch, N) 的解调器
        snr: SNR（AWGN 信道，精确后验可得）
        samples: 每个蒙特卡洛估计的样本数
        rng: 随机数生成器

    Returns:
        DecompositionResult: 各项及残差
    """
    channel = ChannelModel.awgn()
    entropy = dist.entropy_bits()
    mi = mi_oracle_quadrature(c, dist, snr)
    cross_entropy = _cross_entropy_samples(c, dist, demod, channel, snr, samples, rng)

    kl = _RunningMean()
    drawn = 0
    while drawn < samples:
        size = min(MC_CHUNK, samples - drawn)
        _, y, log_p = information_density(c, dist, channel, snr, size, rng)
        log_q = _demod_log_probs(demod, y, snr.snr_db)
        p = np.exp(log_p)
        terms = np.where(p > 0, p * (log_p - log_q), 0.0)
        kl.add(terms.sum(axis=1) * NATS_TO_BITS)
        drawn += size

    result = DecompositionResult(
        cross_entropy_bits=cross_entropy.mean,
        entropy_bits=entropy,
        mi_bits=mi,
        kl_bits=kl.mean,
        cross_entropy_std_error=cross_entropy.std_error,
        kl_std_error=kl.std_error,
    )
    logger.debug(
        f"分解检查 {snr}: L={result.cross_entropy_bits:.5f}, H={entropy:.5f}, I={mi:.5f}, "
        f"KL={result.kl_bits:.5f}, 残差={result.residual_bits:.2e}"
    )
    return result


def mi_lower_bound_monte_carlo(
    c: Constellation,
    dist: SymbolDistribution,
    demod: Demodulator,
    channel: ChannelModel,
    snr: SnrPoint,
    samples: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """
    互信息下界 −L̂ = H(S) − L 的蒙特卡洛估计

    Returns:
        Tuple[float, float]: (−L̂, 标准误差)，单位比特
    """
    stats = _cross_entropy_samples(c, dist, demod, channel, snr, samples, rng)
    return dist.entropy_bits() - stats.mean, stats.std_error
