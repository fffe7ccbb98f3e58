"""
参考曲线

未整形 QAM、Maxwell-Boltzmann 整形 QAM（对 ν 做黄金分割搜索）、AWGN 容量与 Rayleigh 下界。
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from loguru import logger

from src.channel import (
    ChannelKind,
    ChannelModel,
    SnrPoint,
    capacity_awgn,
    capacity_rayleigh_ergodic,
    capacity_rayleigh_lower_bound,
)
from src.errors import InvalidArgumentError, UnsupportedChannelError
from src.modulation import MaxwellBoltzmannShaping, qam
from src.shaping import SymbolDistribution

from .models import MICurve
from .mutual_information import mi_oracle, mi_oracle_quadrature

GOLDEN_RATIO = (math.sqrt(5.0) + 1.0) / 2.0
# ν 相对于单位平均能量的基础 QAM
DEFAULT_NU_BOUNDS = (0.0, 10.0)


def golden_section_maximize(
    fn: Callable[[float], float], low: float, high: float, tol: float = 1e-4
) -> Tuple[float, float]:
    """
    单峰函数在 [low, high] 上的黄金分割搜索

    每轮保留的内点沿用上一轮的函数值，只新算一个点。

    Returns:
        Tuple[float, float]: (最优自变量, 函数值)
    """
    if not high > low:
        raise InvalidArgumentError(f"搜索区间无效: [{low}, {high}]")
    a, b = low, high
    c = b - (b - a) / GOLDEN_RATIO
    d = a + (b - a) / GOLDEN_RATIO
    fc, fd = fn(c), fn(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - (b - a) / GOLDEN_RATIO
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) / GOLDEN_RATIO
            fd = fn(d)
    best = (a + b) / 2.0
    return best, fn(best)


@dataclass(frozen=True)
class MaxwellBoltzmannOptimum:
    """某个 SNR 下 ν 搜索的结果"""

    snr_db: float
    nu: float
    mi_bits: float
    distribution: SymbolDistribution


def optimize_maxwell_boltzmann(
    order: int, snr: SnrPoint, bounds: Tuple[float, float] = DEFAULT_NU_BOUNDS
) -> MaxwellBoltzmannOptimum:
    """
    在固定 QAM 几何上搜索使互信息最大的 ν

    Args:
        order: QAM 阶数（必须为支持的方形阶数）
        snr: SNR（AWGN）
        bounds: ν 的搜索区间（ν 相对于单位平均能量的基础 QAM，默认 [0, 10]）

    Returns:
        MaxwellBoltzmannOptimum: 最优 ν、对应互信息与分布
    """
    base = qam(order)

    def mi_at(nu: float) -> float:
        shaping = MaxwellBoltzmannShaping(nu, base)
        return mi_oracle_quadrature(shaping.constellation(), shaping.distribution, snr)

    nu, mi = golden_section_maximize(mi_at, *bounds)
    # ν = 0（均匀 QAM）在区间端点，搜索可能取不到
    uniform_mi = mi_at(0.0)
    if uniform_mi >= mi:
        nu, mi = 0.0, uniform_mi
    optimum = MaxwellBoltzmannOptimum(
        snr_db=snr.snr_db,
        nu=nu,
        mi_bits=mi,
        distribution=MaxwellBoltzmannShaping(nu, base).distribution,
    )
    logger.debug(f"MB 搜索 N={order} {snr}: ν={nu:.4f}, I={mi:.5f} bit")
    return optimum


def qam_curve(
    order: int,
    snr_grid: Iterable[float],
    channel: ChannelModel = ChannelModel.awgn(),
    mc_samples: int = 1_000_000,
    rng: Optional[np.random.Generator] = None,
) -> MICurve:
    """均匀 QAM 的互信息曲线"""
    c = qam(order)
    dist = SymbolDistribution.uniform(order)
    rng = rng if rng is not None else np.random.default_rng(0)
    entries = []
    for snr_db in snr_grid:
        mi, _ = mi_oracle(c, dist, channel, SnrPoint(snr_db), mc_samples, rng)
        entries.append((snr_db, mi))
    return MICurve("qam", order, entries)


def mb_qam_curve(order: int, snr_grid: Iterable[float]) -> MICurve:
    """Maxwell-Boltzmann 整形 QAM 曲线，每个 SNR 单独搜索 ν"""
    entries = []
    for snr_db in snr_grid:
        optimum = optimize_maxwell_boltzmann(order, SnrPoint(snr_db))
        logger.info(f"📐 MB 整形 N={order} @ {snr_db} dB: ν={optimum.nu:.4f}")
        entries.append((snr_db, optimum.mi_bits))
    return MICurve("mb_qam", order, entries)


def capacity_curve(snr_grid: Iterable[float]) -> MICurve:
    return MICurve("capacity", 0, [(s, capacity_awgn(SnrPoint(s))) for s in snr_grid])


def rayleigh_bound_curve(
    snr_grid: Iterable[float],
    mc_samples: int,
    rng: np.random.Generator,
    pilot_count: int = 1,
) -> MICurve:
    """LMMSE 均衡 Rayleigh 信道的高斯输入下界曲线"""
    entries = [
        (s, capacity_rayleigh_lower_bound(SnrPoint(s), mc_samples, rng, pilot_count=pilot_count))
        for s in snr_grid
    ]
    return MICurve("rayleigh_bound", 0, entries)


def require_awgn(channel: ChannelModel, scheme: str):
    if channel.kind != ChannelKind.AWGN:
        raise UnsupportedChannelError(f"基线 {scheme} 只支持 AWGN 信道")


def ergodic_capacity_curve(
    snr_grid: Iterable[float], mc_samples: int, rng: np.random.Generator
) -> MICurve:
    """完美 CSI 的 Rayleigh 遍历容量曲线"""
    entries = [(s, capacity_rayleigh_ergodic(SnrPoint(s), mc_samples, rng)) for s in snr_grid]
    return MICurve("capacity", 0, entries)
