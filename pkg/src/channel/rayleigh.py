"""
Rayleigh 块衰落信道（LMMSE 估计 + 迫零均衡）

每个符号一个衰落块: h ~ CN(0, 1)；导频 p = 1，观测 y_p = h + n_p（多个导频取平均）；
LMMSE 估计 ĥ = (Pρ / (Pρ + 1)) · ȳ_p；数据 y = h·x + n；均衡输出 y_eq = y·conj(ĥ)/|ĥ|²。
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from loguru import logger

from src.autodiff import Tensor, ensure_tensor, ops

from .models import SnrLike, snr_linear_array

MIN_ESTIMATE_MAGNITUDE = 1e-12
MAX_ESTIMATE_REDRAWS = 100


@dataclass
class FadingRealization:
    """一批衰落实现及其估计"""

    h: np.ndarray
    h_hat: np.ndarray
    noise: np.ndarray
    noise_variance: np.ndarray
    redraws: int = 0

    @property
    def gain(self) -> np.ndarray:
        """均衡后的等效增益 h·conj(ĥ)/|ĥ|²"""
        return self.h / self.h_hat

    @property
    def equalized_noise(self) -> np.ndarray:
        return self.noise / self.h_hat

    @property
    def equalized_noise_variance(self) -> np.ndarray:
        """均衡后噪声的复方差 σ²/|ĥ|²"""
        return self.noise_variance / np.abs(self.h_hat) ** 2

    @property
    def estimate_error(self) -> np.ndarray:
        return np.abs(self.h - self.h_hat) ** 2


def lmmse_coefficient(snr_linear: np.ndarray, pilot_count: int) -> np.ndarray:
    """LMMSE 系数 Pρ/(Pρ+1)，ρ = ∞ 时为 1"""
    effective = pilot_count * np.asarray(snr_linear, dtype=np.float64)
    return np.where(np.isinf(effective), 1.0, effective / (effective + 1.0))


def _floor_magnitude(values: np.ndarray) -> np.ndarray:
    """幅度抬到 MIN_ESTIMATE_MAGNITUDE，相位不变（零值取相位 0）"""
    magnitude = np.abs(values)
    phase = np.divide(values, magnitude, out=np.ones_like(values), where=magnitude > 0)
    return phase * MIN_ESTIMATE_MAGNITUDE


def _complex_normal(size, variance, rng: np.random.Generator) -> np.ndarray:
    std = np.sqrt(np.asarray(variance, dtype=np.float64) / 2.0)
    return (rng.normal(size=size) + 1j * rng.normal(size=size)) * std


def draw_fading(
    batch: int,
    snr: SnrLike,
    rng: np.random.Generator,
    pilot_count: int = 1,
    noise_free: bool = False,
    perfect_csi: bool = False,
    fading: bool = True,
) -> FadingRealization:
    """
    抽取一批衰落系数、导频估计和数据噪声

    Args:
        batch: 样本个数
        snr: SNR
        rng: 随机数生成器
        pilot_count: 每个衰落块的导频个数
        noise_free: 测试钩子，数据噪声与导频噪声都置零
        perfect_csi: 测试钩子，ĥ = h
        fading: 测试钩子，False 时 h = 1

    Returns:
        FadingRealization: 衰落实现
    """
    rho = snr_linear_array(snr, batch)
    with np.errstate(divide="ignore"):
        variance = 1.0 / rho
    h = _complex_normal(batch, 1.0, rng) if fading else np.ones(batch, dtype=np.complex128)
    noise = _complex_normal(batch, variance, rng)
    if noise_free:
        noise = np.zeros(batch, dtype=np.complex128)

    if perfect_csi:
        return FadingRealization(h=h, h_hat=h.copy(), noise=noise, noise_variance=variance)

    coefficient = lmmse_coefficient(rho, pilot_count)
    pilot_variance = variance / pilot_count

    def estimate(rows: np.ndarray) -> np.ndarray:
        pilot_noise = _complex_normal(rows.size, pilot_variance[rows], rng)
        if noise_free:
            pilot_noise = np.zeros(rows.size, dtype=np.complex128)
        return coefficient[rows] * (h[rows] + pilot_noise)

    h_hat = estimate(np.arange(batch))
    redraws = 0
    bad = np.flatnonzero(np.abs(h_hat) < MIN_ESTIMATE_MAGNITUDE)
    # 无噪声时导频噪声固定为零，重抽不会改变估计
    attempts = 0 if noise_free else MAX_ESTIMATE_REDRAWS
    while bad.size and attempts:
        attempts -= 1
        redraws += bad.size
        logger.debug(f"信道估计幅度低于 {MIN_ESTIMATE_MAGNITUDE}，重新抽取 {bad.size} 个导频噪声")
        h_hat[bad] = estimate(bad)
        bad = bad[np.abs(h_hat[bad]) < MIN_ESTIMATE_MAGNITUDE]
    if redraws:
        logger.warning(f"⚠️  信道估计幅度过小，共重新抽取 {redraws} 次导频噪声")
    if bad.size:
        logger.warning(f"⚠️  {bad.size} 个信道估计仍低于下限，保持相位并把幅度抬到下限")
        h_hat[bad] = _floor_magnitude(h_hat[bad])
    return FadingRealization(
        h=h, h_hat=h_hat, noise=noise, noise_variance=variance, redraws=redraws
    )


def apply_fading(x, realization: FadingRealization) -> Tensor:
    """y_eq = x·h/ĥ + n/ĥ，对 x 可导（梯度为均衡增益）"""
    x = ensure_tensor(x)
    noise = realization.equalized_noise
    return ops.add(
        ops.complex_mul_const(x, realization.gain), np.column_stack([noise.real, noise.imag])
    )


def rayleigh_lmmse_transmit(
    x,
    snr: SnrLike,
    rng: np.random.Generator,
    pilot_count: int = 1,
    noise_free: bool = False,
) -> Tuple[Tensor, FadingRealization]:
    """
    经过 Rayleigh 衰落、LMMSE 估计和迫零均衡

    Args:
        x: (batch, 2) 发送符号
        snr: SNR
        rng: 随机数生成器
        pilot_count: 导频个数
        noise_free: 测试钩子，n = n_p = 0

    Returns:
        Tuple[Tensor, FadingRealization]: 均衡输出与衰落实现（含估计质量）
    """
    x = ensure_tensor(x)
    realization = draw_fading(x.rows, snr, rng, pilot_count=pilot_count, noise_free=noise_free)
    return apply_fading(x, realization), realization
