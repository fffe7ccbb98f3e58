"""
星座与调制器

几何整形的对象: N 个复平面上的点（实部、虚部两列），在配对分布下平均能量为 1。
能量归一化属于计算图的一部分，梯度会经过归一化因子。
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from src.autodiff import Tensor, constant, ensure_tensor, ops
from src.errors import DegenerateInputError, DimensionError, UnsupportedOrderError
from src.shaping import GumbelSample, SymbolDistribution, straight_through_select

SUPPORTED_QAM_ORDERS = (4, 16, 64, 256, 1024)


@dataclass
class Constellation:
    """星座点集合，points 为 (N, 2) 实数矩阵"""

    points: np.ndarray
    trainable: bool = False
    distribution: Optional[SymbolDistribution] = field(default=None, repr=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise DimensionError(f"星座点必须是 (N, 2) 矩阵，实际形状 {points.shape}")
        if not np.all(np.isfinite(points)):
            raise DegenerateInputError("星座点必须为有限值")
        self.points = points

    @property
    def order(self) -> int:
        return self.points.shape[0]

    @property
    def complex_points(self) -> np.ndarray:
        return self.points[:, 0] + 1j * self.points[:, 1]

    def mean_energy(self, dist: Optional[SymbolDistribution] = None) -> float:
        dist = dist or self.distribution or SymbolDistribution.uniform(self.order)
        return float(dist.probs @ (self.points**2).sum(axis=1))

    def rotated(self, angle: float) -> "Constellation":
        """整体相位旋转"""
        rotated = self.complex_points * np.exp(1j * angle)
        return Constellation(
            np.column_stack([rotated.real, rotated.imag]), self.trainable, self.distribution
        )

    def to_rows(
        self, dist: Optional[SymbolDistribution] = None
    ) -> List[Tuple[float, float, float]]:
        """导出为 (re, im, prob) 行"""
        dist = dist or self.distribution or SymbolDistribution.uniform(self.order)
        return [
            (float(re), float(im), float(p)) for (re, im), p in zip(self.points, dist.probs)
        ]


def energy_scale(points: Tensor, probs) -> Tensor:
    """
    逐行计算能量归一化因子 1/sqrt(Σ_s p_s |x_s|²)

    Args:
        points: (N, 2) 未归一化星座点
        probs: (batch, N) 或 (1, N) 概率（Tensor 时梯度会传回分布）

    Returns:
        Tensor: (batch, 1) 归一化因子
    """
    probs = ensure_tensor(probs)
    if probs.cols != points.rows:
        raise DimensionError(f"分布长度 {probs.cols} 与星座点数 {points.rows} 不一致")
    squared_norms = ops.sum(ops.mul(points, points), axis=1)
    energy = ops.matmul(probs, squared_norms)
    if np.any(energy.value <= 0):
        raise DegenerateInputError("星座在分布支撑集上的期望能量为零，无法归一化")
    return ops.power(energy, -0.5)


def normalize_tensor(points, dist: Union[SymbolDistribution, Tensor]) -> Tensor:
    """在计算图中归一化星座点（单一分布），返回 (N, 2) 张量"""
    points = ensure_tensor(points)
    probs = dist if isinstance(dist, Tensor) else constant(dist.probs)
    if probs.rows != 1:
        raise DimensionError("normalize 只接受单个分布，批量归一化请使用 energy_scale")
    return ops.mul(points, energy_scale(points, probs))


def normalize(points, dist: SymbolDistribution) -> Constellation:
    """
    按分布把星座归一化为单位平均能量

    Args:
        points: (N, 2) 星座点
        dist: 符号分布

    Returns:
        Constellation: 归一化后的星座
    """
    normalized = normalize_tensor(points, dist)
    return Constellation(normalized.value, trainable=False, distribution=dist)


def qam_grid(order: int) -> np.ndarray:
    """
    未归一化的方形 QAM 网格，电平为奇数

    点的顺序固定为 (实部, 虚部) 字典序，电平从大到小，因此 0 号符号位于第一象限。
    """
    if order not in SUPPORTED_QAM_ORDERS:
        raise UnsupportedOrderError(f"QAM 只支持阶数 {SUPPORTED_QAM_ORDERS}，收到 {order}")
    side = int(round(np.sqrt(order)))
    levels = np.arange(side - 1, -side, -2, dtype=np.float64)
    re, im = np.meshgrid(levels, levels, indexing="ij")
    return np.column_stack([re.reshape(-1), im.reshape(-1)])


def qam(order: int) -> Constellation:
    """均匀分布下归一化的 QAM 星座"""
    return normalize(qam_grid(order), SymbolDistribution.uniform(order))


def psk_points(order: int) -> np.ndarray:
    """单位圆上的 PSK 点，用于没有 QAM 网格的阶数"""
    angles = 2 * np.pi * np.arange(order) / order + (np.pi / order if order > 2 else 0.0)
    return np.column_stack([np.cos(angles), np.sin(angles)])


def initial_points(order: int, rng: np.random.Generator, jitter: float = 0.01) -> np.ndarray:
    """
    可训练星座的初始值: 同阶 QAM 网格（不支持时用 PSK）加高斯抖动
    """
    if order in SUPPORTED_QAM_ORDERS:
        base = qam(order).points
    else:
        base = psk_points(order)
    return base + rng.normal(0.0, jitter, size=base.shape)


def modulate(sample: GumbelSample, c: Union[Constellation, Tensor]) -> Tensor:
    """
    把符号映射为星座点: 前向精确选行，反向按 soft 传播

    Args:
        sample: Gumbel-Softmax 样本
        c: 已归一化的星座（或 (N, 2) 张量）

    Returns:
        Tensor: (batch, 2)
    """
    table = constant(c.points) if isinstance(c, Constellation) else c
    if sample.order != table.rows:
        raise DimensionError(f"样本阶数 {sample.order} 与星座点数 {table.rows} 不一致")
    return straight_through_select(sample, table)


def energy_error(points: np.ndarray, dist: SymbolDistribution) -> float:
    """|Σ p |x|² − 1|，用于检查能量约束"""
    return abs(float(dist.probs @ (np.asarray(points) ** 2).sum(axis=1)) - 1.0)
