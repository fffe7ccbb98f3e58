"""
Gumbel 采样

Gumbel-Max 精确采样离散分布；Gumbel-Softmax 给出温度为 τ 的松弛独热向量，
配合直通估计：前向使用真正的独热向量，反向按松弛向量传播梯度。
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from src.autodiff import Tensor, ensure_tensor, ops
from src.errors import InvalidArgumentError

from .distribution import SymbolDistribution

UNIFORM_CLAMP = 1e-12


@dataclass
class GumbelSample:
    """
    一批 Gumbel-Softmax 样本，每行对应一次抽样

    hard_onehot 与 symbol_index 给出 Gumbel-Max 的精确样本，soft 是可求导的松弛向量。
    """

    hard_onehot: np.ndarray
    soft: Tensor
    symbol_index: np.ndarray

    @property
    def batch_size(self) -> int:
        return self.hard_onehot.shape[0]

    @property
    def order(self) -> int:
        return self.hard_onehot.shape[1]


def sample_gumbel(shape: Union[int, Tuple[int, ...]], rng: np.random.Generator) -> np.ndarray:
    """标准 Gumbel 噪声 −log(−log u)，u 截断在 [1e-12, 1−1e-12]"""
    u = rng.uniform(0.0, 1.0, size=shape)
    u = np.clip(u, UNIFORM_CLAMP, 1.0 - UNIFORM_CLAMP)
    return -np.log(-np.log(u))


def _argmax_rows(values: np.ndarray) -> np.ndarray:
    # np.argmax 在并列时取最小下标
    return np.argmax(values, axis=-1)


def sample_gumbel_max(
    dist: SymbolDistribution, rng: np.random.Generator, size: Optional[int] = None
):
    """
    Gumbel-Max 采样: argmax(g_i + log p_i)

    Args:
        dist: 目标分布
        rng: 随机数生成器
        size: 样本个数，None 时返回单个下标

    Returns:
        int 或 np.ndarray: 符号下标
    """
    with np.errstate(divide="ignore"):
        log_p = np.log(dist.probs)
    if size is None:
        return int(_argmax_rows(sample_gumbel(dist.order, rng) + log_p))
    return _argmax_rows(sample_gumbel((size, dist.order), rng) + log_p)


def gumbel_softmax(logits, gumbels, tau: float) -> GumbelSample:
    """
    Gumbel-Softmax

    soft_i = softmax((g_i + log p_i) / τ)，在对数域计算；hard 为 argmax(g + log p) 的独热向量。

    Args:
        logits: (batch, N) 或长度 N 的 logits（Tensor 时梯度经 soft 回传）
        gumbels: 与 logits 同形状的 Gumbel 噪声
        tau: 温度，必须为正

    Returns:
        GumbelSample: 采样结果
    """
    if not tau > 0:
        raise InvalidArgumentError(f"温度 tau 必须为正数: {tau}")
    logits = ensure_tensor(logits)
    gumbels = np.asarray(gumbels, dtype=np.float64).reshape(logits.shape)

    log_p = ops.log_softmax(logits)
    perturbed = ops.add(log_p, gumbels)
    soft = ops.softmax(ops.scale(perturbed, 1.0 / tau))

    index = _argmax_rows(perturbed.value)
    hard = np.zeros_like(perturbed.value)
    hard[np.arange(hard.shape[0]), index] = 1.0
    return GumbelSample(hard_onehot=hard, soft=soft, symbol_index=index)


def straight_through_select(sample: GumbelSample, constellation_matrix) -> Tensor:
    """
    直通选择星座点

    前向结果是 hard_onehot · C（精确的一行），反向按 soft · C 传播，
    梯度按 soft 权重分配到 C 的每一行，并经 soft 传回 logits。

    Args:
        sample: Gumbel-Softmax 样本
        constellation_matrix: (N, 2) 星座矩阵

    Returns:
        Tensor: (batch, 2) 选中的星座点
    """
    table = ensure_tensor(constellation_matrix)
    return ops.straight_through(sample.symbol_index, sample.soft, table)
