"""
损失函数

内部用自然对数计算，nats_to_bits 是唯一的单位转换点；所有对外的损失都以比特为单位。
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from loguru import logger

from src.autodiff import Tensor, constant, ops
from src.errors import InvalidArgumentError
from src.shaping import SymbolDistribution, entropy_of_logits

from .models import LossBreakdown

NATS_TO_BITS = 1.0 / math.log(2.0)
POSTERIOR_FLOOR = 1e-30


def nats_to_bits(value: Union[Tensor, float, np.ndarray]):
    if isinstance(value, Tensor):
        return ops.scale(value, NATS_TO_BITS)
    return value * NATS_TO_BITS


class ClampCounter:
    """记录后验在真实符号处被截断的次数"""

    def __init__(self):
        self.count = 0

    def add(self, clamped: int):
        if clamped:
            self.count += clamped
            logger.warning(f"后验概率低于 {POSTERIOR_FLOOR}，已截断 {clamped} 个样本（累计 {self.count}）")


def cross_entropy_loss(
    symbols, posteriors: Tensor, clamp_counter: Optional[ClampCounter] = None
) -> Tensor:
    """
    分类交叉熵 L = mean(−log2 p̃(s|y))

    Args:
        symbols: 每个样本的真实符号下标
        posteriors: (batch, N) 解调后验
        clamp_counter: 截断计数器

    Returns:
        Tensor: 1x1，比特
    """
    symbols = np.asarray(symbols, dtype=np.int64).reshape(-1)
    if symbols.size == 0:
        raise InvalidArgumentError("交叉熵需要非空批次")
    picked = ops.gather_cols(posteriors, symbols)
    log_p = ops.log(picked, floor=POSTERIOR_FLOOR)
    if clamp_counter is not None:
        clamp_counter.add(log_p.clamped)
    return nats_to_bits(ops.scale(ops.mean(log_p), -1.0))


def source_entropy(source: Union[Tensor, SymbolDistribution]) -> Tensor:
    """
    H(S)（比特），由分布本身解析计算

    Args:
        source: 逐样本的 logits 张量 (batch, N)（取批平均），或固定分布

    Returns:
        Tensor: 1x1
    """
    if isinstance(source, SymbolDistribution):
        return constant(source.entropy_bits())
    return nats_to_bits(ops.mean(entropy_of_logits(source)))


@dataclass
class CorrectedLoss:
    """修正损失的各项（张量形式，可反向传播）"""

    cross_entropy: Tensor
    entropy: Tensor
    corrected: Tensor

    @property
    def breakdown(self) -> LossBreakdown:
        return LossBreakdown(self.cross_entropy.item(), self.entropy.item())


def corrected_loss(
    symbols,
    posteriors: Tensor,
    source: Union[Tensor, SymbolDistribution],
    clamp_counter: Optional[ClampCounter] = None,
) -> CorrectedLoss:
    """
    修正损失 L̂ = L − H(S)

    熵项对分布参数可导，正是它阻止了训练把源熵压低。

    Args:
        symbols: 真实符号下标
        posteriors: (batch, N) 解调后验
        source: 当前批次 SNR 下的分布 logits（或固定分布）
        clamp_counter: 截断计数器

    Returns:
        CorrectedLoss: L、H 与 L̂
    """
    ce = cross_entropy_loss(symbols, posteriors, clamp_counter)
    entropy = source_entropy(source)
    return CorrectedLoss(cross_entropy=ce, entropy=entropy, corrected=ops.sub(ce, entropy))
