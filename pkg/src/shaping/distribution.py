"""
符号分布

概率整形的对象: N 个符号上的概率向量。
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.autodiff import Tensor, ops
from src.autodiff.ops import softmax_rows
from src.errors import InvalidArgumentError

PROB_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SymbolDistribution:
    """符号概率分布 p(s)"""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if probs.size == 0:
            raise InvalidArgumentError("分布至少需要一个符号")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidArgumentError("分布的概率必须为有限非负数")
        if abs(probs.sum() - 1.0) > PROB_TOLERANCE:
            raise InvalidArgumentError(f"分布概率之和为 {probs.sum():.12f}，应为 1")
        object.__setattr__(self, "probs", probs)

    @property
    def order(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, order: int) -> "SymbolDistribution":
        return cls(np.full(order, 1.0 / order))

    def entropy_bits(self) -> float:
        return distribution_entropy(self)

    def to_rows(self) -> List[Tuple[int, float]]:
        """导出为 (symbol, prob) 行"""
        return [(i, float(p)) for i, p in enumerate(self.probs)]

    def __repr__(self):
        return f"SymbolDistribution(N={self.order}, H={self.entropy_bits():.4f} bit)"


def logits_to_distribution(logits) -> SymbolDistribution:
    """对 logits 做 softmax 得到分布"""
    logits = np.asarray(logits, dtype=np.float64).reshape(1, -1)
    if not np.all(np.isfinite(logits)):
        raise InvalidArgumentError("logits 必须为有限值")
    probs = softmax_rows(logits)[0]
    return SymbolDistribution(probs / probs.sum())


def distribution_entropy(dist: SymbolDistribution) -> float:
    """熵 −Σ p log2 p（比特），约定 0·log0 = 0"""
    p = dist.probs[dist.probs > 0]
    return float(-(p * np.log2(p)).sum())


def entropy_of_logits(logits: Tensor) -> Tensor:
    """
    逐行计算 softmax(logits) 的熵（奈特），可对 logits 求导

    Returns:
        Tensor: (batch, 1)
    """
    log_p = ops.log_softmax(logits)
    p = ops.softmax(logits)
    return ops.scale(ops.sum(ops.mul(p, log_p), axis=1), -1.0)
