"""
Adam 优化器
"""

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from src.errors import InvalidArgumentError

from .tensor import Parameter


@dataclass(frozen=True)
class AdamConfig:
    """Adam 超参数"""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgumentError(f"learning_rate 必须为正数: {self.learning_rate}")
        if not 0 < self.beta1 < 1 or not 0 < self.beta2 < 1:
            raise InvalidArgumentError(f"beta 必须位于 (0,1): {self.beta1}, {self.beta2}")
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon 必须为正数: {self.epsilon}")


def adam_step(params: Iterable[Parameter], cfg: AdamConfig) -> None:
    """
    执行一步带偏差修正的 Adam 更新

    只修改参数值和 Adam 状态，不清零梯度（由调用方负责）。
    """
    for param in params:
        param.step_count += 1
        t = param.step_count
        param.adam_m = cfg.beta1 * param.adam_m + (1.0 - cfg.beta1) * param.grad
        param.adam_v = cfg.beta2 * param.adam_v + (1.0 - cfg.beta2) * param.grad**2
        m_hat = param.adam_m / (1.0 - cfg.beta1**t)
        v_hat = param.adam_v / (1.0 - cfg.beta2**t)
        param.value = param.value - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)


def zero_grad(params: Iterable[Parameter]) -> None:
    for param in params:
        param.zero_grad()
