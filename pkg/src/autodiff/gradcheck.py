"""
有限差分梯度检查

测试和 check 命令共用。
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .tensor import Parameter, Tensor, backward


@dataclass
class GradCheckResult:
    """梯度检查结果"""

    max_relative_error: float
    checked_entries: int

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_relative_error < tolerance


def relative_error(analytic: float, numeric: float, floor: float = 1e-5) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def finite_difference_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    h: float = 1e-5,
    max_entries_per_param: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> GradCheckResult:
    """
    用中心差分验证反向传播得到的梯度

    Args:
        loss_fn: 每次调用都重新执行前向计算并返回标量损失
        params: 需要检查的参数
        h: 差分步长
        max_entries_per_param: 每个参数最多抽查的元素个数，None 表示全部
        rng: 抽查元素时使用的随机数生成器

    Returns:
        GradCheckResult: 最大相对误差
    """
    rng = rng or np.random.default_rng(0)
    for param in params:
        param.zero_grad()
    backward(loss_fn())
    analytic = [param.grad.copy() for param in params]

    worst = 0.0
    checked = 0
    for param, grad in zip(params, analytic):
        flat_indices: List[int] = list(range(param.value.size))
        if max_entries_per_param is not None and len(flat_indices) > max_entries_per_param:
            flat_indices = list(rng.choice(param.value.size, max_entries_per_param, replace=False))
        for flat in flat_indices:
            idx = np.unravel_index(flat, param.value.shape)
            original = param.value[idx]
            param.value[idx] = original + h
            plus = loss_fn().item()
            param.value[idx] = original - h
            minus = loss_fn().item()
            param.value[idx] = original
            numeric = (plus - minus) / (2.0 * h)
            worst = max(worst, relative_error(float(grad[idx]), numeric))
            checked += 1

    for param in params:
        param.zero_grad()
    return GradCheckResult(max_relative_error=worst, checked_entries=checked)


def random_projection_loss(output_fn: Callable[[], Tensor], seed: int = 0) -> Callable[[], Tensor]:
    """把任意输出变成标量损失 sum(output * R)，R 为固定的随机矩阵"""
    from . import ops

    cache = {}

    def loss_fn() -> Tensor:
        out = output_fn()
        if "weights" not in cache:
            cache["weights"] = np.random.default_rng(seed).normal(size=out.shape)
        return ops.sum(ops.mul(out, cache["weights"]))

    return loss_fn
