"""
可微运算

每个运算返回新的 Tensor，并记录精确的反向函数。输出必须全部有限，否则抛出 NumericalError。
"""

from typing import Optional, Sequence

import numpy as np

from src.errors import DimensionError, NumericalError

from .tensor import Tensor, ensure_tensor

SOFTMAX_FLOOR = np.finfo(np.float64).tiny


def _make(value: np.ndarray, parents: Sequence[Tensor], backward_fn, op: str) -> Tensor:
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"运算 {op} 产生了非有限值")
    requires_grad = any(p.requires_grad for p in parents)
    if not requires_grad:
        return Tensor(value, op=op)
    return Tensor(
        value, requires_grad=True, parents=tuple(parents), backward_fn=backward_fn, op=op
    )


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """把广播后的梯度求和回原始形状"""
    if grad.shape == shape:
        return grad
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    return grad.sum(axis=axes, keepdims=True).reshape(shape)


def _check_broadcast(a: Tensor, b: Tensor, op: str):
    for da, db in zip(a.shape, b.shape):
        if da != db and da != 1 and db != 1:
            raise DimensionError(f"{op}: 形状 {a.shape} 与 {b.shape} 无法广播")


def add(a, b) -> Tensor:
    a, b = ensure_tensor(a), ensure_tensor(b)
    _check_broadcast(a, b, "add")

    def backward_fn(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return _make(a.value + b.value, (a, b), backward_fn, "add")


def sub(a, b) -> Tensor:
    a, b = ensure_tensor(a), ensure_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward_fn(grad):
        return _unbroadcast(grad, a.shape), -_unbroadcast(grad, b.shape)

    return _make(a.value - b.value, (a, b), backward_fn, "sub")


def mul(a, b) -> Tensor:
    a, b = ensure_tensor(a), ensure_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward_fn(grad):
        return _unbroadcast(grad * b.value, a.shape), _unbroadcast(grad * a.value, b.shape)

    return _make(a.value * b.value, (a, b), backward_fn, "mul")


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward_fn(grad):
        return (grad * factor,)

    return _make(a.value * factor, (a,), backward_fn, "scale")


def matmul(a, b) -> Tensor:
    a, b = ensure_tensor(a), ensure_tensor(b)
    if a.cols != b.rows:
        raise DimensionError(f"matmul: {a.shape} 与 {b.shape} 维度不匹配")

    def backward_fn(grad):
        return grad @ b.value.T, a.value.T @ grad

    return _make(a.value @ b.value, (a, b), backward_fn, "matmul")


def power(a: Tensor, exponent: float) -> Tensor:
    exponent = float(exponent)
    out = np.power(a.value, exponent)

    def backward_fn(grad):
        return (grad * exponent * np.power(a.value, exponent - 1.0),)

    return _make(out, (a,), backward_fn, "power")


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.value)

    def backward_fn(grad):
        return (grad * out,)

    return _make(out, (a,), backward_fn, "exp")


def log(a: Tensor, floor: Optional[float] = None) -> Tensor:
    """
    自然对数

    Args:
        a: 输入张量
        floor: 下限截断，低于该值的元素按 floor 取对数且梯度为零

    Returns:
        Tensor: 结果张量，属性 clamped 记录被截断的元素个数
    """
    if floor is None:
        mask = np.ones_like(a.value, dtype=bool)
        safe = a.value
    else:
        mask = a.value > floor
        safe = np.where(mask, a.value, floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(safe)

    def backward_fn(grad):
        return (np.where(mask, grad / safe, 0.0),)

    result = _make(out, (a,), backward_fn, "log")
    result.clamped = int((~mask).sum())
    return result


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0

    def backward_fn(grad):
        return (grad * mask,)

    return _make(np.where(mask, a.value, 0.0), (a,), backward_fn, "relu")


def softmax_rows(values: np.ndarray) -> np.ndarray:
    """按行 softmax（先减去行最大值），下溢的项抬到最小正规数，输出严格为正"""
    shifted = values - values.max(axis=1, keepdims=True)
    e = np.maximum(np.exp(shifted), SOFTMAX_FLOOR)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax_rows(values: np.ndarray) -> np.ndarray:
    shifted = values - values.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(a: Tensor) -> Tensor:
    out = softmax_rows(a.value)

    def backward_fn(grad):
        return (out * (grad - (grad * out).sum(axis=1, keepdims=True)),)

    return _make(out, (a,), backward_fn, "softmax")


def log_softmax(a: Tensor) -> Tensor:
    out = log_softmax_rows(a.value)

    def backward_fn(grad):
        return (grad - np.exp(out) * grad.sum(axis=1, keepdims=True),)

    return _make(out, (a,), backward_fn, "log_softmax")


def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    out = a.value.sum(axis=axis, keepdims=True)

    def backward_fn(grad):
        return (np.broadcast_to(grad, a.shape).copy(),)

    return _make(out, (a,), backward_fn, "sum")


def mean(a: Tensor) -> Tensor:
    return scale(sum(a), 1.0 / a.value.size)


def concat_cols(tensors: Sequence) -> Tensor:
    tensors = [ensure_tensor(t) for t in tensors]
    rows = {t.rows for t in tensors}
    if len(rows) != 1:
        raise DimensionError(f"concat_cols: 行数不一致 {sorted(rows)}")
    bounds = np.cumsum([0] + [t.cols for t in tensors])

    def backward_fn(grad):
        return [grad[:, bounds[i] : bounds[i + 1]] for i in range(len(tensors))]

    return _make(np.hstack([t.value for t in tensors]), tensors, backward_fn, "concat_cols")


def gather_cols(a: Tensor, indices) -> Tensor:
    """逐行取出 a[i, indices[i]]，返回 (batch, 1)"""
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    if indices.shape[0] != a.rows:
        raise DimensionError(f"gather_cols: 索引个数 {indices.shape[0]} 与行数 {a.rows} 不一致")
    if indices.size and (indices.min() < 0 or indices.max() >= a.cols):
        raise DimensionError(f"gather_cols: 索引超出范围 [0, {a.cols})")
    rows = np.arange(a.rows)

    def backward_fn(grad):
        full = np.zeros_like(a.value)
        full[rows, indices] = grad[:, 0]
        return (full,)

    return _make(a.value[rows, indices].reshape(-1, 1), (a,), backward_fn, "gather_cols")


def complex_mul_const(x: Tensor, factor: np.ndarray) -> Tensor:
    """
    把每行 [Re, Im] 视为复数，逐行乘以复常数 factor[i]

    Args:
        x: (batch, 2) 张量
        factor: 长度为 batch 的复数数组（或标量）
    """
    if x.cols != 2:
        raise DimensionError(f"complex_mul_const 需要 2 列输入，实际 {x.cols} 列")
    factor = np.broadcast_to(np.asarray(factor, dtype=np.complex128), (x.rows,))
    fr = factor.real.reshape(-1, 1)
    fi = factor.imag.reshape(-1, 1)
    xr = x.value[:, :1]
    xi = x.value[:, 1:]
    out = np.hstack([fr * xr - fi * xi, fr * xi + fi * xr])

    def backward_fn(grad):
        gr = grad[:, :1]
        gi = grad[:, 1:]
        return (np.hstack([fr * gr + fi * gi, -fi * gr + fr * gi]),)

    return _make(out, (x,), backward_fn, "complex_mul_const")


def straight_through(indices: np.ndarray, soft: Tensor, table: Tensor) -> Tensor:
    """
    直通选择：前向精确取出 table 的行，反向按 soft @ table 传播

    Args:
        indices: 每行被选中的行号（硬独热向量的位置）
        soft: (batch, N) 松弛独热向量
        table: (N, d) 被选择的矩阵
    """
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    if soft.cols != table.rows:
        raise DimensionError(f"straight_through: soft 为 {soft.shape}, 表为 {table.shape}")
    if indices.shape[0] != soft.rows:
        raise DimensionError("straight_through: 索引个数与批大小不一致")
    if indices.size and (indices.min() < 0 or indices.max() >= table.rows):
        raise DimensionError(f"straight_through: 符号索引超出范围 [0, {table.rows})")

    def backward_fn(grad):
        return grad @ table.value.T, soft.value.T @ grad

    return _make(table.value[indices].copy(), (soft, table), backward_fn, "straight_through")
