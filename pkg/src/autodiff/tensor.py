"""
张量与参数

所有可训练部分（分布网络、调制矩阵、解调网络）共用的最小反向模式自动微分基础。
张量固定为二维、64 位浮点。
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.errors import DimensionError, GraphStateError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def as_matrix(value) -> np.ndarray:
    """把标量、向量或矩阵统一成二维 float64 数组（向量视为单行）"""
    array = np.asarray(value, dtype=np.float64)
    if array.ndim == 0:
        return array.reshape(1, 1)
    if array.ndim == 1:
        return array.reshape(1, -1)
    if array.ndim != 2:
        raise DimensionError(f"只支持二维张量，收到 {array.ndim} 维")
    return array


class Tensor:
    """计算图中的节点"""

    def __init__(
        self,
        value,
        requires_grad: bool = False,
        parents: Tuple["Tensor", ...] = (),
        backward_fn: Optional[BackwardFn] = None,
        op: str = "leaf",
    ):
        self.value = as_matrix(value)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.op = op
        self._parents = parents
        self._backward_fn = backward_fn
        self._released = False

    @property
    def rows(self) -> int:
        return self.value.shape[0]

    @property
    def cols(self) -> int:
        return self.value.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.value.shape

    @property
    def is_leaf(self) -> bool:
        return self._backward_fn is None

    def item(self) -> float:
        if self.value.size != 1:
            raise DimensionError(f"item() 需要 1x1 张量，实际形状 {self.shape}")
        return float(self.value[0, 0])

    def numpy(self) -> np.ndarray:
        return self.value.copy()

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    # 运算符重载，实现在 ops 模块中
    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)

    def __neg__(self):
        from . import ops

        return ops.scale(self, -1.0)


class Parameter(Tensor):
    """可训练参数，同时保存梯度和 Adam 状态"""

    def __init__(self, value, name: str = ""):
        super().__init__(value, requires_grad=True, op="parameter")
        self.name = name
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)
        self.step_count = 0

    def zero_grad(self):
        self.grad = np.zeros_like(self.value)

    def assign(self, value):
        """覆盖参数值（用于加载检查点），形状必须一致"""
        array = as_matrix(value)
        if array.shape != self.value.shape:
            raise DimensionError(
                f"参数 {self.name} 形状不匹配: 期望 {self.value.shape}, 实际 {array.shape}"
            )
        self.value = array.copy()

    def __repr__(self):
        return f"Parameter(name={self.name}, shape={self.shape}, step_count={self.step_count})"


def constant(value) -> Tensor:
    """不参与求导的常量张量"""
    return Tensor(value, requires_grad=False, op="constant")


def ensure_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else constant(value)


def _topological_order(root: Tensor):
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    从标量损失反向传播

    所有可达的 Parameter 的 grad 会累加 ∂loss/∂value；不可达的参数梯度保持不变。
    反向传播结束后释放计算图，同一个损失不能反向两次。

    Args:
        loss: 1x1 的损失张量
    """
    if not isinstance(loss, Tensor):
        raise GraphStateError(f"backward 需要 Tensor，收到 {type(loss).__name__}")
    if loss._released:
        raise GraphStateError("该损失的前向记录已被释放，需要重新执行前向计算")
    if loss.value.size != 1:
        raise DimensionError(f"backward 需要标量损失，实际形状 {loss.shape}")

    order = _topological_order(loss)
    grads = {id(loss): np.ones_like(loss.value)}

    for node in reversed(order):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if isinstance(node, Parameter):
            node.grad = node.grad + grad
        elif node.requires_grad:
            node.grad = grad
        if node._backward_fn is None:
            continue
        parent_grads = node._backward_fn(grad)
        for parent, parent_grad in zip(node._parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad

    for node in order:
        if not node.is_leaf:
            node._released = True
            node._parents = ()
            node._backward_fn = None
