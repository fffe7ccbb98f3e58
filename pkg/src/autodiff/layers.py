"""
全连接层
"""

from enum import Enum
from typing import List

import numpy as np

from src.errors import DimensionError

from . import ops
from .tensor import Parameter, Tensor, ensure_tensor


class Activation(str, Enum):
    """激活函数"""

    RELU = "relu"
    LINEAR = "linear"
    SOFTMAX = "softmax"


class DenseLayer:
    """全连接层: activation(input · W + b)"""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        activation: Activation,
        rng: np.random.Generator,
        name: str = "dense",
    ):
        """
        初始化全连接层，权重使用 Glorot 均匀分布，偏置为零

        Args:
            in_dim: 输入维度
            out_dim: 输出维度
            activation: 激活函数
            rng: 随机数生成器（决定初始化结果）
            name: 参数名前缀
        """
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        self.weights = Parameter(
            rng.uniform(-limit, limit, size=(in_dim, out_dim)), f"{name}.weights"
        )
        self.bias = Parameter(np.zeros((1, out_dim)), f"{name}.bias")
        self.activation = Activation(activation)
        self.name = name

    def __repr__(self):
        return (
            f"DenseLayer(name={self.name}, {self.weights.rows}->{self.weights.cols}, "
            f"activation={self.activation.value})"
        )

    def forward(self, inputs) -> Tensor:
        inputs = ensure_tensor(inputs)
        if inputs.cols != self.weights.rows:
            raise DimensionError(
                f"{self.name}: 输入列数 {inputs.cols} 与权重行数 {self.weights.rows} 不一致"
            )
        z = ops.add(ops.matmul(inputs, self.weights), self.bias)
        if self.activation == Activation.RELU:
            return ops.relu(z)
        if self.activation == Activation.SOFTMAX:
            return ops.softmax(z)
        return z

    __call__ = forward

    def parameters(self) -> List[Parameter]:
        return [self.weights, self.bias]


def dense_forward(layer: DenseLayer, inputs) -> Tensor:
    return layer.forward(inputs)
