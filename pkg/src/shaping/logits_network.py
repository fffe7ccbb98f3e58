"""
SNR 条件的 logits 网络

输入 SNR（dB），输出 N 个符号的 logits，从而得到随 SNR 连续变化的整形分布。
"""

from typing import Dict, List, Sequence

import numpy as np

from src.autodiff import Activation, DenseLayer, Parameter, Tensor, constant

from .distribution import SymbolDistribution, logits_to_distribution

DEFAULT_SNR_RANGE_DB = (-2.0, 40.0)


class LogitsNetwork:
    """两层全连接网络: 1 -> hidden (relu) -> N (linear)"""

    def __init__(
        self,
        order: int,
        rng: np.random.Generator,
        hidden_units: int = 128,
        snr_range_db: Sequence[float] = DEFAULT_SNR_RANGE_DB,
    ):
        """
        初始化 logits 网络

        输入只有一维 SNR，隐藏单元 relu(w·snr + b) 的折点位于 −b/w。偏置按折点在
        snr_range_db 内均匀分布来设置；输出层权重置零，初始分布在所有 SNR 下都是均匀分布。

        Args:
            order: 符号个数 N
            rng: 随机数生成器
            hidden_units: 隐藏单元数
            snr_range_db: 训练的 SNR 范围（dB），决定折点的分布
        """
        self.order = order
        self.layer1 = DenseLayer(1, hidden_units, Activation.RELU, rng, name="logits.layer1")
        self.layer2 = DenseLayer(hidden_units, order, Activation.LINEAR, rng, name="logits.layer2")
        low, high = snr_range_db
        kinks = rng.uniform(low, high, size=(1, hidden_units))
        self.layer1.bias.assign(-self.layer1.weights.value * kinks)
        self.layer2.weights.assign(np.zeros((hidden_units, order)))

    def __repr__(self):
        return f"LogitsNetwork(N={self.order}, hidden={self.layer1.weights.cols})"

    def forward(self, snr_db) -> Tensor:
        """
        计算 logits

        Args:
            snr_db: 标量或长度为 batch 的 SNR（dB）

        Returns:
            Tensor: (batch, N) logits
        """
        snr_column = constant(np.asarray(snr_db, dtype=np.float64).reshape(-1, 1))
        return self.layer2(self.layer1(snr_column))

    __call__ = forward

    def distribution(self, snr_db: float) -> SymbolDistribution:
        """给定 SNR 下的符号分布"""
        return logits_to_distribution(self.forward(snr_db).value[0])

    def parameters(self) -> List[Parameter]:
        return self.layer1.parameters() + self.layer2.parameters()

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}
