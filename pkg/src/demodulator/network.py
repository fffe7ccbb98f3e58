"""
解调网络

以 SNR 为条件的后验网络 p̃(s|y)，输入行为 [Re(y), Im(y), snr_db]。
"""

from typing import Dict, List

import numpy as np

from src.autodiff import Activation, DenseLayer, Parameter, Tensor, constant, ensure_tensor, ops
from src.shaping import SymbolDistribution


class DemodNetwork:
    """三层全连接网络: 3 -> hidden (relu) -> hidden (relu) -> N (softmax)"""

    def __init__(self, order: int, rng: np.random.Generator, hidden_units: int = 128):
        self.order = order
        self.layer1 = DenseLayer(3, hidden_units, Activation.RELU, rng, name="demod.layer1")
        self.layer2 = DenseLayer(
            hidden_units, hidden_units, Activation.RELU, rng, name="demod.layer2"
        )
        self.layer3 = DenseLayer(hidden_units, order, Activation.SOFTMAX, rng, name="demod.layer3")

    def __repr__(self):
        return f"DemodNetwork(N={self.order}, hidden={self.layer1.weights.cols})"

    def forward(self, y, snr_db) -> Tensor:
        """
        计算后验

        Args:
            y: (batch, 2) 接收信号（Tensor 时可对 y 求导）
            snr_db: 标量或长度为 batch 的 SNR（dB），不做缩放直接输入

        Returns:
            Tensor: (batch, N) 后验概率
        """
        y = ensure_tensor(y)
        snr_column = np.broadcast_to(np.asarray(snr_db, dtype=np.float64), (y.rows,))
        inputs = ops.concat_cols([y, constant(snr_column.reshape(-1, 1))])
        return self.layer3(self.layer2(self.layer1(inputs)))

    __call__ = forward

    def predict(self, y: np.ndarray, snr_db) -> np.ndarray:
        """不记录梯度的批量推断，返回 (batch, N) 数组"""
        return self.forward(constant(np.asarray(y, dtype=np.float64).reshape(-1, 2)), snr_db).value

    def parameters(self) -> List[Parameter]:
        return self.layer1.parameters() + self.layer2.parameters() + self.layer3.parameters()

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}


def posterior(net: DemodNetwork, y, snr_db: float) -> SymbolDistribution:
    """单个接收样本的后验分布"""
    probs = net.predict(np.asarray(y, dtype=np.float64).reshape(1, 2), snr_db)[0]
    return SymbolDistribution(probs / probs.sum())
