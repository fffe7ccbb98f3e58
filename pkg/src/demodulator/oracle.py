"""
精确后验

AWGN 信道下 p(s|y) ∝ p(s)·exp(−|y − x_s|²/σ²)，在对数域归一化。
用作测试与评估中解调网络的参照。
"""

from typing import Union

import numpy as np
from scipy.special import logsumexp

from src.channel import SnrPoint
from src.modulation import Constellation
from src.shaping import SymbolDistribution


def log_posterior_batch(
    points: np.ndarray, probs: np.ndarray, y: np.ndarray, noise_variance: Union[float, np.ndarray]
) -> np.ndarray:
    """
    批量计算精确后验的对数

    Args:
        points: (N, 2) 星座点（若信道有增益，传入 gain·x 之后的点需由调用方处理）
        probs: (N,) 先验
        y: (batch, 2) 接收信号
        noise_variance: 复噪声方差 σ²，标量或长度 batch

    Returns:
        np.ndarray: (batch, N) log p(s|y)
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1, 2)
    variance = np.broadcast_to(np.asarray(noise_variance, dtype=np.float64), (y.shape[0],))
    distances = ((y[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    with np.errstate(divide="ignore"):
        log_prior = np.log(probs)[None, :]

    noiseless = variance == 0
    result = np.empty_like(distances)
    if np.any(~noiseless):
        scores = log_prior - distances[~noiseless] / variance[~noiseless, None]
        result[~noiseless] = scores - logsumexp(scores, axis=1, keepdims=True)
    if np.any(noiseless):
        # σ → 0: 后验退化为最近点（只在先验支撑集内）
        masked = np.where(np.isfinite(log_prior), distances[noiseless], np.inf)
        nearest = np.argmin(masked, axis=1)
        hard = np.full(masked.shape, -np.inf)
        hard[np.arange(hard.shape[0]), nearest] = 0.0
        result[noiseless] = hard
    return result


def posterior_batch(
    points: np.ndarray, probs: np.ndarray, y: np.ndarray, noise_variance
) -> np.ndarray:
    return np.exp(log_posterior_batch(points, probs, y, noise_variance))


def exact_posterior_oracle(
    c: Constellation, dist: SymbolDistribution, y, snr: SnrPoint
) -> SymbolDistribution:
    """
    单个接收样本的精确后验

    Args:
        c: 星座
        dist: 先验分布
        y: 接收信号 (Re, Im)
        snr: SNR

    Returns:
        SymbolDistribution: p(s|y)
    """
    probs = posterior_batch(c.points, dist.probs, np.asarray(y).reshape(1, 2), snr.noise_variance)
    return SymbolDistribution(probs[0] / probs[0].sum())


class OracleDemodulator:
    """把精确后验包装成与解调网络相同的 predict 接口"""

    def __init__(self, c: Constellation, dist: SymbolDistribution):
        self.points = c.points
        self.probs = dist.probs
        self.order = c.order

    def predict(self, y: np.ndarray, snr_db) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).reshape(-1, 2)
        snr_db = np.broadcast_to(np.asarray(snr_db, dtype=np.float64), (y.shape[0],))
        with np.errstate(divide="ignore", over="ignore"):
            variance = 1.0 / np.power(10.0, snr_db / 10.0)
        return posterior_batch(self.points, self.probs, y, variance)


class UniformDemodulator:
    """输出恒为均匀分布的解调器"""

    def __init__(self, order: int):
        self.order = order

    def predict(self, y: np.ndarray, snr_db) -> np.ndarray:
        batch = np.asarray(y).reshape(-1, 2).shape[0]
        return np.full((batch, self.order), 1.0 / self.order)
