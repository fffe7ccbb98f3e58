"""
AWGN 信道
"""

import numpy as np

from src.autodiff import Tensor, ensure_tensor, ops

from .models import SnrLike, noise_variance_array


def draw_awgn_noise(
    batch: int, noise_variance: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """
    复圆对称高斯噪声，每个分量方差 σ²/2

    Args:
        batch: 样本个数
        noise_variance: 每个样本的复噪声总方差 σ²
        rng: 随机数生成器

    Returns:
        np.ndarray: (batch, 2) 噪声的实部与虚部
    """
    std = np.sqrt(np.asarray(noise_variance, dtype=np.float64) / 2.0).reshape(-1, 1)
    return rng.normal(0.0, 1.0, size=(batch, 2)) * std


def awgn_transmit(x, snr: SnrLike, rng: np.random.Generator) -> Tensor:
    """
    y = x + n，对 x 可导

    Args:
        x: (batch, 2) 发送符号
        snr: SnrPoint、dB 标量或逐样本 dB 数组
        rng: 随机数生成器

    Returns:
        Tensor: (batch, 2) 接收信号
    """
    x = ensure_tensor(x)
    variance = noise_variance_array(snr, x.rows)
    return ops.add(x, draw_awgn_noise(x.rows, variance, rng))
