"""
互信息参照

AWGN 信道用二维 Gauss-Hermite 求积精确计算 I(X;Y)；Rayleigh 信道用蒙特卡洛，
在抽到的 (h, ĥ) 条件下使用均衡信道的已知条件密度。
"""

import math
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp

from src.channel import ChannelKind, ChannelModel, SnrPoint, draw_awgn_noise, draw_fading
from src.demodulator import log_posterior_batch
from src.errors import InvalidArgumentError, UnsupportedChannelError, UnsupportedOrderError
from src.modulation import Constellation
from src.shaping import SymbolDistribution

from .losses import NATS_TO_BITS

MIN_QUADRATURE_NODES = 40
MAX_ORACLE_ORDER = 1024
MIN_MC_SAMPLES = 100_000
MC_CHUNK = 100_000
# 每个求积块中 (符号 × 节点² × N) 元素个数的上限
QUADRATURE_CHUNK_ELEMENTS = 2_000_000


def _support(dist: SymbolDistribution) -> np.ndarray:
    return np.flatnonzero(dist.probs > 0)


def mi_oracle_quadrature(
    c: Constellation,
    dist: SymbolDistribution,
    snr: SnrPoint,
    nodes: int = MIN_QUADRATURE_NODES,
    channel: Optional[ChannelModel] = None,
) -> float:
    """
    AWGN 信道下 (星座, 分布) 的互信息（比特）

    对每个发送点 x_s，令 y = x_s + n、n = σ·(t_i, t_k)，求积权重为 w_i·w_k/π：
    I = Σ_s p_s Σ_ik (w_i w_k / π) [log p(y|x_s) − log Σ_j p_j p(y|x_j)]。

    Args:
        c: 星座（按给定点计算，不再归一化）
        dist: 符号分布
        snr: SNR，+inf 时结果为 H(S)
        nodes: 每个维度的求积节点数（≥ 40）
        channel: 信道模型，只接受 AWGN

    Returns:
        float: 互信息（比特）
    """
    if channel is not None and channel.kind != ChannelKind.AWGN:
        raise UnsupportedChannelError("求积参照只支持 AWGN 信道，请使用 mi_oracle_monte_carlo")
    if c.order > MAX_ORACLE_ORDER:
        raise UnsupportedOrderError(f"求积参照最多支持 N = {MAX_ORACLE_ORDER}，收到 {c.order}")
    if c.order != dist.order:
        raise InvalidArgumentError(f"星座点数 {c.order} 与分布长度 {dist.order} 不一致")
    if nodes < MIN_QUADRATURE_NODES:
        raise InvalidArgumentError(f"求积节点数至少为 {MIN_QUADRATURE_NODES}，收到 {nodes}")

    entropy = dist.entropy_bits()
    variance = snr.noise_variance
    if variance == 0:
        return entropy

    t, w = hermgauss(nodes)
    tr, ti = np.meshgrid(t, t, indexing="ij")
    offsets = np.sqrt(variance) * np.column_stack([tr.reshape(-1), ti.reshape(-1)])
    weights = np.outer(w, w).reshape(-1) / math.pi
    own = -(offsets**2).sum(axis=1) / variance

    support = _support(dist)
    points = c.points
    with np.errstate(divide="ignore"):
        log_prior = np.log(dist.probs)
    chunk = max(1, QUADRATURE_CHUNK_ELEMENTS // (offsets.shape[0] * c.order))

    total = 0.0
    for start in range(0, support.size, chunk):
        rows = support[start : start + chunk]
        # y: (chunk, nodes², 2)
        y = points[rows, None, :] + offsets[None, :, :]
        distances = ((y[:, :, None, :] - points[None, None, :, :]) ** 2).sum(axis=3)
        mixture = logsumexp(log_prior[None, None, :] - distances / variance, axis=2)
        density = (own[None, :] - mixture) @ weights
        total += float(dist.probs[rows] @ density)

    mi = total * NATS_TO_BITS
    return float(min(max(mi, 0.0), entropy))


def _log_posterior_faded(
    points: np.ndarray,
    log_prior: np.ndarray,
    y: np.ndarray,
    gain: np.ndarray,
    variance: np.ndarray,
) -> np.ndarray:
    """均衡后 y = g·x + n'，n' ~ CN(0, v)，逐样本的 log p(s|y)"""
    cpoints = points[:, 0] + 1j * points[:, 1]
    cy = y[:, 0] + 1j * y[:, 1]
    distances = np.abs(cy[:, None] - gain[:, None] * cpoints[None, :]) ** 2
    result = np.empty_like(distances)
    noisy = variance > 0
    if np.any(noisy):
        scores = log_prior[None, :] - distances[noisy] / variance[noisy, None]
        result[noisy] = scores - logsumexp(scores, axis=1, keepdims=True)
    if np.any(~noisy):
        masked = np.where(np.isfinite(log_prior)[None, :], distances[~noisy], np.inf)
        hard = np.full(masked.shape, -np.inf)
        hard[np.arange(hard.shape[0]), np.argmin(masked, axis=1)] = 0.0
        result[~noisy] = hard
    return result


def information_density(
    c: Constellation,
    dist: SymbolDistribution,
    channel: ChannelModel,
    snr: SnrPoint,
    samples: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    抽取一块样本并计算 log p(s|y)

    Returns:
        Tuple: (symbols, received, log_posterior)，其中 received 是均衡后的接收信号
    """
    symbols = rng.choice(dist.order, size=samples, p=dist.probs)
    x = c.points[symbols]
    with np.errstate(divide="ignore"):
        log_prior = np.log(dist.probs)

    if channel.kind == ChannelKind.AWGN:
        variance = snr.noise_variance
        y = x + draw_awgn_noise(samples, np.full(samples, variance), rng)
        return symbols, y, log_posterior_batch(c.points, dist.probs, y, variance)

    realization = draw_fading(samples, snr, rng, pilot_count=channel.pilot_count)
    gain = realization.gain
    noise = realization.equalized_noise
    faded = gain * (x[:, 0] + 1j * x[:, 1]) + noise
    y = np.column_stack([faded.real, faded.imag])
    log_post = _log_posterior_faded(
        c.points, log_prior, y, gain, realization.equalized_noise_variance
    )
    return symbols, y, log_post


def mi_oracle_monte_carlo(
    c: Constellation,
    dist: SymbolDistribution,
    channel: ChannelModel,
    snr: SnrPoint,
    samples: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """
    互信息的蒙特卡洛估计

    信息密度 i = log p(s|y) − log p(s) 的样本均值，标准误差为 std(i)/√samples。

    Args:
        c: 星座
        dist: 符号分布
        channel: 信道模型
        snr: SNR
        samples: 样本数（≥ 1e5）
        rng: 随机数生成器

    Returns:
        Tuple[float, float]: (互信息, 标准误差)，单位比特
    """
    if samples < MIN_MC_SAMPLES:
        raise InvalidArgumentError(f"蒙特卡洛样本数至少为 {MIN_MC_SAMPLES}，收到 {samples}")
    if c.order != dist.order:
        raise InvalidArgumentError(f"星座点数 {c.order} 与分布长度 {dist.order} 不一致")

    log_prior = np.log(np.where(dist.probs > 0, dist.probs, 1.0))
    total = 0.0
    total_sq = 0.0
    drawn = 0
    while drawn < samples:
        size = min(MC_CHUNK, samples - drawn)
        symbols, _, log_post = information_density(c, dist, channel, snr, size, rng)
        density = (log_post[np.arange(size), symbols] - log_prior[symbols]) * NATS_TO_BITS
        total += float(density.sum())
        total_sq += float((density**2).sum())
        drawn += size

    mean = total / samples
    variance = max(total_sq / samples - mean**2, 0.0) * samples / (samples - 1)
    std_error = math.sqrt(variance / samples)
    logger.debug(f"蒙特卡洛互信息 {snr}: {mean:.5f} ± {std_error:.5f} bit ({samples} 样本)")
    return mean, std_error


def mi_oracle(
    c: Constellation,
    dist: SymbolDistribution,
    channel: ChannelModel,
    snr: SnrPoint,
    mc_samples: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """按信道类型选择参照: AWGN 用求积（标准误差记为 0），其他信道用蒙特卡洛"""
    if channel.kind == ChannelKind.AWGN:
        return mi_oracle_quadrature(c, dist, snr), 0.0
    return mi_oracle_monte_carlo(c, dist, channel, snr, mc_samples, rng)
