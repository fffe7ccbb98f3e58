"""
信道数据模型
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from src.errors import InvalidArgumentError


class ChannelKind(str, Enum):
    """信道类型"""

    AWGN = "awgn"
    RAYLEIGH_LMMSE = "rayleigh_lmmse"


@dataclass(frozen=True)
class SnrPoint:
    """
    SNR 点

    SNR 定义为单位信号能量与复噪声总方差之比，snr_db = +inf 表示无噪声信道。
    """

    snr_db: float

    @property
    def snr_linear(self) -> float:
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return math.inf
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_variance(self) -> float:
        """复噪声总方差 σ² = 1/snr_linear（每个分量 σ²/2）"""
        return 1.0 / self.snr_linear

    def __repr__(self):
        return f"SnrPoint({self.snr_db} dB)"


SnrLike = Union[SnrPoint, float, np.ndarray]


def snr_linear_array(snr: SnrLike, batch: int) -> np.ndarray:
    """把 SnrPoint、标量 dB 或逐样本 dB 数组展开为长度 batch 的线性 SNR"""
    if isinstance(snr, SnrPoint):
        return np.full(batch, snr.snr_linear)
    snr_db = np.broadcast_to(np.asarray(snr, dtype=np.float64), (batch,))
    with np.errstate(over="ignore"):
        return np.power(10.0, snr_db / 10.0)


def noise_variance_array(snr: SnrLike, batch: int) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / snr_linear_array(snr, batch)


@dataclass(frozen=True)
class ChannelModel:
    """信道模型，pilot_count 只对 Rayleigh 信道有意义"""

    kind: ChannelKind = ChannelKind.AWGN
    pilot_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.pilot_count < 1:
            raise InvalidArgumentError(f"导频个数至少为 1: {self.pilot_count}")

    @classmethod
    def awgn(cls) -> "ChannelModel":
        return cls(ChannelKind.AWGN)

    @classmethod
    def rayleigh(cls, pilot_count: int = 1) -> "ChannelModel":
        return cls(ChannelKind.RAYLEIGH_LMMSE, pilot_count)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "pilot_count": self.pilot_count}
