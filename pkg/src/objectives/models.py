"""
目标函数数据模型
"""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

from src.errors import InvalidArgumentError

MI_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LossBreakdown:
    """
    损失分解（比特）

    corrected_loss_bits = cross_entropy_bits − source_entropy_bits，
    mi_lower_bound_bits = −corrected_loss_bits。
    """

    cross_entropy_bits: float
    source_entropy_bits: float

    @property
    def corrected_loss_bits(self) -> float:
        return self.cross_entropy_bits - self.source_entropy_bits

    @property
    def mi_lower_bound_bits(self) -> float:
        return -self.corrected_loss_bits

    def to_dict(self) -> dict:
        return {
            "cross_entropy_bits": self.cross_entropy_bits,
            "source_entropy_bits": self.source_entropy_bits,
            "corrected_loss_bits": self.corrected_loss_bits,
            "mi_lower_bound_bits": self.mi_lower_bound_bits,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LossBreakdown":
        return cls(data["cross_entropy_bits"], data["source_entropy_bits"])


@dataclass
class MICurve:
    """一个方案的逐 SNR 互信息记录，order 为 0 表示不受 log2 N 限制（容量曲线）"""

    scheme: str
    order: int
    entries: List[Tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.entries = [(float(s), float(m)) for s, m in self.entries]
        self.validate()

    def validate(self):
        snrs = [s for s, _ in self.entries]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise InvalidArgumentError(f"曲线 {self.scheme} 的 SNR 必须严格递增")
        ceiling = math.log2(self.order) + MI_TOLERANCE if self.order > 0 else math.inf
        for snr, mi in self.entries:
            if not -MI_TOLERANCE <= mi <= ceiling:
                raise InvalidArgumentError(
                    f"曲线 {self.scheme} 在 {snr} dB 的互信息 {mi} 超出 [0, log2 N]"
                )

    @property
    def snrs(self) -> List[float]:
        return [s for s, _ in self.entries]

    @property
    def values(self) -> List[float]:
        return [m for _, m in self.entries]

    def __repr__(self):
        return f"MICurve(scheme={self.scheme}, N={self.order}, points={len(self.entries)})"

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "order": self.order, "entries": self.entries}
