"""
训练结果数据模型
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.objectives import LossBreakdown

from .config import TrainConfig


@dataclass(frozen=True)
class LossCurveRow:
    """每一步的损失记录，loss_bits 是实际被最小化的目标（正式运行为 L̂，对照实验为 L）"""

    step: int
    loss_bits: float
    entropy_bits: float
    mi_bound_bits: float

    def to_row(self) -> dict:
        return {
            "step": self.step,
            "loss_bits": self.loss_bits,
            "entropy_bits": self.entropy_bits,
            "mi_bound_bits": self.mi_bound_bits,
        }


class CheckpointRecord:
    """检查点记录"""

    def __init__(
        self,
        step: int,
        snr_stats: Dict[str, float],
        breakdown: LossBreakdown,
        wall_time: float,
        energy_error: float = 0.0,
        batch_size: int = 0,
        learning_rate: float = 0.0,
    ):
        self.step = step
        self.snr_stats = snr_stats  # 本批次 SNR 的 min / mean / max
        self.breakdown = breakdown
        self.wall_time = wall_time
        self.energy_error = energy_error
        self.batch_size = batch_size
        self.learning_rate = learning_rate

    def __repr__(self):
        return (
            f"CheckpointRecord(step={self.step}, "
            f"L̂={self.breakdown.corrected_loss_bits:.4f}, "
            f"H={self.breakdown.source_entropy_bits:.4f})"
        )

    def to_dict(self, include_timing: bool = True) -> dict:
        data = {
            "step": self.step,
            "snr_stats": self.snr_stats,
            "loss": self.breakdown.to_dict(),
            "energy_error": self.energy_error,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
        }
        if include_timing:
            data["wall_time"] = self.wall_time
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CheckpointRecord":
        return cls(
            step=data["step"],
            snr_stats=data["snr_stats"],
            breakdown=LossBreakdown.from_dict(data["loss"]),
            wall_time=data.get("wall_time", 0.0),
            energy_error=data.get("energy_error", 0.0),
            batch_size=data.get("batch_size", 0),
            learning_rate=data.get("learning_rate", 0.0),
        )


@dataclass
class TrainReport:
    """
    一次训练的完整记录

    final_parameters 只包含当前模式实际使用的参数；production 为 False 表示对照实验。
    """

    config: TrainConfig
    checkpoints: List[CheckpointRecord] = field(default_factory=list)
    loss_curve: List[LossCurveRow] = field(default_factory=list)
    final_parameters: Dict[str, np.ndarray] = field(default_factory=dict)
    production: bool = True
    clamped_posteriors: int = 0
    checkpoint_path: Optional[str] = None

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def final_breakdown(self) -> Optional[LossBreakdown]:
        return self.checkpoints[-1].breakdown if self.checkpoints else None

    def to_dict(self, include_timing: bool = True) -> dict:
        """
        转换为字典（参数只记录检查点文件路径）

        Args:
            include_timing: 是否包含 wall_time，比较确定性时设为 False
        """
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "production": self.production,
            "clamped_posteriors": self.clamped_posteriors,
            "checkpoint_path": self.checkpoint_path,
            "checkpoints": [c.to_dict(include_timing) for c in self.checkpoints],
            "steps_recorded": len(self.loss_curve),
        }

    def __repr__(self):
        final = self.final_breakdown
        loss = f"{final.corrected_loss_bits:.4f}" if final else "n/a"
        return (
            f"TrainReport(mode={self.config.mode.value}, N={self.config.order}, "
            f"checkpoints={len(self.checkpoints)}, final L̂={loss}, production={self.production})"
        )
