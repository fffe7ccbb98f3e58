"""
评估

对每个 SNR 点查询分布网络、归一化星座，计算所学 (几何, 分布) 的真实互信息，
同时给出 −L̂ 作为下界。各 SNR 点用独立随机数流并行计算，按网格顺序合并。
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.autodiff import load_parameters
from src.channel import ChannelModel, SnrPoint
from src.errors import InvalidArgumentError
from src.modulation import Constellation
from src.objectives import MICurve, mi_lower_bound_monte_carlo, mi_oracle
from src.shaping import SymbolDistribution

from .system import ShapingSystem

CheckpointLike = Union[str, Path, Mapping[str, np.ndarray], ShapingSystem]


@dataclass
class EvaluationPoint:
    """一个 SNR 点的评估结果"""

    snr_db: float
    mi_bits: float
    mi_std_error: float
    mi_bound_bits: float
    bound_std_error: float
    entropy_bits: float
    extrapolated: bool
    constellation: Constellation = field(repr=False)
    distribution: SymbolDistribution = field(repr=False)

    def to_row(self) -> dict:
        return {
            "snr": self.snr_db,
            "mi": self.mi_bits,
            "mi_bound": self.mi_bound_bits,
            "entropy": self.entropy_bits,
            "extrapolated": int(self.extrapolated),
        }


@dataclass
class EvaluationResult:
    """一条评估曲线及各点快照"""

    scheme: str
    order: int
    channel: ChannelModel
    points: List[EvaluationPoint] = field(default_factory=list)

    @property
    def curve(self) -> MICurve:
        return MICurve(self.scheme, self.order, [(p.snr_db, p.mi_bits) for p in self.points])

    def detail_rows(self) -> List[dict]:
        return [p.to_row() for p in self.points]


def _resolve_system(checkpoint: CheckpointLike, channel: ChannelModel) -> ShapingSystem:
    if isinstance(checkpoint, ShapingSystem):
        return checkpoint
    arrays = checkpoint if isinstance(checkpoint, Mapping) else load_parameters(checkpoint)
    return ShapingSystem.from_checkpoint(arrays, channel=channel)


def evaluate(
    checkpoint: CheckpointLike,
    snr_grid: Sequence[float],
    channel: ChannelModel,
    mc_samples: int,
    rng: np.random.Generator,
    trained_range: Optional[Tuple[float, float]] = None,
    scheme: str = "learned",
    max_workers: int = 4,
) -> EvaluationResult:
    """
    评估检查点在 SNR 网格上的互信息

    Args:
        checkpoint: 检查点路径、参数字典或 ShapingSystem
        snr_grid: 严格递增的 SNR 网格（dB）
        channel: 信道（AWGN 用求积，其他用蒙特卡洛）
        mc_samples: 蒙特卡洛样本数，用于 −L̂ 以及非 AWGN 信道的互信息
        rng: 随机数生成器，为每个 SNR 点派生独立的子流
        trained_range: 训练的 SNR 范围，超出时计算但标记为外推
        scheme: 曲线名
        max_workers: 并行线程数

    Returns:
        EvaluationResult: 曲线与快照
    """
    grid = [float(s) for s in snr_grid]
    if not grid:
        raise InvalidArgumentError("SNR 网格为空")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgumentError(f"SNR 网格必须严格递增: {grid}")
    system = _resolve_system(checkpoint, channel)
    streams = rng.spawn(len(grid))

    def evaluate_point(index: int) -> EvaluationPoint:
        snr_db = grid[index]
        point_rng = streams[index]
        dist = system.distribution(snr_db)
        c = system.constellation(snr_db)
        snr = SnrPoint(snr_db)
        mi, mi_se = mi_oracle(c, dist, channel, snr, mc_samples, point_rng)
        bound, bound_se = mi_lower_bound_monte_carlo(
            c, dist, system.demod, channel, snr, mc_samples, point_rng
        )
        extrapolated = trained_range is not None and not (
            trained_range[0] <= snr_db <= trained_range[1]
        )
        return EvaluationPoint(
            snr_db=snr_db,
            mi_bits=mi,
            mi_std_error=mi_se,
            mi_bound_bits=bound,
            bound_std_error=bound_se,
            entropy_bits=dist.entropy_bits(),
            extrapolated=extrapolated,
            constellation=c,
            distribution=dist,
        )

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        points = list(pool.map(evaluate_point, range(len(grid))))

    result = EvaluationResult(scheme=scheme, order=system.order, channel=channel, points=points)
    for p in points:
        flag = ""
        if p.extrapolated:
            flag = " (外推)"
            logger.warning(f"⚠️  {p.snr_db} dB 超出训练范围 {trained_range}，结果为外推")
        logger.info(
            f"📊 {scheme} @ {p.snr_db} dB: I={p.mi_bits:.4f}, -L̂={p.mi_bound_bits:.4f}, "
            f"H={p.entropy_bits:.4f} bit{flag}"
        )
    return result
