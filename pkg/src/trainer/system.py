"""
端到端整形系统

分布网络 → Gumbel-Softmax 采样 → 调制与能量归一化 → 信道 → 解调网络 → 修正损失。
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np
from loguru import logger

from src.autodiff import Parameter, Tensor, constant, ops
from src.channel import ChannelKind, ChannelModel, awgn_transmit, rayleigh_lmmse_transmit
from src.demodulator import DemodNetwork
from src.errors import DimensionError, InvalidArgumentError, UnsupportedChannelError
from src.modulation import (
    Constellation,
    energy_scale,
    initial_points,
    modulate,
    normalize,
    qam,
)
from src.objectives import ClampCounter, CorrectedLoss, corrected_loss
from src.shaping import (
    LogitsNetwork,
    SymbolDistribution,
    gumbel_softmax,
    logits_to_distribution,
    sample_gumbel,
)

from .config import ShapingMode, TrainConfig

POINTS_NAME = "modulator.points"


@dataclass
class StepOutcome:
    """一个训练批次的前向结果"""

    loss: CorrectedLoss
    snr_db: np.ndarray
    symbols: np.ndarray
    received: np.ndarray


class ShapingSystem:
    """三个可训练部分及其在当前模式下的冻结关系"""

    def __init__(
        self,
        order: int,
        mode: ShapingMode,
        logits_net: Optional[LogitsNetwork],
        points: Parameter,
        demod: DemodNetwork,
        tau: float = 10.0,
        channel: ChannelModel = ChannelModel.awgn(),
    ):
        if points.shape != (order, 2):
            raise DimensionError(f"星座参数形状 {points.shape} 与 N={order} 不一致")
        self.order = order
        self.mode = ShapingMode(mode)
        self.logits_net = logits_net
        self.points = points
        self.demod = demod
        self.tau = tau
        self.channel = channel

    @classmethod
    def build(cls, cfg: TrainConfig, rng: np.random.Generator) -> "ShapingSystem":
        """按配置初始化网络与星座"""
        logits_net = LogitsNetwork(cfg.order, rng, cfg.hidden_units, cfg.snr_range_db)
        if cfg.mode == ShapingMode.PS_ONLY:
            start = qam(cfg.order).points
        else:
            start = initial_points(cfg.order, rng, jitter=cfg.init_jitter)
        points = Parameter(start, POINTS_NAME)
        demod = DemodNetwork(cfg.order, rng, cfg.hidden_units)
        logger.info(
            f"🧩 初始化整形系统: mode={cfg.mode.value}, N={cfg.order}, "
            f"hidden={cfg.hidden_units}, channel={cfg.channel.value}"
        )
        return cls(cfg.order, cfg.mode, logits_net, points, demod, cfg.tau, cfg.channel_model)

    @classmethod
    def from_checkpoint(
        cls,
        arrays: Mapping[str, np.ndarray],
        channel: ChannelModel = ChannelModel.awgn(),
        tau: float = 10.0,
    ) -> "ShapingSystem":
        """
        从检查点恢复

        没有 logits.* 参数的检查点（gs_only）使用均匀分布。
        """
        if POINTS_NAME not in arrays:
            raise InvalidArgumentError(f"检查点缺少 {POINTS_NAME}")
        order = arrays[POINTS_NAME].shape[0]
        hidden = arrays["demod.layer1.weights"].shape[1]
        rng = np.random.default_rng(0)
        has_distribution = any(name.startswith("logits.") for name in arrays)
        logits_net = LogitsNetwork(order, rng, hidden) if has_distribution else None
        demod = DemodNetwork(order, rng, hidden)
        mode = ShapingMode.JOINT if has_distribution else ShapingMode.GS_ONLY
        system = cls(order, mode, logits_net, Parameter(arrays[POINTS_NAME], POINTS_NAME), demod)
        system.tau = tau
        system.channel = channel
        named = system.named_parameters()
        for name, value in arrays.items():
            if name not in named:
                raise InvalidArgumentError(f"检查点包含未知参数 {name}")
            named[name].assign(value)
        return system

    def __repr__(self):
        return f"ShapingSystem(mode={self.mode.value}, N={self.order}, tau={self.tau})"

    @property
    def trains_distribution(self) -> bool:
        return self.mode in (ShapingMode.PS_ONLY, ShapingMode.JOINT)

    @property
    def trains_geometry(self) -> bool:
        return self.mode in (ShapingMode.GS_ONLY, ShapingMode.JOINT)

    @property
    def uses_distribution(self) -> bool:
        return self.trains_distribution and self.logits_net is not None

    def named_parameters(self) -> Dict[str, Parameter]:
        """当前模式用到的全部参数（检查点内容）"""
        named: Dict[str, Parameter] = {}
        if self.uses_distribution:
            named.update(self.logits_net.named_parameters())
        named[POINTS_NAME] = self.points
        named.update(self.demod.named_parameters())
        return named

    def trainable_parameters(self) -> List[Parameter]:
        params: List[Parameter] = []
        if self.uses_distribution:
            params += self.logits_net.parameters()
        if self.trains_geometry:
            params.append(self.points)
        return params + self.demod.parameters()

    def logits(self, snr_db) -> Tensor:
        """(batch, N) logits；不训练分布时为全零常量（均匀分布）"""
        snr_db = np.asarray(snr_db, dtype=np.float64).reshape(-1)
        if self.uses_distribution:
            return self.logits_net(snr_db)
        return constant(np.zeros((snr_db.size, self.order)))

    def distribution(self, snr_db: float) -> SymbolDistribution:
        return logits_to_distribution(self.logits(snr_db).value[0])

    def constellation(self, snr_db: float) -> Constellation:
        """给定 SNR 下按当前分布归一化的星座"""
        return normalize(self.points.value, self.distribution(snr_db))

    def transmit(self, x: Tensor, snr_db: np.ndarray, rng: np.random.Generator) -> Tensor:
        if self.channel.kind == ChannelKind.AWGN:
            return awgn_transmit(x, snr_db, rng)
        if self.channel.kind == ChannelKind.RAYLEIGH_LMMSE:
            y, _ = rayleigh_lmmse_transmit(x, snr_db, rng, pilot_count=self.channel.pilot_count)
            return y
        raise UnsupportedChannelError(f"不支持的信道 {self.channel.kind}")

    def forward_batch(
        self,
        snr_db: np.ndarray,
        rng: np.random.Generator,
        clamp_counter: Optional[ClampCounter] = None,
    ) -> StepOutcome:
        """
        一个批次的完整前向计算

        随机数按固定顺序消耗: Gumbel 噪声、信道噪声。

        Args:
            snr_db: 每个样本的 SNR（dB）
            rng: 数据随机数生成器
            clamp_counter: 后验截断计数器

        Returns:
            StepOutcome: 损失各项与本批次数据
        """
        snr_db = np.asarray(snr_db, dtype=np.float64).reshape(-1)
        batch = snr_db.size
        logits = self.logits(snr_db)
        sample = gumbel_softmax(logits, sample_gumbel((batch, self.order), rng), self.tau)

        # 能量归一化用当前 SNR 下的分布，梯度同时流向星座和分布
        probs = ops.softmax(logits)
        x = ops.mul(modulate(sample, self.points), energy_scale(self.points, probs))
        y = self.transmit(x, snr_db, rng)
        posteriors = self.demod(y, snr_db)
        loss = corrected_loss(sample.symbol_index, posteriors, logits, clamp_counter)
        return StepOutcome(
            loss=loss, snr_db=snr_db, symbols=sample.symbol_index, received=y.value
        )

    def parameter_arrays(self) -> Dict[str, np.ndarray]:
        return {name: p.value.copy() for name, p in self.named_parameters().items()}
