"""
训练循环

每一步: 按均匀分布（dB）抽取批次 SNR，前向计算修正损失，反向传播，Adam 更新。
初始化与数据使用由同一个种子派生出的两条独立随机数流，同一 (配置, 种子) 结果逐位可复现。
"""

import json
import tempfile
import time
from pathlib import Path
from typing import NoReturn, Optional, Union

import numpy as np
from loguru import logger

from src.autodiff import adam_step, backward, save_parameters, zero_grad
from src.errors import NumericalError, TrainingDivergedError
from src.modulation import energy_error
from src.objectives import ClampCounter

from .config import ShapingMode, TrainConfig, schedule_value
from .models import CheckpointRecord, LossCurveRow, TrainReport
from .system import ShapingSystem, StepOutcome

CHECKPOINT_FILE = "checkpoint.json"
ENERGY_TOLERANCE = 1e-9


class Trainer:
    """单个训练运行"""

    def __init__(self, cfg: TrainConfig, uncorrected: bool = False):
        """
        初始化训练器

        Args:
            cfg: 已校验的配置
            uncorrected: True 时最小化未修正的交叉熵 L（负对照实验）
        """
        self.cfg = cfg
        self.uncorrected = uncorrected
        init_seed, data_seed = np.random.SeedSequence(cfg.seed).spawn(2)
        self.init_rng = np.random.default_rng(init_seed)
        self.data_rng = np.random.default_rng(data_seed)
        self.system = ShapingSystem.build(cfg, self.init_rng)
        self.params = self.system.trainable_parameters()
        self.clamp_counter = ClampCounter()
        self._last_batch: Optional[dict] = None

    def _dump_batch(self, step: int, out_dir: Optional[Path], reason: str) -> str:
        """把最后一个批次和参数写成诊断文件"""
        target_dir = out_dir or Path(tempfile.gettempdir())
        target_dir.mkdir(parents=True, exist_ok=True)
        path = target_dir / f"diverged_step{step}.json"
        dump = {
            "step": step,
            "reason": reason,
            "config": self.cfg.to_dict(),
            "last_batch": self._last_batch,
            "parameters": {
                name: {
                    "finite": bool(np.all(np.isfinite(value))),
                    "max_abs": float(np.nanmax(np.abs(value))),
                }
                for name, value in self.system.parameter_arrays().items()
            },
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(dump, f, ensure_ascii=False, indent=2)
        return str(path)

    def _diverged(self, step: int, out_dir: Optional[Path], reason: str) -> NoReturn:
        dump_path = self._dump_batch(step, out_dir, reason)
        logger.error(f"❌ 训练发散 (step={step}): {reason}")
        raise TrainingDivergedError(step, reason, dump_path)

    def _checkpoint(
        self, step: int, outcome: StepOutcome, started: float, batch: int, lr: float
    ) -> CheckpointRecord:
        snr = outcome.snr_db
        audit_snr = float(np.mean(snr))
        error = energy_error(
            self.system.constellation(audit_snr).points, self.system.distribution(audit_snr)
        )
        if error > ENERGY_TOLERANCE:
            logger.warning(f"⚠️  能量约束偏差 {error:.2e} (step={step}, snr={audit_snr:.2f} dB)")
        record = CheckpointRecord(
            step=step,
            snr_stats={
                "min": float(snr.min()),
                "mean": float(snr.mean()),
                "max": float(snr.max()),
            },
            breakdown=outcome.loss.breakdown,
            wall_time=time.perf_counter() - started,
            energy_error=error,
            batch_size=batch,
            learning_rate=lr,
        )
        b = record.breakdown
        logger.info(
            f"💾 检查点 step={step}: L={b.cross_entropy_bits:.4f}, H={b.source_entropy_bits:.4f}, "
            f"-L̂={b.mi_lower_bound_bits:.4f} bit"
        )
        return record

    def run(self, out_dir: Optional[Union[str, Path]] = None) -> TrainReport:
        """
        执行完整训练

        Args:
            out_dir: 输出目录，给出时每个检查点覆盖写入 checkpoint.json

        Returns:
            TrainReport: 训练记录
        """
        cfg = self.cfg
        out_dir = Path(out_dir) if out_dir is not None else None
        report = TrainReport(config=cfg, production=not self.uncorrected)
        low, high = cfg.snr_range_db
        started = time.perf_counter()
        stage = None

        logger.info("=" * 80)
        logger.info(f"🚀 开始训练: {cfg!r}, 目标={'L' if self.uncorrected else 'L̂'}")
        logger.info("=" * 80)

        for step in range(cfg.steps_total):
            batch = int(schedule_value(cfg.batch_schedule, step))
            lr = float(schedule_value(cfg.lr_schedule, step))
            if (batch, lr) != stage:
                logger.info(f"📶 step={step}: batch={batch}, lr={lr:g}")
                stage = (batch, lr)

            snr = self.data_rng.uniform(low, high, size=batch)
            self._last_batch = {"snr_db": snr.tolist()}
            try:
                outcome = self.system.forward_batch(snr, self.data_rng, self.clamp_counter)
            except NumericalError as e:
                self._diverged(step, out_dir, str(e))
            self._last_batch["symbols"] = outcome.symbols.tolist()

            objective = outcome.loss.cross_entropy if self.uncorrected else outcome.loss.corrected
            if not np.isfinite(objective.item()):
                self._diverged(step, out_dir, "损失为 NaN")
            breakdown = outcome.loss.breakdown
            report.loss_curve.append(
                LossCurveRow(
                    step=step,
                    loss_bits=objective.item(),
                    entropy_bits=breakdown.source_entropy_bits,
                    mi_bound_bits=breakdown.mi_lower_bound_bits,
                )
            )
            logger.debug(f"step={step}: loss={objective.item():.6f} bit")

            zero_grad(self.params)
            try:
                backward(objective)
            except NumericalError as e:
                self._diverged(step, out_dir, str(e))
            adam_step(self.params, cfg.adam_config(lr))
            if not all(np.all(np.isfinite(p.value)) for p in self.params):
                self._diverged(step, out_dir, "参数更新后出现非有限值")

            last = step == cfg.steps_total - 1
            if (step + 1) % cfg.checkpoint_every == 0 or last:
                report.checkpoints.append(self._checkpoint(step, outcome, started, batch, lr))
                if out_dir is not None:
                    path = save_parameters(
                        self.system.named_parameters(), out_dir / CHECKPOINT_FILE
                    )
                    report.checkpoint_path = str(path)

        report.final_parameters = self.system.parameter_arrays()
        report.clamped_posteriors = self.clamp_counter.count
        logger.info("=" * 80)
        logger.info(f"✅ 训练完成: {report!r}")
        logger.info("=" * 80)
        return report


def train(cfg: TrainConfig, out_dir: Optional[Union[str, Path]] = None) -> TrainReport:
    """按配置训练，最小化修正损失 L̂"""
    return Trainer(cfg.validate()).run(out_dir)


def train_with_uncorrected_loss(
    cfg: TrainConfig, out_dir: Optional[Union[str, Path]] = None
) -> TrainReport:
    """
    负对照实验: 同样的循环，但最小化未修正的交叉熵 L

    报告标记为非正式结果（production = False）。
    """
    cfg.validate()
    if cfg.mode == ShapingMode.GS_ONLY:
        logger.warning("⚠️  gs_only 下 H(S) 为常数，对照实验与正式训练的梯度相同")
    return Trainer(cfg, uncorrected=True).run(out_dir)
