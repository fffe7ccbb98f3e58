"""
训练模块

端到端训练循环、分段 schedule 配置、检查点与评估。
"""

from .config import (
    ShapingMode,
    TrainConfig,
    apply_overrides,
    config_hash,
    load_config,
    parse_override,
    schedule_value,
)
from .evaluator import EvaluationPoint, EvaluationResult, evaluate
from .models import CheckpointRecord, LossCurveRow, TrainReport
from .system import POINTS_NAME, ShapingSystem, StepOutcome
from .trainer import CHECKPOINT_FILE, Trainer, train, train_with_uncorrected_loss

__all__ = [
    "ShapingMode",
    "TrainConfig",
    "apply_overrides",
    "config_hash",
    "load_config",
    "parse_override",
    "schedule_value",
    "EvaluationPoint",
    "EvaluationResult",
    "evaluate",
    "CheckpointRecord",
    "LossCurveRow",
    "TrainReport",
    "POINTS_NAME",
    "ShapingSystem",
    "StepOutcome",
    "CHECKPOINT_FILE",
    "Trainer",
    "train",
    "train_with_uncorrected_loss",
]
