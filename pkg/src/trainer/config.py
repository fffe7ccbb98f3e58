"""
训练配置

一次运行的配置是一个与 TrainConfig 一一对应的 JSON 文档；命令行的 --set key=value 在校验前覆盖。
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from loguru import logger

from src.autodiff import AdamConfig
from src.channel import ChannelKind, ChannelModel
from src.errors import ConfigError, InvalidArgumentError
from src.modulation import SUPPORTED_QAM_ORDERS


class ShapingMode(str, Enum):
    """整形模式"""

    PS_ONLY = "ps_only"  # 只训练分布，几何固定为 QAM
    GS_ONLY = "gs_only"  # 只训练几何，分布固定为均匀
    JOINT = "joint"  # 同时训练

    @property
    def scheme(self) -> str:
        """评估曲线的方案名"""
        return {"ps_only": "ps", "gs_only": "gs", "joint": "joint"}[self.value]


def _default_batch_schedule() -> List[List[float]]:
    return [[5000, 100], [5000, 1000], [5000, 5000], [5000, 10000]]


def _default_lr_schedule() -> List[List[float]]:
    return [[5000, 1e-3], [5000, 1e-4], [5000, 3e-5], [5000, 1e-5]]


@dataclass
class TrainConfig:
    """训练配置，schedule 的每一段为 [持续步数, 取值]"""

    mode: ShapingMode = ShapingMode.JOINT
    order: int = 16
    channel: ChannelKind = ChannelKind.AWGN
    pilot_count: int = 1
    snr_range_db: List[float] = field(default_factory=lambda: [-2.0, 40.0])
    tau: float = 10.0
    batch_schedule: List[List[float]] = field(default_factory=_default_batch_schedule)
    lr_schedule: List[List[float]] = field(default_factory=_default_lr_schedule)
    seed: int = 0
    steps_total: int = 20000
    checkpoint_every: int = 500
    hidden_units: int = 128
    init_jitter: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        try:
            self.mode = ShapingMode(self.mode)
        except ValueError:
            raise ConfigError("mode", f"未知的整形模式 {self.mode!r}")
        try:
            self.channel = ChannelKind(self.channel)
        except ValueError:
            raise ConfigError("channel", f"未知的信道类型 {self.channel!r}")

    @property
    def channel_model(self) -> ChannelModel:
        return ChannelModel(self.channel, self.pilot_count)

    def adam_config(self, learning_rate: float) -> AdamConfig:
        return AdamConfig(learning_rate, self.adam_beta1, self.adam_beta2, self.adam_epsilon)

    def validate(self) -> "TrainConfig":
        """
        校验配置，错误时抛出 ConfigError 并指明字段

        schedule 不满足批次递增、学习率递减时只给出警告。
        """
        if not isinstance(self.order, int) or self.order < 2:
            raise ConfigError("order", f"调制阶数必须是不小于 2 的整数: {self.order!r}")
        if self.mode == ShapingMode.PS_ONLY and self.order not in SUPPORTED_QAM_ORDERS:
            raise ConfigError("order", f"ps_only 需要 QAM 阶数 {SUPPORTED_QAM_ORDERS}")
        if not isinstance(self.pilot_count, int) or self.pilot_count < 1:
            raise ConfigError("pilot_count", f"导频个数必须是正整数: {self.pilot_count!r}")

        snr = self.snr_range_db
        if (
            not isinstance(snr, (list, tuple))
            or len(snr) != 2
            or not all(_is_number(v) and math.isfinite(v) for v in snr)
            or not snr[0] < snr[1]
        ):
            raise ConfigError("snr_range_db", f"需要有限的 [low, high] 且 low < high: {snr!r}")
        if not _is_number(self.tau) or not self.tau > 0:
            raise ConfigError("tau", f"温度必须为正数: {self.tau!r}")
        if not isinstance(self.steps_total, int) or self.steps_total < 1:
            raise ConfigError("steps_total", f"总步数必须是正整数: {self.steps_total!r}")
        if not isinstance(self.checkpoint_every, int) or self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every", f"必须是正整数: {self.checkpoint_every!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"种子必须是非负整数: {self.seed!r}")
        if not isinstance(self.hidden_units, int) or self.hidden_units < 1:
            raise ConfigError("hidden_units", f"必须是正整数: {self.hidden_units!r}")
        if not _is_number(self.init_jitter) or self.init_jitter < 0:
            raise ConfigError("init_jitter", f"必须是非负数: {self.init_jitter!r}")
        try:
            self.adam_config(1e-3)
        except InvalidArgumentError as e:
            raise ConfigError("adam_beta1", str(e))

        self._validate_schedule("batch_schedule", integer_values=True)
        self._validate_schedule("lr_schedule", integer_values=False)
        _warn_if_not_monotone("batch_schedule", self.batch_schedule, ascending=True)
        _warn_if_not_monotone("lr_schedule", self.lr_schedule, ascending=False)
        return self

    def _validate_schedule(self, name: str, integer_values: bool):
        schedule = getattr(self, name)
        if not isinstance(schedule, list) or not schedule:
            raise ConfigError(name, "schedule 必须是非空列表")
        for stage in schedule:
            if (
                not isinstance(stage, (list, tuple))
                or len(stage) != 2
                or not isinstance(stage[0], int)
                or stage[0] < 1
                or not _is_number(stage[1])
                or not stage[1] > 0
            ):
                raise ConfigError(name, f"每一段必须是 [正整数步数, 正数取值]: {stage!r}")
            if integer_values and int(stage[1]) != stage[1]:
                raise ConfigError(name, f"批次大小必须是整数: {stage[1]!r}")
        covered = sum(stage[0] for stage in schedule)
        if covered < self.steps_total:
            raise ConfigError(name, f"只覆盖 {covered} 步，少于 steps_total={self.steps_total}")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mode"] = self.mode.value
        data["channel"] = self.channel.value
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "TrainConfig":
        """从字典创建配置，未知字段报错"""
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "未知的配置项")
        return cls(**data)

    def __repr__(self):
        return (
            f"TrainConfig(mode={self.mode.value}, N={self.order}, channel={self.channel.value}, "
            f"steps={self.steps_total}, seed={self.seed})"
        )


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _warn_if_not_monotone(name: str, schedule: Sequence[Sequence[float]], ascending: bool):
    values = [stage[1] for stage in schedule]
    pairs = list(zip(values, values[1:]))
    broken = any(b < a for a, b in pairs) if ascending else any(b > a for a, b in pairs)
    if broken:
        direction = "递增" if ascending else "递减"
        logger.warning(f"⚠️  {name} 不是单调{direction}的: {values}")


def schedule_value(schedule: Sequence[Sequence[float]], step: int) -> float:
    """
    分段常数 schedule 在第 step 步（从 0 开始）的取值

    超出覆盖范围时沿用最后一段。
    """
    boundary = 0
    for steps, value in schedule:
        boundary += steps
        if step < boundary:
            return value
    return schedule[-1][1]


def parse_override(item: str):
    """解析一个 key=value 覆盖项，value 能按 JSON 解析则按 JSON，否则作为字符串"""
    if "=" not in item:
        raise ConfigError(item, "覆盖项必须写成 key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_overrides(data: Dict, overrides: Optional[Iterable[str]]) -> Dict:
    result = dict(data)
    for item in overrides or []:
        key, value = parse_override(item)
        result[key] = value
        logger.info(f"🔧 配置覆盖: {key} = {value!r}")
    return result


def _field_line(text: str, name: str) -> Optional[int]:
    needle = f'"{name}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Iterable[str]] = None,
    seed: Optional[int] = None,
) -> TrainConfig:
    """
    读取并校验运行配置

    Args:
        path: JSON 配置文件路径，None 时使用默认配置
        overrides: --set 覆盖项
        seed: --seed 覆盖

    Returns:
        TrainConfig: 校验过的配置
    """
    text = ""
    data: Dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError("config", f"无法读取配置文件 {path}: {e}")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"JSON 解析失败: {e.msg}", line=e.lineno)
        if not isinstance(data, dict):
            raise ConfigError("config", "配置必须是 JSON 对象")

    data = apply_overrides(data, overrides)
    if seed is not None:
        data["seed"] = seed
    try:
        return TrainConfig.from_dict(data).validate()
    except ConfigError as e:
        line = e.line if e.line is not None else _field_line(text, e.field)
        if line is None:
            raise
        raise ConfigError(e.field, str(e).split("]: ", 1)[-1], line=line) from e


def config_hash(cfg: TrainConfig) -> str:
    """配置的 sha256（规范化 JSON: 键排序、紧凑分隔符）"""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
