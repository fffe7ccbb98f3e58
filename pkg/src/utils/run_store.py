"""
运行目录存储

每个命令独占一个输出目录: 写 manifest.json（命令、参数、配置哈希、种子、版本、状态），
用 .lock 文件保证同一时刻只有一个命令使用该目录，并为命令生命周期添加 run.log 日志。
"""

import json
import os
import platform
import sys
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy
from loguru import logger

from src.errors import RunLockedError

MANIFEST_FILE = "manifest.json"
LOCK_FILE = ".lock"
LOG_FILE = "run.log"


class RunStatus(str, Enum):
    """运行状态枚举"""

    PENDING = "pending"  # 待执行
    RUNNING = "running"  # 执行中
    COMPLETED = "completed"  # 已完成
    FAILED = "failed"  # 失败


def runtime_versions() -> Dict[str, str]:
    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "constellation_shaper": __version__,
        "platform": platform.platform(),
    }


class RunStore:
    """运行目录管理器"""

    def __init__(self, root: Union[str, Path], command: str, argv: Optional[Sequence[str]] = None):
        """
        初始化运行目录

        Args:
            root: 输出目录
            command: 命令名（train / eval / ...）
            argv: 完整命令行参数
        """
        self.root = Path(root)
        self.command = command
        self.argv = list(argv if argv is not None else sys.argv)
        self.manifest_path = self.root / MANIFEST_FILE
        self.lock_path = self.root / LOCK_FILE
        self._locked = False
        self._sink_id: Optional[int] = None

    def __repr__(self):
        return f"RunStore(root={self.root}, command={self.command})"

    # ---- 锁 ----

    def acquire(self):
        """创建目录并独占锁文件，已被占用时抛出 RunLockedError"""
        self.root.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RunLockedError(f"运行目录 {self.root} 已被其他命令占用（{self.lock_path}）")
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(f"{os.getpid()} {self.command}\n")
        self._locked = True
        self._sink_id = logger.add(self.root / LOG_FILE, level="INFO", encoding="utf-8")
        self._save_data(
            {
                "command": self.command,
                "argv": self.argv,
                "status": RunStatus.PENDING.value,
                "versions": runtime_versions(),
                "create_time": datetime.now().isoformat(),
                "outputs": [],
            }
        )
        logger.info(f"🔒 已锁定运行目录: {self.root}")

    def release(self):
        if self._sink_id is not None:
            logger.remove(self._sink_id)
            self._sink_id = None
        if self._locked:
            self.lock_path.unlink(missing_ok=True)
            self._locked = False

    def __enter__(self) -> "RunStore":
        self.acquire()
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and self._locked:
            self.update_status(RunStatus.FAILED, error_msg=str(exc))
        self.release()
        return False

    # ---- manifest ----

    def _load_data(self) -> dict:
        """加载 manifest"""
        try:
            with open(self.manifest_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except Exception as e:
            logger.error(f"加载 manifest 失败: {e}")
            return {}

    def _save_data(self, data: dict):
        """保存 manifest"""
        try:
            with open(self.manifest_path, "w", encoding="utf-8") as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
        except Exception as e:
            logger.error(f"保存 manifest 失败: {e}")

    @property
    def manifest(self) -> dict:
        return self._load_data()

    def start(self, config_hash: Optional[str] = None, seed: Optional[int] = None, **extra: Any):
        """
        记录配置哈希与种子，状态置为 running

        Args:
            config_hash: 规范化配置的 sha256
            seed: 随机种子
            extra: 其他需要写入 manifest 的字段
        """
        data = self._load_data()
        data["config_hash"] = config_hash
        data["seed"] = seed
        data.update(extra)
        self._save_data(data)
        self.update_status(RunStatus.RUNNING)

    def update_status(self, status: RunStatus, error_msg: Optional[str] = None):
        """
        更新运行状态

        Args:
            status: 新状态
            error_msg: 错误信息
        """
        data = self._load_data()
        old_status = data.get("status", RunStatus.PENDING.value)
        data["status"] = status.value
        if status == RunStatus.RUNNING and not data.get("start_time"):
            data["start_time"] = datetime.now().isoformat()
        if status in (RunStatus.COMPLETED, RunStatus.FAILED):
            data["end_time"] = datetime.now().isoformat()
        if error_msg:
            data["error_msg"] = error_msg
        self._save_data(data)
        logger.info(f"运行状态已更新: {old_status} -> {status.value}")

    def record_outputs(self, paths: List[Union[str, Path]]):
        """把产物路径（相对运行目录）写入 manifest"""
        data = self._load_data()
        outputs = data.setdefault("outputs", [])
        for path in paths:
            path = Path(path)
            name = str(path.relative_to(self.root)) if path.is_relative_to(self.root) else str(path)
            if name not in outputs:
                outputs.append(name)
        self._save_data(data)

    def path(self, name: str) -> Path:
        return self.root / name

    def write_json(self, name: str, payload: dict) -> Path:
        target = self.root / name
        with open(target, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2)
        return target
