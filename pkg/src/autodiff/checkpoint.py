"""
参数检查点

格式为单个 JSON 文档: {name: {rows, cols, values: [...]}}，浮点数以 repr 写出，可无损往返。
"""

import json
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np
from loguru import logger

from src.errors import DimensionError

from .tensor import Tensor, as_matrix

ArrayLike = Union[Tensor, np.ndarray]


def parameters_to_dict(params: Mapping[str, ArrayLike]) -> Dict[str, dict]:
    """把参数转换为可序列化的字典"""
    data = {}
    for name, param in params.items():
        value = param.value if isinstance(param, Tensor) else as_matrix(param)
        data[name] = {
            "rows": int(value.shape[0]),
            "cols": int(value.shape[1]),
            "values": [float(v) for v in value.reshape(-1)],
        }
    return data


def parameters_from_dict(data: Mapping[str, dict]) -> Dict[str, np.ndarray]:
    """从字典恢复参数数组"""
    arrays = {}
    for name, entry in data.items():
        rows, cols = int(entry["rows"]), int(entry["cols"])
        values = np.asarray(entry["values"], dtype=np.float64)
        if values.size != rows * cols:
            raise DimensionError(f"检查点参数 {name} 长度 {values.size} 与 {rows}x{cols} 不一致")
        arrays[name] = values.reshape(rows, cols)
    return arrays


def save_parameters(params: Mapping[str, ArrayLike], path: Union[str, Path]) -> Path:
    """
    保存参数检查点

    Args:
        params: 参数名到张量/数组的映射
        path: 输出文件路径

    Returns:
        Path: 写入的文件路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(parameters_to_dict(params), f, indent=2)
    logger.debug(f"检查点已保存: {path} ({len(params)} 个参数)")
    return path


def load_parameters(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """加载参数检查点"""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    logger.debug(f"检查点已加载: {path}")
    return parameters_from_dict(data)
