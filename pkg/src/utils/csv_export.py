"""
CSV 导出

所有 CSV 都经过这里写出: 表头、逗号分隔、浮点数用 repr（与区域设置无关，'.' 小数点，可无损往返）。
"""

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.channel import ChannelKind
from src.errors import GridError
from src.objectives import MICurve


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Union[str, Path], fieldnames: Sequence[str], rows: Iterable[dict]) -> Path:
    """
    写出 CSV

    Args:
        path: 输出路径
        fieldnames: 列名
        rows: 每行一个字典

    Returns:
        Path: 写入的文件路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _format(row[k]) for k in fieldnames})
            count += 1
    logger.debug(f"CSV 已写出: {path} ({count} 行)")
    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def snr_label(snr_db: float) -> str:
    """文件名中的 SNR 标签，例如 5.0 -> '5'，-2.5 -> '-2.5'"""
    return f"{snr_db:g}"


def curve_filename(scheme: str, order: int, channel: str) -> str:
    """曲线文件名 {scheme}_N{order}_{channel}.csv，容量类曲线省略阶数"""
    if order > 0:
        return f"{scheme}_N{order}_{channel}.csv"
    return f"{scheme}_{channel}.csv"


def write_curve(path: Union[str, Path], curve: MICurve) -> Path:
    return write_csv(path, ["snr", "mi"], ({"snr": s, "mi": m} for s, m in curve.entries))


def read_curve(path: Union[str, Path]) -> MICurve:
    """
    读取 MI 曲线 CSV，方案名取文件名第一个 '_N' 或 '_' 之前的部分

    Args:
        path: snr,mi 格式的 CSV

    Returns:
        MICurve: 曲线（阶数从文件名解析，没有时为 0）
    """
    path = Path(path)
    rows = read_csv(path)
    if not rows or set(rows[0]) != {"snr", "mi"}:
        raise GridError(f"{path} 不是 snr,mi 格式的曲线文件")
    scheme, order = parse_curve_name(path.stem)
    entries: List[Tuple[float, float]] = [(float(r["snr"]), float(r["mi"])) for r in rows]
    return MICurve(scheme, order, entries)


def parse_curve_name(stem: str) -> Tuple[str, int]:
    """qam_N16_awgn -> ('qam', 16)；capacity_awgn -> ('capacity', 0)"""
    parts = stem.split("_")
    for i, part in enumerate(parts):
        if i > 0 and part.startswith("N") and part[1:].isdigit():
            return "_".join(parts[:i]), int(part[1:])
    for kind in ChannelKind:
        suffix = f"_{kind.value}"
        if stem.endswith(suffix) and len(stem) > len(suffix):
            return stem[: -len(suffix)], 0
    return stem, 0


def write_constellation(path: Union[str, Path], rows: Iterable[Tuple[float, float, float]]):
    return write_csv(
        path, ["re", "im", "prob"], ({"re": re, "im": im, "prob": p} for re, im, p in rows)
    )


def write_distribution(path: Union[str, Path], rows: Iterable[Tuple[int, float]]):
    return write_csv(path, ["symbol", "prob"], ({"symbol": s, "prob": p} for s, p in rows))
