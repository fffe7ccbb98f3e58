"""
工具模块

CSV 导出与运行目录存储。
"""

__version__ = "0.1.0"

from .csv_export import (
    curve_filename,
    parse_curve_name,
    read_csv,
    read_curve,
    snr_label,
    write_constellation,
    write_csv,
    write_curve,
    write_distribution,
)
from .run_store import RunStatus, RunStore, runtime_versions

__all__ = [
    "curve_filename",
    "parse_curve_name",
    "read_csv",
    "read_curve",
    "snr_label",
    "write_constellation",
    "write_csv",
    "write_curve",
    "write_distribution",
    "RunStatus",
    "RunStore",
    "runtime_versions",
]
