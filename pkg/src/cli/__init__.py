"""
命令行模块

train / eval / baseline / compare / export-constellation / check 六个命令的实现。
"""

from .checks import CheckResult, log_table, run_checks
from .commands import (
    BASELINE_SCHEMES,
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_LOCKED,
    EXIT_OK,
    align_curves,
    baseline_curve,
    cmd_baseline,
    cmd_check,
    cmd_compare,
    cmd_eval,
    cmd_export_constellation,
    cmd_train,
    parse_snr_grid,
)

__all__ = [
    "CheckResult",
    "log_table",
    "run_checks",
    "BASELINE_SCHEMES",
    "EXIT_CONFIG",
    "EXIT_FAILURE",
    "EXIT_LOCKED",
    "EXIT_OK",
    "align_curves",
    "baseline_curve",
    "cmd_baseline",
    "cmd_check",
    "cmd_compare",
    "cmd_eval",
    "cmd_export_constellation",
    "cmd_train",
    "parse_snr_grid",
]
