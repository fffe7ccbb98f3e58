"""
异常定义

库代码只负责抛出异常，由命令行层统一捕获、记录日志并转换为退出码。
"""

from typing import Optional


class ShaperError(Exception):
    """所有星座整形相关异常的基类"""


class DimensionError(ShaperError):
    """张量形状不匹配"""


class GraphStateError(ShaperError):
    """计算图状态错误（例如没有前向记录就执行反向传播）"""


class NumericalError(ShaperError):
    """运算结果出现 NaN 或 Inf"""


class DegenerateInputError(ShaperError):
    """退化输入（例如期望能量为零的星座）"""


class UnsupportedOrderError(ShaperError):
    """不支持的调制阶数"""


class UnsupportedChannelError(ShaperError):
    """当前操作不支持该信道类型"""


class InvalidArgumentError(ShaperError, ValueError):
    """参数取值不合法"""


class GridError(ShaperError):
    """SNR 网格不兼容（例如两条曲线没有交集）"""


class RunLockedError(ShaperError):
    """运行目录已被其他命令占用"""


class ConfigError(ShaperError):
    """配置错误，field 指明出错的字段"""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = f"第 {line} 行, " if line is not None else ""
        super().__init__(f"配置错误 [{location}字段 {field}]: {message}")


class TrainingDivergedError(ShaperError):
    """训练中损失出现 NaN，dump_path 指向最后一个批次的诊断文件"""

    def __init__(self, step: int, message: str, dump_path: Optional[str] = None):
        self.step = step
        self.dump_path = dump_path
        suffix = f"，诊断数据: {dump_path}" if dump_path else ""
        super().__init__(f"训练在第 {step} 步发散: {message}{suffix}")
