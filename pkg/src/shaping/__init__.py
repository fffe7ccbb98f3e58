"""
概率整形模块

SNR 条件的符号分布网络，以及基于 Gumbel-Softmax 与直通估计的可微符号采样。
"""

from .distribution import (
    SymbolDistribution,
    distribution_entropy,
    entropy_of_logits,
    logits_to_distribution,
)
from .gumbel import (
    GumbelSample,
    gumbel_softmax,
    sample_gumbel,
    sample_gumbel_max,
    straight_through_select,
)
from .logits_network import LogitsNetwork

__all__ = [
    "SymbolDistribution",
    "distribution_entropy",
    "entropy_of_logits",
    "logits_to_distribution",
    "GumbelSample",
    "gumbel_softmax",
    "sample_gumbel",
    "sample_gumbel_max",
    "straight_through_select",
    "LogitsNetwork",
]
