"""
解调模块

以 SNR 为条件的后验网络，以及 AWGN 信道下的精确后验参照。
"""

from .network import DemodNetwork, posterior
from .oracle import (
    OracleDemodulator,
    UniformDemodulator,
    exact_posterior_oracle,
    log_posterior_batch,
    posterior_batch,
)

__all__ = [
    "DemodNetwork",
    "posterior",
    "OracleDemodulator",
    "UniformDemodulator",
    "exact_posterior_oracle",
    "log_posterior_batch",
    "posterior_batch",
]
