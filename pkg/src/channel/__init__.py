"""
信道模块

可微的随机信道: AWGN 与带 LMMSE 估计和均衡的 Rayleigh 块衰落，以及容量参考曲线。
"""

from .awgn import awgn_transmit, draw_awgn_noise
from .capacity import capacity_awgn, capacity_rayleigh_ergodic, capacity_rayleigh_lower_bound
from .models import ChannelKind, ChannelModel, SnrPoint, noise_variance_array, snr_linear_array
from .rayleigh import (
    FadingRealization,
    apply_fading,
    draw_fading,
    lmmse_coefficient,
    rayleigh_lmmse_transmit,
)

__all__ = [
    "awgn_transmit",
    "draw_awgn_noise",
    "capacity_awgn",
    "capacity_rayleigh_ergodic",
    "capacity_rayleigh_lower_bound",
    "ChannelKind",
    "ChannelModel",
    "SnrPoint",
    "noise_variance_array",
    "snr_linear_array",
    "FadingRealization",
    "apply_fading",
    "draw_fading",
    "lmmse_coefficient",
    "rayleigh_lmmse_transmit",
]
