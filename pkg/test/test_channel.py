"""
测试信道

测试场景：
1. AWGN: 无噪声哨兵、噪声方差、对 x 可导
2. Rayleigh + LMMSE: 无噪声钩子、完美 CSI 钩子、低 SNR 估计、重新抽取保护及其次数上限
3. 容量参考曲线
"""

import math

import numpy as np
import pytest
from loguru import logger

from src.autodiff import (
    Parameter,
    backward,
    constant,
    finite_difference_check,
    ops,
    random_projection_loss,
)
from src.channel import (
    ChannelModel,
    SnrPoint,
    apply_fading,
    awgn_transmit,
    capacity_awgn,
    capacity_rayleigh_ergodic,
    capacity_rayleigh_lower_bound,
    draw_fading,
    lmmse_coefficient,
    rayleigh_lmmse_transmit,
)
from src.channel.rayleigh import MAX_ESTIMATE_REDRAWS, MIN_ESTIMATE_MAGNITUDE
from src.errors import InvalidArgumentError


def test_snr_point_conversions():
    assert SnrPoint(10.0).snr_linear == pytest.approx(10.0)
    assert SnrPoint(10.0).noise_variance == pytest.approx(0.1)
    assert SnrPoint(math.inf).noise_variance == 0.0


def test_awgn_noise_off_sentinel():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(100, 2))
    y = awgn_transmit(x, SnrPoint(math.inf), rng)
    np.testing.assert_array_equal(y.value, x)


@pytest.mark.parametrize("snr_db,expected,tolerance", [(0.0, 1.0, 0.005), (10.0, 0.1, 0.001)])
def test_awgn_noise_variance(snr_db, expected, tolerance):
    rng = np.random.default_rng(1)
    y = awgn_transmit(np.zeros((1_000_000, 2)), SnrPoint(snr_db), rng)
    assert (y.value**2).sum(axis=1).mean() == pytest.approx(expected, abs=tolerance)


def test_awgn_per_sample_snr():
    rng = np.random.default_rng(2)
    snr_db = np.repeat([0.0, 20.0], 200_000)
    y = awgn_transmit(np.zeros((snr_db.size, 2)), snr_db, rng).value
    power = (y**2).sum(axis=1)
    assert power[:200_000].mean() == pytest.approx(1.0, abs=0.01)
    assert power[200_000:].mean() == pytest.approx(0.01, abs=1e-4)


def test_awgn_is_differentiable_in_x():
    x = Parameter(np.zeros((5, 2)), "x")
    y = awgn_transmit(x, SnrPoint(10.0), np.random.default_rng(3))
    backward(ops.sum(y))
    np.testing.assert_array_equal(x.grad, np.ones((5, 2)))


def test_rayleigh_noise_free_hook():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(1000, 2))
    snr = SnrPoint(5.0)
    rho = snr.snr_linear
    y, realization = rayleigh_lmmse_transmit(constant(x), snr, rng, noise_free=True)
    np.testing.assert_allclose(realization.h_hat, rho / (rho + 1) * realization.h, rtol=1e-12)
    np.testing.assert_allclose(y.value, x * (rho + 1) / rho, rtol=1e-10, atol=1e-12)


def test_rayleigh_noise_free_high_snr_recovers_input():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(100, 2))
    y, _ = rayleigh_lmmse_transmit(constant(x), SnrPoint(120.0), rng, noise_free=True)
    np.testing.assert_allclose(y.value, x, rtol=1e-9, atol=1e-12)


def test_rayleigh_test_hooks():
    rng = np.random.default_rng(6)
    perfect = draw_fading(1000, SnrPoint(10.0), rng, perfect_csi=True)
    np.testing.assert_array_equal(perfect.h_hat, perfect.h)
    assert perfect.estimate_error.max() == 0.0

    flat = draw_fading(1000, SnrPoint(10.0), rng, fading=False)
    np.testing.assert_array_equal(flat.h, np.ones(1000))


def test_rayleigh_low_snr_estimate_has_zero_mean():
    rng = np.random.default_rng(7)
    realization = draw_fading(100_000, SnrPoint(-30.0), rng)
    h_hat = realization.h_hat
    standard_error = np.abs(h_hat).std() / np.sqrt(h_hat.size)
    assert abs(h_hat.mean()) < 5 * standard_error
    assert np.all(np.abs(h_hat) >= 1e-12)


def test_rayleigh_estimate_redraw_guard(monkeypatch):
    monkeypatch.setattr("src.channel.rayleigh.MIN_ESTIMATE_MAGNITUDE", 0.05)
    realization = draw_fading(10_000, SnrPoint(0.0), np.random.default_rng(8))
    assert realization.redraws > 0
    assert np.all(np.abs(realization.h_hat) >= 0.05)


def _unit_phase(values: np.ndarray) -> np.ndarray:
    return values / np.abs(values)


def test_rayleigh_noise_free_estimate_below_floor_is_not_redrawn():
    """无噪声时 ĥ = c·h 是确定值，−130 dB 下 c ≈ 1e-13，只能抬到下限"""
    realization = draw_fading(4, SnrPoint(-130.0), np.random.default_rng(9), noise_free=True)
    assert realization.redraws == 0
    np.testing.assert_allclose(np.abs(realization.h_hat), MIN_ESTIMATE_MAGNITUDE, rtol=1e-12)
    np.testing.assert_allclose(_unit_phase(realization.h_hat), _unit_phase(realization.h))


def test_rayleigh_redraws_are_bounded_at_extremely_low_snr():
    messages = []
    handler = logger.add(messages.append, level="WARNING")
    try:
        realization = draw_fading(4, SnrPoint(-300.0), np.random.default_rng(10))
    finally:
        logger.remove(handler)
    assert realization.redraws == 4 * MAX_ESTIMATE_REDRAWS
    np.testing.assert_allclose(np.abs(realization.h_hat), MIN_ESTIMATE_MAGNITUDE, rtol=1e-12)
    assert np.all(np.isfinite(realization.equalized_noise_variance))
    assert any("下限" in str(m) for m in messages)


def test_lmmse_coefficient():
    np.testing.assert_allclose(lmmse_coefficient(np.array([1.0, 9.0]), 1), [0.5, 0.9])
    np.testing.assert_allclose(lmmse_coefficient(np.array([1.0]), 3), [0.75])
    assert lmmse_coefficient(np.array(np.inf), 1) == 1.0


def test_rayleigh_gradient_in_x():
    rng = np.random.default_rng(9)
    realization = draw_fading(6, SnrPoint(10.0), rng)
    x = Parameter(rng.normal(size=(6, 2)), "x")
    loss_fn = random_projection_loss(lambda: apply_fading(x, realization), seed=10)
    assert finite_difference_check(loss_fn, [x]).passed(1e-4)


def test_channel_model_validation():
    assert ChannelModel.rayleigh(2).to_dict() == {"kind": "rayleigh_lmmse", "pilot_count": 2}
    with pytest.raises(InvalidArgumentError):
        ChannelModel.rayleigh(0)


def test_capacity_awgn_closed_form():
    assert capacity_awgn(SnrPoint(0.0)) == pytest.approx(1.0)
    assert capacity_awgn(SnrPoint(15.0)) == pytest.approx(5.0278, abs=1e-4)


def test_rayleigh_bound_perfect_csi_limit():
    snr = SnrPoint(60.0)
    bound = capacity_rayleigh_lower_bound(
        snr, 100_000, np.random.default_rng(11), perfect_csi=True, fading=False
    )
    assert bound == pytest.approx(math.log2(1 + snr.snr_linear), rel=1e-12)


def test_rayleigh_bound_below_ergodic_capacity():
    for snr_db in (0.0, 10.0, 20.0, 30.0):
        snr = SnrPoint(snr_db)
        bound = capacity_rayleigh_lower_bound(snr, 100_000, np.random.default_rng(12))
        ergodic = capacity_rayleigh_ergodic(snr, 100_000, np.random.default_rng(13))
        assert bound <= ergodic
        assert ergodic <= capacity_awgn(snr)


def test_rayleigh_bound_is_monotone():
    values = [
        capacity_rayleigh_lower_bound(SnrPoint(s), 100_000, np.random.default_rng(14))
        for s in (0.0, 5.0, 10.0, 15.0, 20.0)
    ]
    assert all(b >= a - 0.01 for a, b in zip(values, values[1:]))


def test_capacity_requires_enough_samples():
    with pytest.raises(InvalidArgumentError):
        capacity_rayleigh_lower_bound(SnrPoint(10.0), 1000, np.random.default_rng(15))
