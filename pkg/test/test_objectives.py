"""
测试目标函数与互信息参照

测试场景：
1. 交叉熵与修正损失（闭式结果、截断、熵项梯度）
2. 求积参照（单点、高 SNR 饱和、与蒙特卡洛一致、单调性与上界）
3. 蒙特卡洛参照（可复现、标准误差缩放、Rayleigh 信道）
4. 交叉熵分解恒等式
5. 下界方向: −L̂ ≤ I + 3σ
6. 参考曲线
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
)
from src.channel import ChannelModel, SnrPoint, capacity_awgn
from src.demodulator import DemodNetwork, OracleDemodulator, UniformDemodulator
from src.errors import (
    InvalidArgumentError,
    UnsupportedChannelError,
    UnsupportedOrderError,
)
from src.modulation import Constellation, normalize, qam
from src.objectives import (
    ClampCounter,
    LossBreakdown,
    MICurve,
    capacity_curve,
    corrected_loss,
    cross_entropy_loss,
    decomposition_check,
    golden_section_maximize,
    mb_qam_curve,
    mi_lower_bound_monte_carlo,
    mi_oracle,
    mi_oracle_monte_carlo,
    mi_oracle_quadrature,
    qam_curve,
    rayleigh_bound_curve,
    require_awgn,
    source_entropy,
)
from src.shaping import SymbolDistribution

AWGN = ChannelModel.awgn()


def _random_distribution(rng, order):
    probs = rng.dirichlet(np.ones(order))
    return SymbolDistribution(probs / probs.sum())


# ---- 损失 ----


def test_cross_entropy_closed_forms():
    symbols = np.array([0, 3, 1, 2])
    one_hot = constant(np.eye(4)[symbols])
    assert cross_entropy_loss(symbols, one_hot).item() == 0.0

    uniform = constant(np.full((4, 16), 1 / 16))
    assert cross_entropy_loss(symbols, uniform).item() == pytest.approx(4.0)


def test_cross_entropy_clamps_zero_posterior():
    counter = ClampCounter()
    posteriors = constant(np.array([[0.0, 1.0], [0.5, 0.5]]))
    loss = cross_entropy_loss([0, 0], posteriors, counter)
    assert counter.count == 1
    assert math.isfinite(loss.item())
    assert loss.item() == pytest.approx((-math.log2(1e-30) + 1.0) / 2)


def test_cross_entropy_rejects_empty_batch():
    with pytest.raises(InvalidArgumentError):
        cross_entropy_loss(np.array([], dtype=int), constant(np.zeros((0, 4))))


def test_corrected_loss_uniform_case():
    symbols = np.arange(16)
    loss = corrected_loss(
        symbols, constant(np.full((16, 16), 1 / 16)), SymbolDistribution.uniform(16)
    )
    b = loss.breakdown
    assert b.cross_entropy_bits == pytest.approx(4.0)
    assert b.source_entropy_bits == pytest.approx(4.0)
    assert b.corrected_loss_bits == pytest.approx(0.0, abs=1e-12)
    assert b.mi_lower_bound_bits == pytest.approx(0.0, abs=1e-12)


def test_corrected_loss_identity_is_exact():
    rng = np.random.default_rng(0)
    posteriors = constant(ops.softmax_rows(rng.normal(size=(32, 8))))
    symbols = rng.integers(0, 8, size=32)
    loss = corrected_loss(symbols, posteriors, constant(rng.normal(size=(32, 8))))
    assert loss.corrected.item() == loss.cross_entropy.item() - loss.entropy.item()


def test_entropy_term_gradient_flows_to_distribution():
    rng = np.random.default_rng(1)
    posterior_logits = Parameter(rng.normal(size=(6, 4)), "posterior")
    source_logits = Parameter(rng.normal(size=(6, 4)), "source")
    symbols = rng.integers(0, 4, size=6)

    def loss_fn():
        return corrected_loss(symbols, ops.softmax(posterior_logits), source_logits).corrected

    backward(loss_fn())
    assert np.abs(source_logits.grad).max() > 0
    assert finite_difference_check(loss_fn, [posterior_logits, source_logits]).passed(1e-4)


def test_source_entropy_of_logits_is_batch_mean():
    logits = constant(np.vstack([np.zeros(4), np.log([0.5, 0.25, 0.125, 0.125])]))
    assert source_entropy(logits).item() == pytest.approx((2.0 + 1.75) / 2)


def test_noiseless_identity_with_exact_posterior():
    rng = np.random.default_rng(2)
    c = qam(4)
    dist = SymbolDistribution(np.array([0.4, 0.3, 0.2, 0.1]))
    symbols = rng.choice(4, size=1000, p=dist.probs)
    posteriors = constant(OracleDemodulator(c, dist).predict(c.points[symbols], math.inf))
    b = corrected_loss(symbols, posteriors, dist).breakdown
    assert b.cross_entropy_bits == 0.0
    assert b.mi_lower_bound_bits == pytest.approx(dist.entropy_bits())
    assert mi_oracle_quadrature(c, dist, SnrPoint(math.inf)) == dist.entropy_bits()


def test_loss_breakdown_dict():
    b = LossBreakdown(3.5, 4.0)
    data = b.to_dict()
    assert data["corrected_loss_bits"] == pytest.approx(-0.5)
    assert LossBreakdown.from_dict(data) == b


# ---- 求积参照 ----


def test_quadrature_single_point_is_zero():
    c = Constellation(np.array([[1.0, 0.0]]))
    assert mi_oracle_quadrature(c, SymbolDistribution.uniform(1), SnrPoint(5.0)) == 0.0


def test_quadrature_qpsk_saturates():
    mi = mi_oracle_quadrature(qam(4), SymbolDistribution.uniform(4), SnrPoint(40.0))
    assert mi == pytest.approx(2.0, abs=1e-4)


def test_quadrature_agrees_with_monte_carlo_at_0db():
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    exact = mi_oracle_quadrature(c, dist, SnrPoint(0.0))
    estimate, std_error = mi_oracle_monte_carlo(
        c, dist, AWGN, SnrPoint(0.0), 1_000_000, np.random.default_rng(3)
    )
    logger.info(f"QPSK 0 dB: 求积 {exact:.5f}, 蒙特卡洛 {estimate:.5f} ± {std_error:.5f}")
    assert abs(exact - estimate) < 0.005


def test_quadrature_errors():
    dist = SymbolDistribution.uniform(4)
    with pytest.raises(UnsupportedChannelError):
        mi_oracle_quadrature(qam(4), dist, SnrPoint(5.0), channel=ChannelModel.rayleigh())
    with pytest.raises(InvalidArgumentError):
        mi_oracle_quadrature(qam(4), dist, SnrPoint(5.0), nodes=20)
    with pytest.raises(InvalidArgumentError):
        mi_oracle_quadrature(qam(16), dist, SnrPoint(5.0))
    big = Constellation(np.random.default_rng(4).normal(size=(1025, 2)))
    with pytest.raises(UnsupportedOrderError):
        mi_oracle_quadrature(big, SymbolDistribution.uniform(1025), SnrPoint(5.0))


@pytest.mark.parametrize("order", [4, 16])
def test_quadrature_monotone_and_bounded(order):
    c = qam(order)
    dist = SymbolDistribution.uniform(order)
    grid = [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 30.0]
    values = [mi_oracle_quadrature(c, dist, SnrPoint(s)) for s in grid]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    for snr_db, mi in zip(grid, values):
        assert mi <= min(capacity_awgn(SnrPoint(snr_db)), dist.entropy_bits()) + 1e-9


# ---- 蒙特卡洛参照 ----


def test_monte_carlo_agrees_with_quadrature_within_three_sigma():
    c = qam(16)
    dist = SymbolDistribution.uniform(16)
    snr = SnrPoint(5.0)
    estimate, std_error = mi_oracle_monte_carlo(
        c, dist, AWGN, snr, 200_000, np.random.default_rng(5)
    )
    assert abs(estimate - mi_oracle_quadrature(c, dist, snr)) < 3 * std_error


def test_monte_carlo_is_reproducible():
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    first = mi_oracle_monte_carlo(c, dist, AWGN, SnrPoint(3.0), 100_000, np.random.default_rng(6))
    second = mi_oracle_monte_carlo(c, dist, AWGN, SnrPoint(3.0), 100_000, np.random.default_rng(6))
    assert first == second


def test_monte_carlo_standard_error_scaling():
    c = qam(16)
    dist = SymbolDistribution.uniform(16)
    rng = np.random.default_rng(7)
    _, se_small = mi_oracle_monte_carlo(c, dist, AWGN, SnrPoint(5.0), 100_000, rng)
    _, se_large = mi_oracle_monte_carlo(c, dist, AWGN, SnrPoint(5.0), 200_000, rng)
    assert se_large / se_small == pytest.approx(1 / math.sqrt(2.0), rel=0.2)


def test_monte_carlo_requires_enough_samples():
    with pytest.raises(InvalidArgumentError):
        mi_oracle_monte_carlo(
            qam(4), SymbolDistribution.uniform(4), AWGN, SnrPoint(0.0), 1000,
            np.random.default_rng(8),
        )


def test_monte_carlo_rayleigh():
    c = qam(16)
    dist = SymbolDistribution.uniform(16)
    snr = SnrPoint(20.0)
    mi, std_error = mi_oracle_monte_carlo(
        c, dist, ChannelModel.rayleigh(), snr, 100_000, np.random.default_rng(9)
    )
    assert std_error > 0
    assert 0.0 < mi < mi_oracle_quadrature(c, dist, snr)


def test_mi_oracle_dispatch():
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    rng = np.random.default_rng(10)
    mi, std_error = mi_oracle(c, dist, AWGN, SnrPoint(5.0), 100_000, rng)
    assert std_error == 0.0
    assert mi == mi_oracle_quadrature(c, dist, SnrPoint(5.0))
    _, std_error = mi_oracle(c, dist, ChannelModel.rayleigh(), SnrPoint(5.0), 100_000, rng)
    assert std_error > 0


# ---- 分解 ----


def test_decomposition_with_exact_demodulator():
    rng = np.random.default_rng(11)
    c = qam(4)
    dist = SymbolDistribution(np.array([0.4, 0.3, 0.2, 0.1]))
    result = decomposition_check(c, dist, OracleDemodulator(c, dist), SnrPoint(5.0), 200_000, rng)
    assert abs(result.kl_bits) < 1e-9
    assert result.holds(3.0)


def test_decomposition_with_untrained_network():
    rng = np.random.default_rng(12)
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    demod = DemodNetwork(4, rng, hidden_units=16)
    result = decomposition_check(c, dist, demod, SnrPoint(5.0), 200_000, rng)
    logger.info(f"分解残差 {result.residual_bits:.2e}, σ {result.combined_std_error:.2e}")
    assert result.kl_bits > 0
    assert result.holds(3.0)


def test_decomposition_with_uniform_demodulator():
    rng = np.random.default_rng(13)
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    result = decomposition_check(c, dist, UniformDemodulator(4), SnrPoint(5.0), 200_000, rng)
    assert result.cross_entropy_bits == pytest.approx(2.0, abs=1e-12)
    assert result.holds(3.0)
    assert set(result.to_dict()) >= {"residual_bits", "kl_bits", "mi_bits"}


def test_lower_bound_direction_for_arbitrary_demodulators():
    rng = np.random.default_rng(14)
    for trial in range(20):
        order = (2, 4, 16)[trial % 3]
        dist = _random_distribution(rng, order)
        c = normalize(rng.normal(size=(order, 2)), dist)
        snr = SnrPoint(float(rng.uniform(0.0, 15.0)))
        demod = DemodNetwork(order, rng, hidden_units=8)
        bound, std_error = mi_lower_bound_monte_carlo(c, dist, demod, AWGN, snr, 100_000, rng)
        assert bound <= mi_oracle_quadrature(c, dist, snr) + 3 * std_error


def test_lower_bound_is_tight_for_exact_demodulator():
    rng = np.random.default_rng(15)
    c = qam(16)
    dist = SymbolDistribution.uniform(16)
    snr = SnrPoint(8.0)
    bound, std_error = mi_lower_bound_monte_carlo(
        c, dist, OracleDemodulator(c, dist), AWGN, snr, 200_000, rng
    )
    assert abs(bound - mi_oracle_quadrature(c, dist, snr)) < 3 * std_error + 1e-6


# ---- 参考曲线 ----


def test_golden_section_maximize():
    x, value = golden_section_maximize(lambda v: -((v - 2.0) ** 2), 0.0, 5.0)
    assert x == pytest.approx(2.0, abs=1e-3)
    assert value == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(InvalidArgumentError):
        golden_section_maximize(lambda v: v, 1.0, 1.0)


def test_golden_section_evaluates_one_new_point_per_iteration():
    calls = []

    def fn(v):
        calls.append(v)
        return -((v - 1.3) ** 2)

    x, _ = golden_section_maximize(fn, 0.0, 10.0, tol=1e-4)
    iterations = math.ceil(math.log(10.0 / 1e-4) / math.log((1 + math.sqrt(5)) / 2))
    assert x == pytest.approx(1.3, abs=1e-4)
    assert len(calls) <= iterations + 4


def test_capacity_curve_rows():
    curve = capacity_curve([0.0, 15.0])
    assert curve.scheme == "capacity" and curve.order == 0
    assert curve.entries[0] == (0.0, 1.0)
    assert curve.entries[1][1] == pytest.approx(5.0278, abs=1e-4)


def test_qam_curve_saturates():
    curve = qam_curve(16, [40.0])
    assert curve.values[0] == pytest.approx(4.0, abs=1e-3)


def test_mb_qam_dominates_qam():
    grid = [0.0, 6.0, 12.0]
    shaped = mb_qam_curve(16, grid)
    plain = qam_curve(16, grid)
    assert shaped.scheme == "mb_qam"
    assert all(s >= p - 1e-9 for s, p in zip(shaped.values, plain.values))


def test_rayleigh_bound_curve():
    curve = rayleigh_bound_curve([0.0, 10.0], 100_000, np.random.default_rng(16))
    assert curve.scheme == "rayleigh_bound" and curve.order == 0
    assert curve.values[0] < curve.values[1]


def test_require_awgn():
    require_awgn(AWGN, "mb_qam")
    with pytest.raises(UnsupportedChannelError):
        require_awgn(ChannelModel.rayleigh(), "mb_qam")


def test_mi_curve_validation():
    with pytest.raises(InvalidArgumentError):
        MICurve("qam", 4, [(5.0, 1.0), (0.0, 1.5)])
    with pytest.raises(InvalidArgumentError):
        MICurve("qam", 4, [(5.0, 2.5)])
    assert MICurve("capacity", 0, [(40.0, 13.3)]).values == [13.3]
