"""
测试调制器

测试场景：
1. 能量归一化（闭式结果、尺度不变性、退化输入、梯度）
2. QAM 星座
3. Maxwell-Boltzmann 整形与 ν 搜索
4. 调制（精确选行、平均能量）
5. 互信息对整体相位旋转不变
"""

import numpy as np
import pytest

from src.autodiff import Parameter, constant, finite_difference_check, ops, random_projection_loss
from src.channel import SnrPoint
from src.errors import DegenerateInputError, DimensionError, UnsupportedOrderError
from src.modulation import (
    Constellation,
    MaxwellBoltzmannShaping,
    energy_error,
    energy_scale,
    initial_points,
    maxwell_boltzmann_distribution,
    modulate,
    normalize,
    qam,
    qam_grid,
)
from src.objectives import mi_oracle_quadrature, optimize_maxwell_boltzmann
from src.shaping import GumbelSample, SymbolDistribution, gumbel_softmax, sample_gumbel

QPSK = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]) / np.sqrt(2.0)


def _random_distribution(rng, order):
    probs = rng.dirichlet(np.ones(order))
    return SymbolDistribution(probs / probs.sum())


def test_normalize_keeps_unit_energy_qpsk():
    c = normalize(QPSK, SymbolDistribution.uniform(4))
    np.testing.assert_allclose(c.points, QPSK, atol=1e-15)
    assert c.distribution is not None


def test_normalize_is_scale_invariant():
    rng = np.random.default_rng(0)
    points = rng.normal(size=(8, 2))
    dist = _random_distribution(rng, 8)
    np.testing.assert_allclose(normalize(3.0 * points, dist).points, normalize(points, dist).points)


def test_16qam_scale_factor():
    scale = energy_scale(constant(qam_grid(16)), constant(np.full((1, 16), 1 / 16)))
    assert scale.item() == pytest.approx(1 / np.sqrt(10.0), rel=1e-12)


def test_energy_constraint_under_random_distributions():
    rng = np.random.default_rng(1)
    for order in (2, 4, 16, 64):
        dist = _random_distribution(rng, order)
        c = normalize(rng.normal(size=(order, 2)), dist)
        assert energy_error(c.points, dist) < 1e-12
        assert c.mean_energy(dist) == pytest.approx(1.0)


def test_zero_energy_is_degenerate():
    with pytest.raises(DegenerateInputError):
        normalize(np.zeros((4, 2)), SymbolDistribution.uniform(4))
    # 支撑集内只有原点
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DegenerateInputError):
        normalize(points, SymbolDistribution(np.array([1.0, 0.0, 0.0, 0.0])))


def test_energy_scale_gradient_reaches_points_and_distribution():
    rng = np.random.default_rng(2)
    points = Parameter(rng.normal(size=(6, 2)), "points")
    logits = Parameter(rng.normal(size=(4, 6)), "logits")

    def output():
        return ops.matmul(energy_scale(points, ops.softmax(logits)), ops.sum(points, axis=0))

    result = finite_difference_check(random_projection_loss(output, seed=3), [points, logits])
    assert result.passed(1e-4)


def test_constellation_shape_is_checked():
    with pytest.raises(DimensionError):
        Constellation(np.zeros((4, 3)))


def test_qam_order_4_is_qpsk():
    c = qam(4)
    np.testing.assert_allclose(c.points, QPSK, atol=1e-15)
    np.testing.assert_allclose(c.points[0], [1 / np.sqrt(2.0), 1 / np.sqrt(2.0)])


def test_qam_order_16_minimum_distance():
    c = qam(16)
    diff = c.points[:, None, :] - c.points[None, :, :]
    distances = np.sqrt((diff**2).sum(axis=2))
    distances[np.diag_indices(16)] = np.inf
    assert distances.min() == pytest.approx(2 / np.sqrt(10.0))
    assert c.mean_energy() == pytest.approx(1.0)


def test_qam_rejects_non_square_order():
    with pytest.raises(UnsupportedOrderError):
        qam(8)


def test_qam_64_saturates_at_high_snr():
    mi = mi_oracle_quadrature(qam(64), SymbolDistribution.uniform(64), SnrPoint(40.0))
    assert mi == pytest.approx(6.0, abs=1e-3)


def test_initial_points_are_jittered_grid():
    rng = np.random.default_rng(4)
    points = initial_points(16, rng, jitter=0.01)
    assert points.shape == (16, 2)
    assert np.abs(points - qam(16).points).max() < 0.1
    assert initial_points(8, rng).shape == (8, 2)


def test_maxwell_boltzmann_limits():
    base = qam(16)
    np.testing.assert_allclose(maxwell_boltzmann_distribution(base, 0.0).probs, 1 / 16)

    dist = maxwell_boltzmann_distribution(base, 1e6)
    energies = (base.points**2).sum(axis=1)
    inner = np.isclose(energies, energies.min())
    assert inner.sum() == 4
    np.testing.assert_allclose(dist.probs[inner], 0.25)
    assert dist.probs[~inner].sum() < 1e-12


def test_maxwell_boltzmann_constellation_is_renormalized():
    shaping = MaxwellBoltzmannShaping(1.5, qam(16))
    assert energy_error(shaping.constellation().points, shaping.distribution) < 1e-12


def test_maxwell_boltzmann_search_is_reproducible():
    snr = SnrPoint(9.0)
    first = optimize_maxwell_boltzmann(16, snr, bounds=(0.0, 5.0))
    second = optimize_maxwell_boltzmann(16, snr, bounds=(0.0, 5.0))
    assert abs(first.nu - second.nu) < 1e-3
    assert 0.0 <= first.nu <= 5.0
    assert abs(optimize_maxwell_boltzmann(16, snr).nu - first.nu) < 1e-3
    uniform = mi_oracle_quadrature(qam(16), SymbolDistribution.uniform(16), snr)
    assert first.mi_bits >= uniform


def test_modulate_qpsk_stream_has_unit_energy():
    rng = np.random.default_rng(5)
    logits = np.zeros((100_000, 4))
    sample = gumbel_softmax(logits, sample_gumbel(logits.shape, rng), 10.0)
    x = modulate(sample, qam(4))
    assert (x.value**2).sum(axis=1).mean() == pytest.approx(1.0, abs=0.02)


def test_modulate_one_hot_reproduces_rows():
    c = qam(16)
    index = np.arange(16)
    hard = np.eye(16)
    sample = GumbelSample(hard_onehot=hard, soft=constant(hard), symbol_index=index)
    np.testing.assert_array_equal(modulate(sample, c).value, c.points)


def test_modulate_order_mismatch():
    hard = np.eye(4)
    sample = GumbelSample(hard_onehot=hard, soft=constant(hard), symbol_index=np.arange(4))
    with pytest.raises(DimensionError):
        modulate(sample, qam(16))


def test_mutual_information_is_rotation_invariant():
    rng = np.random.default_rng(6)
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    snr = SnrPoint(3.0)
    reference = mi_oracle_quadrature(c, dist, snr)
    for angle in rng.uniform(0, 2 * np.pi, size=3):
        assert mi_oracle_quadrature(c.rotated(angle), dist, snr) == pytest.approx(
            reference, abs=1e-6
        )
