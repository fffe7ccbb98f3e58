"""
快速不变量检查

梯度检查、采样器分布检查、求积与蒙特卡洛互信息交叉检查、交叉熵分解残差。
"""

import time
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from loguru import logger

from src.autodiff import (
    Activation,
    DenseLayer,
    Parameter,
    constant,
    finite_difference_check,
    ops,
    random_projection_loss,
)
from src.channel import ChannelModel, SnrPoint
from src.demodulator import DemodNetwork
from src.modulation import energy_error, energy_scale, normalize, qam
from src.objectives import (
    corrected_loss,
    decomposition_check,
    mi_oracle_monte_carlo,
    mi_oracle_quadrature,
)
from src.shaping import (
    SymbolDistribution,
    gumbel_softmax,
    sample_gumbel,
    sample_gumbel_max,
)

GRAD_TOLERANCE = 1e-4
TV_TOLERANCE = 0.01
SAMPLER_DRAWS = 100_000
ORACLE_SAMPLES = 200_000
ORACLE_TOLERANCE = 0.005
DECOMPOSITION_SAMPLES = 200_000
DECOMPOSITION_SIGMAS = 4.0


@dataclass
class CheckResult:
    """一项检查的结果"""

    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def to_row(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
        }


def check_dense_gradients(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    hidden = DenseLayer(3, 8, Activation.RELU, rng, name="check.hidden")
    head = DenseLayer(8, 4, Activation.SOFTMAX, rng, name="check.head")
    inputs = constant(rng.normal(size=(6, 3)))
    loss_fn = random_projection_loss(lambda: head(hidden(inputs)), seed=seed)
    result = finite_difference_check(loss_fn, hidden.parameters() + head.parameters())
    return result.passed(GRAD_TOLERANCE), f"max rel err {result.max_relative_error:.2e}"


def check_gumbel_softmax_gradients(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    logits = Parameter(rng.normal(size=(5, 8)), "check.logits")
    gumbels = sample_gumbel((5, 8), rng)
    loss_fn = random_projection_loss(lambda: gumbel_softmax(logits, gumbels, 0.7).soft, seed)
    result = finite_difference_check(loss_fn, [logits])
    return result.passed(GRAD_TOLERANCE), f"max rel err {result.max_relative_error:.2e}"


def check_normalization_gradients(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    points = Parameter(rng.normal(size=(8, 2)), "check.points")
    logits = Parameter(rng.normal(size=(3, 8)), "check.logits")

    def output():
        scale = energy_scale(points, ops.softmax(logits))
        return ops.matmul(scale, ops.sum(points, axis=0))

    result = finite_difference_check(random_projection_loss(output, seed), [points, logits])
    return result.passed(GRAD_TOLERANCE), f"max rel err {result.max_relative_error:.2e}"


def check_loss_gradients(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    posterior_logits = Parameter(rng.normal(size=(6, 4)), "check.posterior")
    source_logits = Parameter(rng.normal(size=(6, 4)), "check.source")
    symbols = rng.integers(0, 4, size=6)

    def loss_fn():
        posteriors = ops.softmax(posterior_logits)
        return corrected_loss(symbols, posteriors, source_logits).corrected

    result = finite_difference_check(loss_fn, [posterior_logits, source_logits])
    return result.passed(GRAD_TOLERANCE), f"max rel err {result.max_relative_error:.2e}"


def check_energy_normalization(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(16))
    dist = SymbolDistribution(probs / probs.sum())
    c = normalize(rng.normal(size=(16, 2)), dist)
    error = energy_error(c.points, dist)
    return error < 1e-12, f"|E - 1| = {error:.1e}"


def check_sampler_law(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(16))
    dist = SymbolDistribution(probs / probs.sum())

    max_draws = sample_gumbel_max(dist, rng, size=SAMPLER_DRAWS)
    logits = np.tile(np.log(dist.probs), (SAMPLER_DRAWS, 1))
    hard = gumbel_softmax(logits, sample_gumbel(logits.shape, rng), 10.0).symbol_index

    tv = []
    for draws in (max_draws, hard):
        empirical = np.bincount(draws, minlength=dist.order) / draws.size
        tv.append(0.5 * float(np.abs(empirical - dist.probs).sum()))
    return max(tv) < TV_TOLERANCE, f"TV gumbel-max {tv[0]:.4f}, hard softmax {tv[1]:.4f}"


def check_oracle_agreement(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    snr = SnrPoint(5.0)
    exact = mi_oracle_quadrature(c, dist, snr)
    estimate, std_error = mi_oracle_monte_carlo(
        c, dist, ChannelModel.awgn(), snr, ORACLE_SAMPLES, rng
    )
    gap = abs(exact - estimate)
    passed = gap < max(ORACLE_TOLERANCE, 3 * std_error)
    return passed, f"quadrature {exact:.4f} vs MC {estimate:.4f} ± {std_error:.4f}"


def check_decomposition(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    c = qam(4)
    dist = SymbolDistribution.uniform(4)
    demod = DemodNetwork(4, rng, hidden_units=16)
    result = decomposition_check(c, dist, demod, SnrPoint(5.0), DECOMPOSITION_SAMPLES, rng)
    passed = result.holds(DECOMPOSITION_SIGMAS)
    return passed, f"residual {result.residual_bits:.2e} (σ {result.combined_std_error:.2e})"


CHECKS: List[Tuple[str, Callable[[int], Tuple[bool, str]]]] = [
    ("gradient: dense layers", check_dense_gradients),
    ("gradient: gumbel-softmax", check_gumbel_softmax_gradients),
    ("gradient: energy normalization", check_normalization_gradients),
    ("gradient: corrected loss", check_loss_gradients),
    ("energy constraint", check_energy_normalization),
    ("sampler law (TV)", check_sampler_law),
    ("oracle cross-check", check_oracle_agreement),
    ("decomposition residual", check_decomposition),
]


def run_checks(seed: int = 0) -> List[CheckResult]:
    """依次执行全部检查，单项异常视为失败"""
    results = []
    for name, check in CHECKS:
        started = time.perf_counter()
        try:
            passed, detail = check(seed)
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(name, passed, detail, time.perf_counter() - started))
    return results


def log_table(results: List[CheckResult]):
    width = max(len(r.name) for r in results)
    logger.info("=" * 80)
    logger.info(f"{'检查项'.ljust(width)}  结果  耗时     说明")
    logger.info("-" * 80)
    for r in results:
        mark = "✅ 通过" if r.passed else "❌ 失败"
        logger.info(f"{r.name.ljust(width)}  {mark}  {r.seconds:6.2f}s  {r.detail}")
    logger.info("=" * 80)
