"""
测试训练配置、训练循环与评估

测试场景：
1. 配置校验、schedule、覆盖项与行号定位
2. 同一 (配置, 种子) 的训练逐位可复现
3. 三种模式冻结正确的参数
4. 检查点能量约束、发散诊断
5. 检查点恢复
6. 评估：外推标记、下界方向、可复现
"""

import json

import numpy as np
import pytest
from loguru import logger

from src.autodiff import backward, zero_grad
from src.channel import ChannelModel
from src.errors import ConfigError, InvalidArgumentError, NumericalError, TrainingDivergedError
from src.modulation import qam
from src.trainer import (
    POINTS_NAME,
    ShapingMode,
    ShapingSystem,
    TrainConfig,
    Trainer,
    config_hash,
    evaluate,
    load_config,
    parse_override,
    schedule_value,
    train,
    train_with_uncorrected_loss,
)


def _tiny_config(mode="joint", order=4, steps=20, seed=0) -> TrainConfig:
    return TrainConfig(
        mode=mode,
        order=order,
        snr_range_db=[0.0, 20.0],
        batch_schedule=[[steps, 64]],
        lr_schedule=[[steps, 1e-3]],
        seed=seed,
        steps_total=steps,
        checkpoint_every=10,
        hidden_units=16,
    )


@pytest.fixture(scope="module")
def trained_joint():
    trainer = Trainer(_tiny_config().validate())
    report = trainer.run()
    return trainer, report


# ---- 配置 ----


def test_default_config_is_valid():
    cfg = TrainConfig().validate()
    assert cfg.mode == ShapingMode.JOINT
    assert cfg.order == 16
    assert cfg.channel_model == ChannelModel.awgn()


def test_config_errors_name_the_field():
    with pytest.raises(ConfigError) as e:
        TrainConfig(tau=-1.0).validate()
    assert e.value.field == "tau"

    with pytest.raises(ConfigError) as e:
        TrainConfig(mode="both")
    assert e.value.field == "mode"

    with pytest.raises(ConfigError) as e:
        TrainConfig.from_dict({"temperature": 1.0})
    assert e.value.field == "temperature"

    with pytest.raises(ConfigError) as e:
        TrainConfig(mode="ps_only", order=8).validate()
    assert e.value.field == "order"


def test_schedule_must_cover_all_steps():
    with pytest.raises(ConfigError) as e:
        TrainConfig(steps_total=100, batch_schedule=[[50, 10]]).validate()
    assert e.value.field == "batch_schedule"

    with pytest.raises(ConfigError) as e:
        TrainConfig(steps_total=10, lr_schedule=[[10, 0.0]]).validate()
    assert e.value.field == "lr_schedule"


def test_non_monotone_schedule_only_warns():
    messages = []
    handler = logger.add(messages.append, level="WARNING")
    try:
        TrainConfig(
            steps_total=20, batch_schedule=[[20, 64]], lr_schedule=[[10, 1e-4], [10, 1e-3]]
        ).validate()
    finally:
        logger.remove(handler)
    assert any("lr_schedule" in str(m) for m in messages)


def test_schedule_value():
    schedule = TrainConfig().batch_schedule
    assert schedule_value(schedule, 0) == 100
    assert schedule_value(schedule, 4999) == 100
    assert schedule_value(schedule, 5000) == 1000
    assert schedule_value(schedule, 25000) == 10000


def test_load_config_reports_field_line(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{\n  "order": 16,\n  "tau": -1\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError) as e:
        load_config(path)
    assert e.value.field == "tau"
    assert e.value.line == 3


def test_load_config_reports_json_error_line(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{\n  "tau": 1.0,\n  oops\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError) as e:
        load_config(path)
    assert e.value.field == "config"
    assert e.value.line == 3


def test_load_config_overrides_and_seed(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"mode": "gs_only", "tau": 2.0}), encoding="utf-8")
    cfg = load_config(path, overrides=["tau=5", "channel=rayleigh_lmmse"], seed=7)
    assert cfg.mode == ShapingMode.GS_ONLY
    assert cfg.tau == 5
    assert cfg.channel_model == ChannelModel.rayleigh()
    assert cfg.seed == 7


def test_parse_override():
    assert parse_override("tau=0.5") == ("tau", 0.5)
    assert parse_override("snr_range_db=[0, 10]") == ("snr_range_db", [0, 10])
    assert parse_override("mode=joint") == ("mode", "joint")
    with pytest.raises(ConfigError):
        parse_override("tau")


def test_config_hash_and_round_trip():
    cfg = TrainConfig()
    assert config_hash(cfg) == config_hash(TrainConfig.from_dict(cfg.to_dict()))
    assert config_hash(cfg) != config_hash(TrainConfig(seed=1))
    assert len(config_hash(cfg)) == 64


# ---- 训练 ----


def test_training_is_deterministic():
    first = train(_tiny_config(seed=3))
    second = train(_tiny_config(seed=3))
    assert first.loss_curve == second.loss_curve
    assert first.final_parameters.keys() == second.final_parameters.keys()
    for name, value in first.final_parameters.items():
        np.testing.assert_array_equal(value, second.final_parameters[name])
    assert first.to_dict(include_timing=False) == second.to_dict(include_timing=False)


def test_different_seeds_differ():
    first = train(_tiny_config(seed=1, steps=10))
    second = train(_tiny_config(seed=2, steps=10))
    assert first.loss_curve != second.loss_curve


def test_ps_only_freezes_geometry():
    report = train(_tiny_config(mode="ps_only"))
    np.testing.assert_array_equal(report.final_parameters[POINTS_NAME], qam(4).points)
    assert any(name.startswith("logits.") for name in report.final_parameters)


def test_gs_only_keeps_uniform_distribution():
    trainer = Trainer(_tiny_config(mode="gs_only").validate())
    report = trainer.run()
    assert not any(name.startswith("logits.") for name in report.final_parameters)
    np.testing.assert_allclose(trainer.system.distribution(10.0).probs, 0.25)
    assert all(row.entropy_bits == pytest.approx(2.0) for row in report.loss_curve)


def test_checkpoints_respect_energy_constraint(trained_joint):
    _, report = trained_joint
    assert [c.step for c in report.checkpoints] == [9, 19]
    assert all(c.energy_error < 1e-6 for c in report.checkpoints)
    assert len(report.loss_curve) == 20
    assert report.production


def test_checkpoint_file_is_written(tmp_path):
    report = train(_tiny_config(steps=10), tmp_path)
    assert (tmp_path / "checkpoint.json").exists()
    assert report.checkpoint_path == str(tmp_path / "checkpoint.json")


def test_gs_only_corrected_and_uncorrected_gradients_match():
    trainer = Trainer(_tiny_config(mode="gs_only").validate())
    system = trainer.system
    snr = np.linspace(0.0, 20.0, 32)

    outcome = system.forward_batch(snr, np.random.default_rng(5))
    zero_grad(trainer.params)
    backward(outcome.loss.corrected)
    corrected = [p.grad.copy() for p in trainer.params]

    outcome = system.forward_batch(snr, np.random.default_rng(5))
    zero_grad(trainer.params)
    backward(outcome.loss.cross_entropy)
    for grad, param in zip(corrected, trainer.params):
        np.testing.assert_allclose(grad, param.grad, rtol=0, atol=1e-12)


def test_uncorrected_run_is_marked():
    report = train_with_uncorrected_loss(_tiny_config(steps=10))
    assert not report.production
    row = report.loss_curve[0]
    assert row.loss_bits == pytest.approx(row.mi_bound_bits * -1 + row.entropy_bits)


def test_divergence_writes_dump(tmp_path, monkeypatch):
    trainer = Trainer(_tiny_config().validate())

    def explode(*args, **kwargs):
        raise NumericalError("exp 结果出现 NaN/Inf")

    monkeypatch.setattr(trainer.system, "forward_batch", explode)
    with pytest.raises(TrainingDivergedError) as e:
        trainer.run(tmp_path)
    assert e.value.step == 0
    dump = json.loads((tmp_path / "diverged_step0.json").read_text(encoding="utf-8"))
    assert dump["step"] == 0
    assert len(dump["last_batch"]["snr_db"]) == 64
    assert POINTS_NAME in dump["parameters"]


def test_restore_from_checkpoint(trained_joint):
    trainer, _ = trained_joint
    arrays = trainer.system.parameter_arrays()
    restored = ShapingSystem.from_checkpoint(arrays)
    assert restored.mode == ShapingMode.JOINT
    for name, value in restored.parameter_arrays().items():
        np.testing.assert_array_equal(value, arrays[name])
    np.testing.assert_array_equal(
        restored.distribution(7.0).probs, trainer.system.distribution(7.0).probs
    )


def test_restore_rejects_bad_checkpoints(trained_joint):
    trainer, _ = trained_joint
    arrays = trainer.system.parameter_arrays()
    with pytest.raises(InvalidArgumentError):
        ShapingSystem.from_checkpoint({**arrays, "extra.weights": np.zeros((1, 1))})
    missing = {k: v for k, v in arrays.items() if k != POINTS_NAME}
    with pytest.raises(InvalidArgumentError):
        ShapingSystem.from_checkpoint(missing)


# ---- 评估 ----


def test_evaluate_flags_extrapolation_and_bounds(trained_joint):
    trainer, _ = trained_joint
    result = evaluate(
        trainer.system,
        [0.0, 10.0, 30.0],
        ChannelModel.awgn(),
        100_000,
        np.random.default_rng(0),
        trained_range=(0.0, 20.0),
        scheme="joint",
    )
    assert [p.extrapolated for p in result.points] == [False, False, True]
    for p in result.points:
        assert p.mi_std_error == 0.0
        assert 0.0 <= p.mi_bits <= p.entropy_bits + 1e-9
        assert p.mi_bound_bits <= p.mi_bits + 3 * p.bound_std_error
        assert p.constellation.mean_energy(p.distribution) == pytest.approx(1.0)
    assert result.curve.scheme == "joint"
    assert result.curve.snrs == [0.0, 10.0, 30.0]
    assert result.detail_rows()[2]["extrapolated"] == 1


def test_evaluate_is_deterministic(trained_joint):
    trainer, _ = trained_joint
    arrays = trainer.system.parameter_arrays()
    first = evaluate(arrays, [5.0], ChannelModel.awgn(), 100_000, np.random.default_rng(1))
    second = evaluate(arrays, [5.0], ChannelModel.awgn(), 100_000, np.random.default_rng(1))
    assert first.curve.entries == second.curve.entries
    assert first.points[0].mi_bound_bits == second.points[0].mi_bound_bits


def test_evaluate_rayleigh_uses_monte_carlo(trained_joint):
    trainer, _ = trained_joint
    result = evaluate(
        trainer.system, [10.0], ChannelModel.rayleigh(), 100_000, np.random.default_rng(2)
    )
    assert result.points[0].mi_std_error > 0


def test_evaluate_grid_errors(trained_joint):
    trainer, _ = trained_joint
    with pytest.raises(InvalidArgumentError):
        evaluate(trainer.system, [], ChannelModel.awgn(), 100_000, np.random.default_rng(3))
    with pytest.raises(InvalidArgumentError):
        evaluate(
            trainer.system, [5.0, 5.0], ChannelModel.awgn(), 100_000, np.random.default_rng(3)
        )
