"""
命令实现

每个命令独占一个输出目录（RunStore 加锁并写 manifest），库代码抛出的异常在这里统一记录并转换为退出码:
0 成功，1 运行失败或检查未通过，2 配置或参数错误，3 运行目录被占用。
"""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from src.autodiff import load_parameters, save_parameters
from src.channel import ChannelKind, ChannelModel
from src.errors import (
    ConfigError,
    GridError,
    InvalidArgumentError,
    RunLockedError,
    ShaperError,
    UnsupportedChannelError,
    UnsupportedOrderError,
)
from src.objectives import (
    MIN_MC_SAMPLES,
    MICurve,
    capacity_curve,
    ergodic_capacity_curve,
    mb_qam_curve,
    qam_curve,
    rayleigh_bound_curve,
    require_awgn,
)
from src.trainer import (
    CHECKPOINT_FILE,
    ShapingSystem,
    TrainConfig,
    config_hash,
    evaluate,
    load_config,
    train,
    train_with_uncorrected_loss,
)
from src.utils import (
    RunStatus,
    RunStore,
    curve_filename,
    read_curve,
    snr_label,
    write_constellation,
    write_csv,
    write_curve,
    write_distribution,
)

from .checks import log_table, run_checks

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_LOCKED = 3

BASELINE_SCHEMES = ("qam", "mb_qam", "capacity", "rayleigh_bound")
CONFIG_FILE = "config.json"
PathLike = Union[str, Path]


def parse_snr_grid(text: str) -> List[float]:
    """
    解析 SNR 网格: 'lo:hi:step'（含端点）或逗号分隔的列表

    Returns:
        List[float]: 严格递增的 SNR（dB）
    """
    try:
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            if not step > 0 or hi < lo:
                raise InvalidArgumentError(f"SNR 网格 {text!r} 需要 lo ≤ hi 且 step > 0")
            count = int(np.floor((hi - lo) / step + 1e-9)) + 1
            grid = [round(lo + i * step, 10) for i in range(count)]
        else:
            grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"无法解析 SNR 网格 {text!r}，格式为 lo:hi:step 或 a,b,c")
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgumentError(f"SNR 网格必须非空且严格递增: {text!r}")
    return grid


def _exit_code(error: BaseException) -> int:
    if isinstance(error, RunLockedError):
        return EXIT_LOCKED
    if isinstance(
        error, (ConfigError, InvalidArgumentError, UnsupportedOrderError, UnsupportedChannelError)
    ):
        return EXIT_CONFIG
    return EXIT_FAILURE


def run_command(name: str, action: Callable[[], int]) -> int:
    """执行命令并把异常转换为退出码"""
    logger.info("=" * 80)
    logger.info(f"▶️  {name}")
    logger.info("=" * 80)
    try:
        code = action()
    except ShaperError as e:
        code = _exit_code(e)
        logger.error(f"❌ {name} 失败 (exit {code}): {e}")
        return code
    except Exception as e:
        logger.exception(f"❌ {name} 意外失败: {e}")
        return EXIT_FAILURE
    logger.info("=" * 80)
    logger.info(f"{'✅' if code == EXIT_OK else '❌'} {name} 结束 (exit {code})")
    logger.info("=" * 80)
    return code


def _finish(store: RunStore, outputs: Sequence[Path]):
    store.record_outputs(list(outputs))
    store.update_status(RunStatus.COMPLETED)


def _resolve_checkpoint(checkpoint: PathLike) -> Path:
    path = Path(checkpoint)
    if path.is_dir():
        path = path / CHECKPOINT_FILE
    if not path.exists():
        raise InvalidArgumentError(f"检查点不存在: {path}")
    return path


def _eval_config(
    checkpoint: Path,
    config_path: Optional[PathLike],
    overrides: Optional[Sequence[str]],
) -> TrainConfig:
    """评估使用的配置: 显式给出的 --config，否则检查点旁边的 config.json，否则默认值"""
    if config_path is None and (checkpoint.parent / CONFIG_FILE).exists():
        config_path = checkpoint.parent / CONFIG_FILE
    return load_config(config_path, overrides)


def _write_snapshots(out_dir: Path, system: ShapingSystem, grid: Sequence[float]) -> List[Path]:
    paths = []
    for snr_db in grid:
        dist = system.distribution(snr_db)
        c = system.constellation(snr_db)
        label = snr_label(snr_db)
        paths.append(write_constellation(out_dir / f"constellation_snr{label}.csv", c.to_rows()))
        paths.append(write_distribution(out_dir / f"distribution_snr{label}.csv", dist.to_rows()))
    return paths


def cmd_train(
    config_path: Optional[PathLike],
    out_dir: PathLike,
    seed: Optional[int] = None,
    overrides: Optional[Sequence[str]] = None,
    uncorrected: bool = False,
    argv: Optional[Sequence[str]] = None,
) -> int:
    """
    训练并写出检查点、TrainReport JSON 与损失曲线 CSV

    Args:
        config_path: JSON 配置文件（None 时使用默认配置）
        out_dir: 输出目录
        seed: 覆盖配置中的种子
        overrides: key=value 覆盖项
        uncorrected: 负对照实验（最小化 L）
        argv: 写入 manifest 的命令行

    Returns:
        int: 退出码
    """

    def action() -> int:
        cfg = load_config(config_path, overrides, seed)
        out = Path(out_dir)
        with RunStore(out, "train", argv) as store:
            store.start(
                config_hash(cfg), cfg.seed, config=cfg.to_dict(), production=not uncorrected
            )
            config_file = store.write_json(CONFIG_FILE, cfg.to_dict())
            runner = train_with_uncorrected_loss if uncorrected else train
            report = runner(cfg, out)
            checkpoint = save_parameters(report.final_parameters, out / CHECKPOINT_FILE)
            report.checkpoint_path = str(checkpoint)
            report_file = store.write_json("report.json", report.to_dict())
            curve_file = write_csv(
                out / "loss_curve.csv",
                ["step", "loss_bits", "entropy_bits", "mi_bound_bits"],
                (row.to_row() for row in report.loss_curve),
            )
            _finish(store, [config_file, checkpoint, report_file, curve_file])
        return EXIT_OK

    return run_command("train", action)


def cmd_eval(
    checkpoint: PathLike,
    out_dir: PathLike,
    config_path: Optional[PathLike] = None,
    snr_grid: Optional[Sequence[float]] = None,
    mc_samples: int = MIN_MC_SAMPLES,
    seed: Optional[int] = None,
    overrides: Optional[Sequence[str]] = None,
    argv: Optional[Sequence[str]] = None,
) -> int:
    """
    评估检查点: 互信息曲线、明细 CSV 与各 SNR 的星座/分布快照

    Args:
        checkpoint: checkpoint.json 或训练输出目录
        out_dir: 输出目录
        config_path: 训练配置（决定信道、训练范围与方案名）
        snr_grid: SNR 网格，None 时为训练范围内步长 2 dB
        mc_samples: 蒙特卡洛样本数
        seed: 评估随机种子（默认取配置中的种子）
        overrides: key=value 覆盖项
        argv: 写入 manifest 的命令行

    Returns:
        int: 退出码
    """

    def action() -> int:
        path = _resolve_checkpoint(checkpoint)
        cfg = _eval_config(path, config_path, overrides)
        eval_seed = cfg.seed if seed is None else seed
        low, high = cfg.snr_range_db
        grid = list(snr_grid) if snr_grid else parse_snr_grid(f"{low}:{high}:2")
        out = Path(out_dir)
        with RunStore(out, "eval", argv) as store:
            store.start(
                config_hash(cfg),
                eval_seed,
                checkpoint=str(path),
                snr_grid=grid,
                mc_samples=mc_samples,
            )
            channel = cfg.channel_model
            system = ShapingSystem.from_checkpoint(load_parameters(path), channel, cfg.tau)
            result = evaluate(
                system,
                grid,
                channel,
                mc_samples,
                np.random.default_rng(eval_seed),
                trained_range=(low, high),
                scheme=cfg.mode.scheme,
            )
            outputs = [
                write_curve(
                    out / curve_filename(result.scheme, result.order, channel.kind.value),
                    result.curve,
                ),
                write_csv(
                    out / "evaluation_detail.csv",
                    ["snr", "mi", "mi_bound", "entropy", "extrapolated"],
                    result.detail_rows(),
                ),
            ]
            outputs += _write_snapshots(out, system, grid)
            _finish(store, outputs)
        return EXIT_OK

    return run_command("eval", action)


def baseline_curve(
    scheme: str,
    order: int,
    snr_grid: Sequence[float],
    channel: ChannelModel,
    mc_samples: int,
    rng: np.random.Generator,
) -> MICurve:
    """按方案名计算参考曲线"""
    if scheme == "qam":
        return qam_curve(order, snr_grid, channel, mc_samples, rng)
    if scheme == "mb_qam":
        require_awgn(channel, scheme)
        return mb_qam_curve(order, snr_grid)
    if scheme == "capacity":
        if channel.kind == ChannelKind.AWGN:
            return capacity_curve(snr_grid)
        return ergodic_capacity_curve(snr_grid, mc_samples, rng)
    if scheme == "rayleigh_bound":
        return rayleigh_bound_curve(snr_grid, mc_samples, rng, channel.pilot_count)
    raise InvalidArgumentError(f"未知的基线方案 {scheme!r}，可选 {BASELINE_SCHEMES}")


def cmd_baseline(
    scheme: str,
    order: int,
    snr_grid: Sequence[float],
    out_dir: PathLike,
    channel: ChannelModel = ChannelModel.awgn(),
    mc_samples: int = MIN_MC_SAMPLES,
    seed: int = 0,
    argv: Optional[Sequence[str]] = None,
) -> int:
    """
    计算参考曲线并写出 snr,mi CSV

    mb_qam 对每个 SNR 点做 ν 搜索；capacity 在 Rayleigh 信道下为完美 CSI 遍历容量。
    """

    def action() -> int:
        out = Path(out_dir)
        with RunStore(out, "baseline", argv) as store:
            store.start(
                None,
                seed,
                scheme=scheme,
                order=order,
                channel=channel.to_dict(),
                snr_grid=list(snr_grid),
            )
            curve = baseline_curve(
                scheme, order, snr_grid, channel, mc_samples, np.random.default_rng(seed)
            )
            for snr_db, mi in curve.entries:
                logger.info(f"📈 {scheme} @ {snr_db} dB: {mi:.4f} bit")
            path = write_curve(out / curve_filename(scheme, curve.order, channel.kind.value), curve)
            _finish(store, [path])
        return EXIT_OK

    return run_command("baseline", action)


def _unique_names(curves: Sequence[MICurve]) -> List[str]:
    names: List[str] = []
    for curve in curves:
        name = curve.scheme
        suffix = 2
        while name in names:
            name = f"{curve.scheme}_{suffix}"
            suffix += 1
        names.append(name)
    return names


def align_curves(curves: Sequence[MICurve]) -> Dict[str, np.ndarray]:
    """
    把曲线对齐到第一条曲线的网格（限制在所有曲线的公共范围内），必要时线性插值

    Returns:
        Dict[str, np.ndarray]: 'snr' 与每条曲线名到取值的映射
    """
    if len(curves) < 2:
        raise InvalidArgumentError("compare 至少需要两条曲线")
    low = max(min(c.snrs) for c in curves)
    high = min(max(c.snrs) for c in curves)
    if low > high:
        raise GridError(f"曲线的 SNR 范围没有交集: [{low}, {high}]")
    reference = np.asarray(curves[0].snrs)
    grid = reference[(reference >= low) & (reference <= high)]
    if grid.size == 0:
        raise GridError("参考曲线在公共范围内没有 SNR 点")

    aligned = {"snr": grid}
    for name, curve in zip(_unique_names(curves), curves):
        snrs = np.asarray(curve.snrs)
        values = np.asarray(curve.values)
        if np.array_equal(snrs, grid):
            aligned[name] = values
            continue
        logger.warning(f"⚠️  曲线 {name} 的 SNR 网格不同，已线性插值到参考网格")
        aligned[name] = np.interp(grid, snrs, values)
    return aligned


def cmd_compare(
    curve_files: Sequence[PathLike], out_dir: PathLike, argv: Optional[Sequence[str]] = None
) -> int:
    """
    对比多条曲线，写出宽表 comparison.csv 与差值表 gaps.csv

    第一条曲线为参考，差值列名为 {scheme}_minus_{reference}。
    """

    def action() -> int:
        curves = [read_curve(path) for path in curve_files]
        aligned = align_curves(curves)
        names = list(aligned)[1:]
        reference = names[0]
        out = Path(out_dir)
        with RunStore(out, "compare", argv) as store:
            store.start(None, None, curves=[str(p) for p in curve_files])
            gap_names = {n: f"{n}_minus_{reference}" for n in names[1:]}
            wide_rows, gap_rows = [], []
            for i, snr_db in enumerate(aligned["snr"]):
                wide_rows.append({"snr": snr_db, **{n: aligned[n][i] for n in names}})
                gap_rows.append(
                    {
                        "snr": snr_db,
                        **{g: aligned[n][i] - aligned[reference][i] for n, g in gap_names.items()},
                    }
                )
            wide = write_csv(out / "comparison.csv", ["snr", *names], wide_rows)
            gaps = write_csv(out / "gaps.csv", ["snr", *gap_names.values()], gap_rows)
            _finish(store, [wide, gaps])
        return EXIT_OK

    return run_command("compare", action)


def cmd_export_constellation(
    checkpoint: PathLike,
    out_dir: PathLike,
    snr_grid: Sequence[float],
    config_path: Optional[PathLike] = None,
    overrides: Optional[Sequence[str]] = None,
    argv: Optional[Sequence[str]] = None,
) -> int:
    """导出各 SNR 下归一化的星座（re,im,prob）与分布（symbol,prob）"""

    def action() -> int:
        path = _resolve_checkpoint(checkpoint)
        cfg = _eval_config(path, config_path, overrides)
        out = Path(out_dir)
        with RunStore(out, "export-constellation", argv) as store:
            store.start(config_hash(cfg), cfg.seed, checkpoint=str(path), snr_grid=list(snr_grid))
            arrays = load_parameters(path)
            system = ShapingSystem.from_checkpoint(arrays, cfg.channel_model, cfg.tau)
            _finish(store, _write_snapshots(out, system, snr_grid))
        return EXIT_OK

    return run_command("export-constellation", action)


def cmd_check(
    out_dir: Optional[PathLike] = None, seed: int = 0, argv: Optional[Sequence[str]] = None
) -> int:
    """执行快速不变量检查并打印结果表，任何一项失败返回 1"""

    def action() -> int:
        if out_dir is None:
            results = run_checks(seed)
            log_table(results)
        else:
            out = Path(out_dir)
            with RunStore(out, "check", argv) as store:
                store.start(None, seed)
                results = run_checks(seed)
                log_table(results)
                table = write_csv(
                    out / "checks.csv",
                    ["name", "passed", "detail", "seconds"],
                    (r.to_row() for r in results),
                )
                store.record_outputs([table])
                failed = not all(r.passed for r in results)
                store.update_status(RunStatus.FAILED if failed else RunStatus.COMPLETED)
        return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE

    return run_command("check", action)
