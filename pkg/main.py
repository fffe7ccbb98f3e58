"""
主程序入口
通过子命令选择操作：
1. train：训练分布网络、星座与解调网络
2. eval：评估检查点的互信息曲线
3. baseline：计算 QAM / MB-QAM / 容量 / Rayleigh 下界参考曲线
4. compare：对比多条曲线
5. export-constellation：导出各 SNR 下的星座与分布
6. check：执行快速不变量检查
"""

import argparse
import sys

from loguru import logger

from src.channel import ChannelKind, ChannelModel
from src.cli import (
    BASELINE_SCHEMES,
    EXIT_CONFIG,
    cmd_baseline,
    cmd_check,
    cmd_compare,
    cmd_eval,
    cmd_export_constellation,
    cmd_train,
    parse_snr_grid,
)
from src.errors import InvalidArgumentError
from src.objectives import MIN_MC_SAMPLES


def _add_common(parser: argparse.ArgumentParser, config: bool = True):
    parser.add_argument("--out", type=str, required=True, help="输出目录（命令期间独占）")
    if config:
        parser.add_argument("--config", type=str, default=None, help="JSON 运行配置文件")
        parser.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="覆盖配置项，可重复，值按 JSON 解析（例如 --set tau=5）",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="星座整形: 概率整形、几何整形与联合整形的训练和评估",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例用法:
  # 训练联合整形（默认配置，N=16，AWGN）
  python main.py train --out runs/joint16

  # 只训练概率整形，覆盖总步数
  python main.py train --set mode=ps_only --set steps_total=5000 --out runs/ps16

  # 评估训练结果
  python main.py eval --checkpoint runs/joint16 --snr-grid 0:30:1 --out runs/joint16_eval

  # 参考曲线
  python main.py baseline --scheme mb_qam --order 16 --snr-grid -2:20:1 --out runs/mb16

  # 对比曲线
  python main.py compare runs/joint16_eval/joint_N16_awgn.csv runs/mb16/mb_qam_N16_awgn.csv \\
      --out runs/cmp

  # 快速检查
  python main.py check
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="训练")
    _add_common(p_train)
    p_train.add_argument("--seed", type=int, default=None, help="覆盖配置中的随机种子")
    p_train.add_argument(
        "--uncorrected", action="store_true", help="负对照实验: 最小化未修正的交叉熵 L"
    )

    p_eval = sub.add_parser("eval", help="评估检查点")
    _add_common(p_eval)
    p_eval.add_argument("--checkpoint", type=str, required=True, help="检查点文件或训练输出目录")
    p_eval.add_argument("--snr-grid", type=str, default=None, help="SNR 网格 lo:hi:step")
    p_eval.add_argument("--mc-samples", type=int, default=MIN_MC_SAMPLES, help="蒙特卡洛样本数")
    p_eval.add_argument("--seed", type=int, default=None, help="评估随机种子")

    p_base = sub.add_parser("baseline", help="参考曲线")
    _add_common(p_base, config=False)
    p_base.add_argument("--scheme", choices=BASELINE_SCHEMES, required=True)
    p_base.add_argument("--order", type=int, default=16, help="调制阶数 N")
    p_base.add_argument("--snr-grid", type=str, required=True, help="SNR 网格 lo:hi:step")
    p_base.add_argument(
        "--channel", choices=[k.value for k in ChannelKind], default=ChannelKind.AWGN.value
    )
    p_base.add_argument("--pilot-count", type=int, default=1)
    p_base.add_argument("--mc-samples", type=int, default=MIN_MC_SAMPLES)
    p_base.add_argument("--seed", type=int, default=0)

    p_cmp = sub.add_parser("compare", help="对比曲线，第一条为参考")
    _add_common(p_cmp, config=False)
    p_cmp.add_argument("curves", nargs="+", help="snr,mi 曲线 CSV")

    p_exp = sub.add_parser("export-constellation", help="导出星座与分布快照")
    _add_common(p_exp)
    p_exp.add_argument("--checkpoint", type=str, required=True)
    p_exp.add_argument("--snr-grid", type=str, required=True, help="SNR 网格 lo:hi:step")

    p_check = sub.add_parser("check", help="快速不变量检查")
    p_check.add_argument("--out", type=str, default=None, help="可选，写出 checks.csv")
    p_check.add_argument("--seed", type=int, default=0)
    return parser


def run(argv=None) -> int:
    """解析参数并执行命令，返回退出码"""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    full_argv = ["main.py", *argv]

    try:
        grid = parse_snr_grid(args.snr_grid) if getattr(args, "snr_grid", None) else None
    except InvalidArgumentError as e:
        logger.error(f"❌ 参数错误: {e}")
        return EXIT_CONFIG

    if args.command == "train":
        return cmd_train(
            args.config, args.out, args.seed, args.overrides, args.uncorrected, argv=full_argv
        )
    if args.command == "eval":
        return cmd_eval(
            args.checkpoint,
            args.out,
            config_path=args.config,
            snr_grid=grid,
            mc_samples=args.mc_samples,
            seed=args.seed,
            overrides=args.overrides,
            argv=full_argv,
        )
    if args.command == "baseline":
        try:
            channel = ChannelModel(ChannelKind(args.channel), args.pilot_count)
        except InvalidArgumentError as e:
            logger.error(f"❌ 参数错误: {e}")
            return EXIT_CONFIG
        return cmd_baseline(
            args.scheme,
            args.order,
            grid,
            args.out,
            channel=channel,
            mc_samples=args.mc_samples,
            seed=args.seed,
            argv=full_argv,
        )
    if args.command == "compare":
        return cmd_compare(args.curves, args.out, argv=full_argv)
    if args.command == "export-constellation":
        return cmd_export_constellation(
            args.checkpoint, args.out, grid, args.config, args.overrides, argv=full_argv
        )
    return cmd_check(args.out, args.seed, argv=full_argv)


def main():
    """主函数"""
    sys.exit(run())


if __name__ == "__main__":
    main()
