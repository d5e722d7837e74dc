"""
Probstruct 命令行接口模块。

退出码: 0 成功/全部通过，1 定理谓词不成立，2 配置或参数无效，3 输入输出失败。
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional

from src.core.classical_models import ClassicalModelError, roulette_event, urn_event
from src.core.config_manager import (
    ConfigLoadError,
    ConfigManager,
    ConfigSaveError,
    ConfigValidationError,
    RunConfig,
)
from src.core.event_core import EventCoreError, EventStructure, make_event, run_collective
from src.core.interfaces import ISampler
from src.core.quantum_twoslit import (
    BeamMode,
    QuantumTwoSlitError,
    SlitMode,
    fringe_spacing,
    intensity_profile,
    progressive_pattern,
    run_intense_beam,
    run_weak_beam,
)
from src.core.result_writer import PatternFormatError, ResultWriter, read_histogram_json
from src.core.stats_fit import StatsFitError, chi_square_gof
from src.core.theorem_suite import ALL_CHECKS, SuiteSettings, TheoremSuiteError, run_suite
from src.utils.input_validator import InputValidationError
from src.utils.logger import get_logger, set_log_level, setup_logger

logger = get_logger()

EXIT_OK = 0
EXIT_PREDICATE_FALSE = 1
EXIT_INVALID_CONFIG = 2
EXIT_IO_FAILURE = 3

DEFAULT_TRIALS = 1_000
DEFAULT_PHOTONS = 10_000
MODELS = ("urn", "roulette", "certain")

IO_ERRORS = (ConfigLoadError, ConfigSaveError, PatternFormatError, OSError)
DOMAIN_ERRORS = (
    EventCoreError,
    TheoremSuiteError,
    ClassicalModelError,
    QuantumTwoSlitError,
    StatsFitError,
    ConfigValidationError,
    InputValidationError,
    ValueError,
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的整数列表: {text!r}") from None


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        action="append",
        default=None,
        help="随机种子，可重复指定（默认 0）",
    )
    parser.add_argument(
        "--out",
        type=str,
        default="results",
        help="输出目录（默认 results）",
    )
    parser.add_argument(
        "--format",
        type=str,
        default="json",
        help="集体的输出格式: csv 或 json",
    )


def _add_geometry_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--preset",
        type=str,
        default="reference",
        help="几何预设名称（默认 reference）",
    )
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="几何配置 JSON 文件路径，优先于预设",
    )
    parser.add_argument(
        "--bins",
        type=int,
        default=None,
        help="覆盖分箱数",
    )


def create_parser() -> argparse.ArgumentParser:
    """
    创建并配置命令行参数解析器。

    返回:
        配置好的 ArgumentParser 实例
    """
    parser = argparse.ArgumentParser(
        prog="probstruct",
        description="Probstruct - 结构概率论模拟器",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  probstruct simulate urn --reds 5 --whites 5 -n 1000000 --seed 42
  probstruct simulate twoslit --preset reference --mode both -K 100000 --seed 7
  probstruct verify --all --seed 42
  probstruct report results/histogram.json --preset reference
        """,
    )

    parser.add_argument(
        "--version",
        action="version",
        version="%(prog)s 0.1.0",
    )

    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="启用详细输出",
    )

    parser.add_argument(
        "--log-file",
        type=str,
        default=None,
        metavar="DIR",
        help="同时把日志写入该目录下的 probstruct.log",
    )

    subparsers = parser.add_subparsers(
        dest="command",
        title="命令",
        description="可用的 CLI 命令",
    )

    simulate_parser = subparsers.add_parser(
        "simulate",
        help="运行转瓮、轮盘或双缝模拟",
    )
    simulate_parser.add_argument(
        "target",
        choices=["urn", "roulette", "twoslit"],
        help="模拟对象",
    )
    simulate_parser.add_argument("-n", type=int, default=None, help="试验次数（默认 1000）")
    simulate_parser.add_argument("-K", type=int, default=None, help="光子数（默认 10000）")
    simulate_parser.add_argument("--reds", type=int, default=5, help="红球数")
    simulate_parser.add_argument("--whites", type=int, default=5, help="白球数")
    simulate_parser.add_argument(
        "--mode",
        choices=[m.value for m in SlitMode],
        default=SlitMode.BOTH.value,
        help="缝模式",
    )
    simulate_parser.add_argument(
        "--beam",
        choices=[b.value for b in BeamMode],
        default=BeamMode.WEAK.value,
        help="光束强度",
    )
    simulate_parser.add_argument(
        "--snapshots",
        type=_int_list,
        default=None,
        help="渐进图样的 K 序列，逗号分隔，写出 progressive.json",
    )
    _add_common_arguments(simulate_parser)
    _add_geometry_arguments(simulate_parser)

    verify_parser = subparsers.add_parser(
        "verify",
        help="运行定理检查并写出 report.json",
    )
    verify_parser.add_argument(
        "checks",
        nargs="*",
        type=str.upper,
        help=f"要运行的检查: {', '.join(ALL_CHECKS)}",
    )
    verify_parser.add_argument("--all", action="store_true", help="运行全部检查")
    verify_parser.add_argument("--model", choices=list(MODELS), default="urn", help="检查夹具")
    verify_parser.add_argument("-n", type=int, default=None, help="覆盖各检查的试验次数")
    verify_parser.add_argument("--reds", type=int, default=5, help="红球数")
    verify_parser.add_argument("--whites", type=int, default=5, help="白球数")
    verify_parser.add_argument("--label", type=str, default=None, help="按标签检查使用的标签")
    verify_parser.add_argument("--confidence", type=float, default=0.95, help="间接检验的置信水平")
    _add_common_arguments(verify_parser)

    report_parser = subparsers.add_parser(
        "report",
        help="把 histogram.json 与几何预设比较并写出绘图用 CSV",
    )
    report_parser.add_argument("input", type=str, help="histogram.json 路径")
    _add_common_arguments(report_parser)
    _add_geometry_arguments(report_parser)

    return parser


def _summary(**fields: object) -> None:
    print(" ".join(f"{key}={value}" for key, value in fields.items()))


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    geometry = None
    if command in ("simulate", "report") and (command == "report" or args.target == "twoslit"):
        geometry = ConfigManager().resolve_geometry(
            args.preset,
            Path(args.config) if args.config else None,
            args.bins,
        )
    return RunConfig(
        command=command,
        out=Path(args.out),
        seeds=tuple(args.seed) if args.seed else (0,),
        fmt=args.format,
        target=getattr(args, "target", None),
        n=getattr(args, "n", None),
        K=getattr(args, "K", None),
        geometry=geometry,
        slit_mode=SlitMode(getattr(args, "mode", SlitMode.BOTH.value)),
        beam=BeamMode(getattr(args, "beam", BeamMode.WEAK.value)),
        reds=getattr(args, "reds", 5),
        whites=getattr(args, "whites", 5),
        model=getattr(args, "model", "urn"),
        checks=() if getattr(args, "all", False) else tuple(getattr(args, "checks", None) or ()),
        label=getattr(args, "label", None),
        confidence=getattr(args, "confidence", 0.95),
        snapshots=tuple(getattr(args, "snapshots", None) or ()),
        input_path=Path(args.input) if command == "report" else None,
    )


def _model_event(config: RunConfig) -> EventStructure:
    if config.model == "roulette":
        return roulette_event()
    if config.model == "certain":
        return make_event({"label": "certain"}, {"only": 1})
    return urn_event(config.reds, config.whites)


def _simulate_classical(config: RunConfig, out: Path, writer: ResultWriter,
                        sampler: Optional[ISampler]) -> int:
    event = urn_event(config.reds, config.whites) if config.target == "urn" else roulette_event()
    n = DEFAULT_TRIALS if config.n is None else config.n
    for seed in config.seeds:
        collective = run_collective(event, n, seed, sampler)
        path = out / f"collective{config.seed_suffix(seed)}.{config.fmt}"
        if config.fmt == "csv":
            writer.write_collective_csv(path, collective)
        else:
            writer.write_collective_json(path, collective)

        fields: dict[str, object] = {"TARGET": config.target, "N": n, "SEED": seed}
        if config.target == "urn":
            counts = collective.counts()
            for label, count in zip(event.labels, counts):
                fields[f"FREQ_{label}"] = _fmt(int(count) / n)
        else:
            try:
                gof = chi_square_gof(collective.counts(), [float(p) for p in event.probabilities])
                fields.update(CHI2=_fmt(gof.statistic), DOF=gof.dof, P_VALUE=_fmt(gof.p_value))
            except StatsFitError as e:
                logger.debug(f"集体过小，跳过卡方检验: {e}")
                fields["P_VALUE"] = "NA"
        fields["OUT"] = path
        _summary(**fields)
    return EXIT_OK


def _simulate_twoslit(config: RunConfig, out: Path, writer: ResultWriter,
                      sampler: Optional[ISampler]) -> int:
    geometry = config.geometry
    mode = config.slit_mode
    if config.beam is BeamMode.INTENSE:
        pattern = run_intense_beam(geometry, mode)
        path = writer.write_histogram_json(out / "histogram.json", pattern)
        fields: dict[str, object] = {
            "TARGET": "twoslit", "MODE": mode.value, "BEAM": "intense", "BINS": geometry.bins,
        }
        if mode is SlitMode.BOTH:
            spacing = fringe_spacing(geometry)
            fields.update(
                FRINGE_ANALYTIC_M=_fmt(spacing.analytic),
                FRINGE_MEASURED_M=_fmt(spacing.measured),
                FRINGE_RAW_M=_fmt(spacing.raw),
            )
        fields["OUT"] = path
        _summary(**fields)
        return EXIT_OK

    K = DEFAULT_PHOTONS if config.K is None else config.K
    for seed in config.seeds:
        suffix = config.seed_suffix(seed)
        pattern, hits = run_weak_beam(geometry, mode, K, seed, sampler)
        path = writer.write_histogram_json(out / f"histogram{suffix}.json", pattern)
        writer.write_hits_csv(out / f"hits{suffix}.csv", geometry, hits)
        fields = {
            "TARGET": "twoslit", "MODE": mode.value, "BEAM": "weak",
            "K": K, "SEED": seed, "BINS": geometry.bins,
        }
        try:
            gof = chi_square_gof(pattern.histogram, pattern.expected)
            fields.update(CHI2=_fmt(gof.statistic), DOF=gof.dof, P_VALUE=_fmt(gof.p_value))
        except StatsFitError as e:
            logger.debug(f"光子数过少，跳过卡方检验: {e}")
            fields["P_VALUE"] = "NA"
        if config.snapshots:
            frames = progressive_pattern(geometry, mode, config.snapshots, seed)
            writer.write_progressive_json(out / f"progressive{suffix}.json", pattern, frames)
        fields["OUT"] = path
        _summary(**fields)
    return EXIT_OK


def handle_simulate(config: RunConfig, sampler: Optional[ISampler] = None) -> int:
    """
    处理 simulate 命令。

    参数:
        config: 运行配置
        sampler: 采样器测试钩子

    返回:
        退出码
    """
    out = config.prepare_output()
    writer = ResultWriter()
    if config.target == "twoslit":
        return _simulate_twoslit(config, out, writer, sampler)
    return _simulate_classical(config, out, writer, sampler)


def handle_verify(config: RunConfig, sampler: Optional[ISampler] = None) -> int:
    """
    处理 verify 命令。

    所有检查通过时返回 0，任一谓词不成立时返回 1。
    """
    out = config.prepare_output()
    event = _model_event(config)
    checks = config.checks or ALL_CHECKS
    if config.n is None:
        settings = SuiteSettings(confidence=config.confidence)
    else:
        settings = SuiteSettings.with_trials(config.n, config.confidence)

    reports = []
    for seed in config.seeds:
        reports.extend(run_suite(event, seed, checks, config.label, settings, sampler))
    path = ResultWriter().write_report_json(out / "report.json", reports)

    for report in reports:
        _summary(
            CHECK=report.check_name,
            PASSED=str(report.passed).lower(),
            STATISTIC=_fmt(report.statistic),
            THRESHOLD=_fmt(report.threshold),
            N=report.n,
            SEED=report.seed,
        )
    failed = [r.check_name for r in reports if not r.passed]
    _summary(MODEL=config.model, CHECKS=len(reports), FAILED=len(failed), OUT=path)
    if failed:
        logger.warning(f"谓词不成立的检查: {', '.join(failed)}")
        return EXIT_PREDICATE_FALSE
    return EXIT_OK


def handle_report(config: RunConfig, sampler: Optional[ISampler] = None) -> int:
    """
    处理 report 命令：把图样与预设几何下的模型分布比较。
    """
    pattern = read_histogram_json(config.input_path)
    if pattern.histogram is None:
        raise ConfigValidationError("report 需要弱光束图样，强光束图样没有计数")
    geometry = config.geometry
    expected = intensity_profile(geometry, pattern.slit_mode).pdf
    gof = chi_square_gof(pattern.histogram, expected)
    out = config.prepare_output()
    compared = replace(pattern, geometry=geometry, expected=expected)
    path = ResultWriter().write_comparison_csv(out / "report.csv", compared, gof)
    _summary(
        INPUT=config.input_path,
        BINS=geometry.bins,
        CHI2=_fmt(gof.statistic),
        DOF=gof.dof,
        P_VALUE=_fmt(gof.p_value),
        MERGED_BINS=gof.merged_bins,
        OUT=path,
    )
    return EXIT_OK


def run_cli(args: argparse.Namespace, sampler: Optional[ISampler] = None) -> int:
    """
    运行 CLI 命令。

    参数:
        args: 解析后的命令行参数
        sampler: 采样器测试钩子，用于故障注入

    返回:
        退出码（0、1、2 或 3）
    """
    setup_logger(
        level=logging.WARNING,
        log_to_file=bool(args.log_file),
        log_dir=Path(args.log_file) if args.log_file else None,
    )
    if args.verbose:
        set_log_level(logging.DEBUG)

    if not args.command:
        print("未指定命令。使用 --help 查看帮助信息。", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    command_handlers: dict[str, Callable[[RunConfig, Optional[ISampler]], int]] = {
        "simulate": handle_simulate,
        "verify": handle_verify,
        "report": handle_report,
    }

    handler = command_handlers.get(args.command)
    if handler is None:
        print(f"未知命令: {args.command}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    try:
        return handler(_build_run_config(args), sampler)
    except IO_ERRORS as e:
        logger.error(f"输入输出失败: {e}")
        print(f"错误 [{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_IO_FAILURE
    except DOMAIN_ERRORS as e:
        logger.error(f"配置或参数无效: {e}")
        print(f"错误 [{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except Exception as e:
        logger.exception(f"未预期的错误: {e}")
        print(f"错误 [{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_IO_FAILURE
