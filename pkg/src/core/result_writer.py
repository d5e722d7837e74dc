"""
结果写出模块。

把集体、光点、探测图样、检查报告与比较表序列化为下游绘图使用的 CSV / JSON 文件。
所有文件原子写出，相同输入得到逐字节相同的输出。
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from src.core.event_core import Collective, frequencies
from src.core.interfaces import IResultWriter
from src.core.config_manager import atomic_write_text, dump_json
from src.core.quantum_twoslit import (
    BeamMode,
    DetectionPattern,
    InvalidGeometry,
    PhotonHits,
    ProgressiveSnapshot,
    SlitGeometry,
    SlitMode,
)
from src.core.stats_fit import GofResult
from src.core.theorem_suite import CheckReport
from src.utils.logger import get_logger

logger = get_logger()

HITS_HEADER = ("photon_index", "t_omega", "bin", "x_position_m")
COLLECTIVE_HEADER = ("trial_index", "t_omega", "realized")
COMPARISON_HEADER = ("x_position_m", "observed_density", "expected_density")


class ResultWriterError(Exception):
    """结果写出错误异常。"""
    pass


class PatternFormatError(ResultWriterError):
    """histogram.json 缺失、损坏或为空。"""
    pass


def _fmt(value: float) -> str:
    return f"{value:.9g}"


class ResultWriter(IResultWriter):
    """
    结果写出器。

    实现 IResultWriter 抽象接口。
    """

    def write_json(self, path: Path, data: Any) -> Path:
        atomic_write_text(Path(path), dump_json(data))
        logger.debug(f"已写出 {path}")
        return Path(path)

    def write_csv(self, path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
                  footer: Sequence[str] = ()) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        for line in footer:
            buffer.write(line + "\n")
        atomic_write_text(Path(path), buffer.getvalue())
        logger.debug(f"已写出 {path}")
        return Path(path)

    def write_hits_csv(self, path: Path, geometry: SlitGeometry, hits: PhotonHits) -> Path:
        """每个光点一行，位置保留 9 位有效数字。"""
        centers = geometry.bin_centers()
        rows = (
            (i, i + 1, int(b), _fmt(float(centers[b])))
            for i, b in enumerate(hits.bins.tolist())
        )
        return self.write_csv(path, HITS_HEADER, rows)

    def write_histogram_json(self, path: Path, pattern: DetectionPattern) -> Path:
        return self.write_json(path, pattern_to_dict(pattern))

    def write_progressive_json(self, path: Path, pattern: DetectionPattern,
                               snapshots: Sequence[ProgressiveSnapshot]) -> Path:
        return self.write_json(path, {
            "geometry": pattern.geometry.to_si(),
            "mode": pattern.slit_mode.value,
            "seed": pattern.seed,
            "snapshots": [
                {"K": s.K, "ks_distance": s.ks_distance, "counts": s.histogram.tolist()}
                for s in snapshots
            ],
        })

    def write_report_json(self, path: Path, reports: Sequence[CheckReport]) -> Path:
        return self.write_json(path, {"checks": [r.to_dict() for r in reports]})

    def write_collective_csv(self, path: Path, collective: Collective) -> Path:
        labels = collective.model.labels
        rows = ((i, i + 1, labels[c]) for i, c in enumerate(collective.codes.tolist()))
        return self.write_csv(path, COLLECTIVE_HEADER, rows)

    def write_collective_json(self, path: Path, collective: Collective) -> Path:
        model = collective.model
        counts = collective.counts()
        return self.write_json(path, {
            "model": {label: float(p) for label, p in zip(model.labels, model.probabilities)},
            "n": len(collective),
            "seed": collective.seed,
            "counts": {label: int(c) for label, c in zip(model.labels, counts)},
            "frequencies": {label: f.approx for label, f in frequencies(collective).items()},
        })

    def write_comparison_csv(self, path: Path, pattern: DetectionPattern, gof: GofResult) -> Path:
        """
        写出 (位置, 观测密度, 期望密度) 比较表，末尾附一行拟合优度结果。

        密度单位为每米。
        """
        geometry = pattern.geometry
        width = geometry.bin_width
        observed = pattern.normalized() / width
        expected = pattern.expected / pattern.expected.sum() / width
        rows = (
            (_fmt(x), _fmt(o), _fmt(e))
            for x, o, e in zip(geometry.bin_centers().tolist(), observed.tolist(), expected.tolist())
        )
        footer = (
            f"# statistic={_fmt(gof.statistic)} dof={gof.dof} "
            f"p_value={_fmt(gof.p_value)} merged_bins={gof.merged_bins}",
        )
        return self.write_csv(path, COMPARISON_HEADER, rows, footer)


def pattern_to_dict(pattern: DetectionPattern) -> dict[str, Any]:
    """histogram.json 的内容；几何参数以米为单位保存，保证精确往返。"""
    edges = pattern.geometry.bin_edges().tolist()
    counts = pattern.histogram.tolist() if pattern.histogram is not None else None
    return {
        "geometry": pattern.geometry.to_si(),
        "mode": pattern.slit_mode.value,
        "beam": pattern.beam.value,
        "K": pattern.K,
        "seed": pattern.seed,
        "bins": [
            {
                "x_lo": edges[i],
                "x_hi": edges[i + 1],
                "count": counts[i] if counts is not None else None,
                "expected": float(pattern.expected[i]),
            }
            for i in range(pattern.geometry.bins)
        ],
    }


def read_histogram_json(path: Path) -> DetectionPattern:
    """
    读取 histogram.json 并还原为 DetectionPattern。

    参数:
        path: 文件路径

    返回:
        DetectionPattern

    抛出:
        PatternFormatError: 文件缺失、无法解析、字段缺失或直方图为空
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (IOError, OSError, json.JSONDecodeError) as e:
        raise PatternFormatError(f"无法读取图样文件 {path}: {e}") from e

    try:
        geometry = SlitGeometry.from_si(data["geometry"])
        mode = SlitMode(data["mode"])
        beam = BeamMode(data.get("beam", BeamMode.WEAK.value))
        K = int(data["K"])
        seed = int(data["seed"])
        bins = data["bins"]
        expected = np.array([float(b["expected"]) for b in bins], dtype=np.float64)
        if beam is BeamMode.INTENSE:
            histogram = None
        else:
            histogram = np.array([int(b["count"]) for b in bins], dtype=np.int64)
    except (KeyError, TypeError, ValueError, InvalidGeometry) as e:
        raise PatternFormatError(f"图样文件格式错误 {path}: {e}") from e

    if len(bins) != geometry.bins:
        raise PatternFormatError(f"分箱数 {len(bins)} 与几何参数 {geometry.bins} 不一致")
    if histogram is not None:
        if histogram.sum() <= 0 or K <= 0:
            raise PatternFormatError(f"图样文件中的直方图为空: {path}")
        if int(histogram.sum()) != K:
            raise PatternFormatError(f"计数之和 {int(histogram.sum())} 与 K={K} 不一致")
    return DetectionPattern(
        geometry=geometry,
        slit_mode=mode,
        beam=beam,
        K=K,
        seed=seed,
        histogram=histogram,
        expected=expected,
    )
