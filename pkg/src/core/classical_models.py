"""
经典事件模型模块。

提供 5+5 转瓮与 37 格轮盘两个具体事件模型，作为定理检查的夹具。
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from src.core.event_core import (
    Collective,
    EventStructure,
    InitialConditions,
    OutcomeStatus,
    TrialRecord,
    make_event,
    run_collective,
    sample_trial,
    status_at,
)
from src.utils.logger import get_logger
from src.utils.rng import TrialStream

logger = get_logger()

RED = "red"
WHITE = "white"
CELL_COUNT = 37
CELL_WIDTH_DEG = Fraction(360, CELL_COUNT)


class ClassicalModelError(Exception):
    """经典模型错误异常。"""
    pass


class EmptyUrn(ClassicalModelError):
    """瓮中没有球或球数为负。"""
    pass


class AngleOutOfRange(ClassicalModelError):
    """角度不在 [0, 360) 内。"""
    pass


@dataclass(frozen=True)
class UrnModel:
    """红白两色球的转瓮。"""

    reds: int
    whites: int

    def __post_init__(self) -> None:
        if self.reds < 0 or self.whites < 0:
            raise EmptyUrn(f"球数不能为负: reds={self.reds}, whites={self.whites}")
        if self.reds + self.whites < 1:
            raise EmptyUrn("瓮中至少需要一个球")

    @property
    def total(self) -> int:
        return self.reds + self.whites

    @property
    def p_red(self) -> Fraction:
        """等可能情形下的比例：有利情形数 / 总情形数。"""
        return Fraction(self.reds, self.total)

    @property
    def p_white(self) -> Fraction:
        return Fraction(self.whites, self.total)


def urn_event(reds: int, whites: int) -> EventStructure:
    """
    构造转瓮抽球事件。

    参数:
        reds: 红球数
        whites: 白球数

    返回:
        标签为 {red, white}、概率为精确分数的事件

    抛出:
        EmptyUrn
    """
    urn = UrnModel(reds, whites)
    return make_event(
        InitialConditions(label="urn", params={"reds": reds, "whites": whites}),
        {RED: urn.p_red, WHITE: urn.p_white},
    )


def cell_label(cell: int) -> str:
    return str(cell)


def roulette_cell(angle_deg: float) -> int:
    """
    把角度映射到轮盘格子。

    格子是半开区间 [n·360/37, (n+1)·360/37)，用精确分数计算 floor。

    参数:
        angle_deg: [0, 360) 区间的角度

    返回:
        [0, 36] 区间的格子序号

    抛出:
        AngleOutOfRange
    """
    if isinstance(angle_deg, float) and not math.isfinite(angle_deg):
        raise AngleOutOfRange(f"角度必须是有限数: {angle_deg}")
    angle = Fraction(angle_deg)
    if angle < 0 or angle >= 360:
        raise AngleOutOfRange(f"角度必须位于 [0, 360): {angle_deg}")
    return math.floor(angle / CELL_WIDTH_DEG)


def roulette_event() -> EventStructure:
    """37 个格子、每格概率恰为 1/37 的轮盘事件。"""
    return make_event(
        InitialConditions(label="roulette", params={"cells": CELL_COUNT}),
        {cell_label(n): Fraction(1, CELL_COUNT) for n in range(CELL_COUNT)},
    )


@dataclass(frozen=True)
class Rotating:
    """轮盘转动中。"""


@dataclass(frozen=True)
class Stopped:
    """小球停在某格。"""

    cell: int

    def __post_init__(self) -> None:
        if not 0 <= self.cell < CELL_COUNT:
            raise ValueError(f"格子序号必须位于 [0, {CELL_COUNT - 1}]: {self.cell}")


RoulettePhase = Union[Rotating, Stopped]


@dataclass(frozen=True)
class RouletteState:
    """轮盘在某一时刻的状态。"""

    phase: RoulettePhase
    cell_width_deg: Fraction = field(default=CELL_WIDTH_DEG)

    def cell_probability(self, cell: int) -> Fraction:
        """
        小球位于某格的空间概率。

        参数:
            cell: 格子序号

        返回:
            转动中为 1/37；停止后实现的格子为 1，其余为 0
        """
        if not 0 <= cell < CELL_COUNT:
            raise ValueError(f"格子序号必须位于 [0, {CELL_COUNT - 1}]: {cell}")
        if isinstance(self.phase, Rotating):
            return Fraction(1, CELL_COUNT)
        return Fraction(1) if cell == self.phase.cell else Fraction(0)


@dataclass(frozen=True)
class RouletteTimeline:
    """一次转动的时间线：t < t_omega 时转动，之后停止。"""

    record: TrialRecord

    @property
    def t_omega(self) -> int:
        return self.record.t_omega

    @property
    def stopped_cell(self) -> int:
        return int(self.record.realized)

    def state_at(self, t: int) -> RouletteState:
        if t < 0:
            raise ValueError(f"时间刻度不能为负: {t}")
        if t < self.t_omega:
            return RouletteState(Rotating())
        return RouletteState(Stopped(self.stopped_cell))

    def status_at(self, cell: int, t: int) -> OutcomeStatus:
        """委托给 event_core.status_at 的格子状态。"""
        return status_at(self.record, cell_label(cell), t)

    def cell_probability(self, cell: int, t: int) -> Fraction:
        return Fraction(self.status_at(cell, t).probability)


def spin(seed: int) -> tuple[RouletteTimeline, TrialRecord]:
    """
    转动一次轮盘。

    停止的格子直接从均匀分布抽取，不模拟小球的减速过程。

    参数:
        seed: 整数种子

    返回:
        (时间线, 试验记录)
    """
    record = sample_trial(roulette_event(), TrialStream(seed), 0)
    logger.debug(f"轮盘停在 {record.realized} (seed={seed})")
    return RouletteTimeline(record), record


def spin_many(n: int, seed: int) -> Collective:
    """转动 n 次轮盘，返回 37 格上的集体。"""
    return run_collective(roulette_event(), n, seed)
