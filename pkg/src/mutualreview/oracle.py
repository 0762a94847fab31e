"""Closed-form expectations for honest, reverse-ranking and colluding reviewers.

These never touch the simulator and serve as its independent check.  Indices
are merit indices ``1..N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import ConfigError, GroupConfig


class BonusMode(str, Enum):
    NONE = "none"
    IDEAL = "ideal_2_over_N"
    DEGRADED = "degraded_1_over_N"


@dataclass(frozen=True)
class UtilityParams:
    n: int
    p: float = 1.0
    bonus_mode: BonusMode = BonusMode.NONE
    e: int = 0
    m: int = 7

    def __post_init__(self):
        if self.p <= 0:
            raise ConfigError(f"p must be > 0, got {self.p}")
        if not 0 <= self.e <= self.m:
            raise ConfigError(f"e must lie in 0..m, got {self.e}")


def log_comb(n: int, k: int) -> float:
    if k < 0 or k > n or n < 0:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def borda_pmf(i: int, k: int, cfg: GroupConfig) -> float:
    """Probability that an honest random reviewer gives proposal ``i`` score ``k``.

    The other m-1 pile members are a uniform draw from the N-1 other
    proposals, and ``i`` scores k exactly when k of them rank below it.
    """
    n, m = cfg.n_proposals, cfg.reviews_per_pi
    lp = log_comb(m - 1, k) + log_comb(n - m, i - k - 1) - log_comb(n - 1, i - 1)
    return 0.0 if lp == -math.inf else math.exp(lp)


def expected_mbc(i: int, e: int, cfg: GroupConfig) -> float:
    """E[MBC_i] when ``e`` of proposal i's m reviewers submit reversed rankings."""
    n, m = cfg.n_proposals, cfg.reviews_per_pi
    if not 0 <= e <= m:
        raise ConfigError(f"e must lie in 0..m, got {e}")
    frac = e / m
    return (1 - frac) * (i - 1) / (n - 1) + frac * (n - i) / (n - 1)


def _weights(i: int, n: int, p: float, skip=()):
    return [(j, 1.0 / abs(i - j) ** p) for j in range(1, n + 1) if j != i and j not in skip]


def utility_truthful(i: int, params: UtilityParams) -> float:
    n = params.n
    return sum((i - j) * w for j, w in _weights(i, n, params.p)) / (n - 1)


def evil_correction(i: int, params: UtilityParams) -> float:
    """Utility change of a lone reverse-ranking reviewer when bonuses are off.

    Reversal lifts rival j's expected MBC by ``2((N+1)/2 - j)/(N-1)^2``, which
    enters the utility with a minus sign: positive for strong reviewers, who
    mostly pull strong rivals down.
    """
    n = params.n
    total = sum(((n + 1) / 2 - j) * w for j, w in _weights(i, n, params.p))
    return -2.0 * total / (n - 1) ** 2


def utility_evil(i: int, params: UtilityParams) -> float:
    return utility_truthful(i, params) + evil_correction(i, params)


def evil_bonus_correction(i: int, params: UtilityParams) -> float:
    """As :func:`evil_correction`, plus the deviator trailing every honest reviewer by 1/N of bonus."""
    n = params.n
    total = sum((2 * n - 1 + 1 / n - 2 * j) * w for j, w in _weights(i, n, params.p))
    return -total / (n - 1) ** 2


def utility_evil_with_bonus(i: int, params: UtilityParams) -> float:
    if params.bonus_mode is not BonusMode.DEGRADED:
        raise ConfigError("utility_evil_with_bonus assumes the degraded 1/N bonus mode")
    return utility_truthful(i, params) + evil_bonus_correction(i, params)


def expected_mbc_collusion(j: int, k: int, cfg: GroupConfig) -> tuple[float, float]:
    """(E[MBC] of the favoured ally j, E[MBC] of a bystander k) given the colluder reviews j."""
    n, m = cfg.n_proposals, cfg.reviews_per_pi
    ally = (j - 1) / (n - 1) + (n - j) / (m * (n - 1))
    bystander = (k - 1) / (n - 1) - _rival_shift(k, n, m)
    return ally, bystander


def _rival_shift(k: int, n: int, m: int) -> float:
    return (k - 1 - (m - 2) / (m - 1) * (n - k)) / (n - 1) ** 2


@dataclass(frozen=True)
class CollusionUtility:
    baseline: float
    boost: float = 0.0
    rival_shift: float = 0.0
    ally_boost_loss: float = 0.0
    bonus_loss: float = 0.0

    @property
    def total(self) -> float:
        return self.baseline + self.boost + self.rival_shift + self.ally_boost_loss + self.bonus_loss


def bonus_gap(params: UtilityParams) -> float:
    """Expected bonus of the colluder minus that of any other reviewer."""
    if params.bonus_mode is BonusMode.IDEAL:
        return -2.0 / params.n
    if params.bonus_mode is BonusMode.DEGRADED:
        return -1.0 / params.n
    return 0.0


def utility_collusion(i: int, j: int, params: UtilityParams) -> tuple[CollusionUtility, CollusionUtility]:
    """Expected utilities of the favoured ally j and the colluder i under one-sided favors.

    The ally's bonus is assumed equal in expectation to everyone else's.
    """
    n, m, p = params.n, params.m, params.p
    lift = (n - j) / (m * (n - 1))
    ally = CollusionUtility(
        baseline=utility_truthful(j, params),
        boost=lift * sum(w for _, w in _weights(j, n, p)),
        rival_shift=sum(_rival_shift(k, n, m) * w for k, w in _weights(j, n, p, skip=(i,))),
    )
    gap = bonus_gap(params)
    colluder = CollusionUtility(
        baseline=utility_truthful(i, params),
        rival_shift=sum(_rival_shift(k, n, m) * w for k, w in _weights(i, n, p, skip=(j,))),
        ally_boost_loss=-lift / abs(i - j) ** p,
        bonus_loss=sum(gap * w for _, w in _weights(i, n, p)),
    )
    return ally, colluder
