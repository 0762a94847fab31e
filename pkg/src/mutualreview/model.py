"""Shared domain types for the mutual review simulator.

Proposals are identified by their intrinsic merit ``1..N`` (higher is better)
in everything user facing.  Arrays are stored 0-based, so array slot ``k``
always holds merit ``k + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np


TIE_BREAKS = ("random", "merit")


class ConfigError(ValueError):
    """A configuration violates one of the group or profile constraints."""


class SamplingExhausted(RuntimeError):
    """No assignment satisfying the requested constraints could be built."""


@dataclass(frozen=True)
class GroupConfig:
    n_proposals: int
    reviews_per_pi: int
    acceptance_rate: float = 0.15
    utility_exponent: float = 1.0
    bonus_enabled: bool = True
    mutual_review_allowed: bool = True
    seed: int = 0
    # "random": uniform tie-breaks; "merit": ties go to the higher merit index
    tie_break: str = "random"

    @property
    def n_funded(self) -> int:
        # rounding guards against 0.15 * 20 == 3.0000000000000004
        return math.ceil(round(self.acceptance_rate * self.n_proposals, 9))

    def replace(self, **changes) -> "GroupConfig":
        fields = {**self.__dict__, **changes}
        return GroupConfig(**fields)


def validate_config(cfg: GroupConfig) -> None:
    """Raise :class:`ConfigError` naming the first violated constraint."""
    n, m = cfg.n_proposals, cfg.reviews_per_pi
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ConfigError(f"n_proposals must be an integer >= 2, got {n!r}")
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ConfigError(f"reviews_per_pi must be a positive integer, got {m!r}")
    if m > n - 1:
        raise ConfigError(f"reviews_per_pi must satisfy m <= N-1 (m={m}, N={n})")
    if not 0 < cfg.acceptance_rate < 1:
        raise ConfigError(f"acceptance_rate must lie in (0, 1), got {cfg.acceptance_rate}")
    if not cfg.utility_exponent > 0:
        raise ConfigError(f"utility_exponent must be > 0, got {cfg.utility_exponent}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {cfg.seed}")
    if cfg.tie_break not in TIE_BREAKS:
        raise ConfigError(f"tie_break must be one of {TIE_BREAKS}, got {cfg.tie_break!r}")
    if n > 63:
        # adjacency is kept as one int64 bitmask per reviewer
        raise ConfigError(f"n_proposals above 63 is not supported, got {n}")


@dataclass(frozen=True, eq=False)
class Assignment:
    """Review piles: ``piles[i]`` holds the 0-based proposals reviewer ``i`` ranks."""

    piles: np.ndarray

    def __post_init__(self):
        piles = np.asarray(self.piles, dtype=np.int64)
        piles.setflags(write=False)
        object.__setattr__(self, "piles", piles)

    @property
    def n(self) -> int:
        return self.piles.shape[0]

    @property
    def m(self) -> int:
        return self.piles.shape[1]

    @property
    def reviewers(self) -> np.ndarray:
        """Inverse map: row ``j`` lists the reviewers of proposal ``j`` in increasing order."""
        inc = self.incidence()
        return np.array([np.flatnonzero(inc[:, j]) for j in range(self.n)])

    def incidence(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n), dtype=np.int64)
        np.add.at(mat, (np.repeat(np.arange(self.n), self.m), self.piles.ravel()), 1)
        return mat


@dataclass(frozen=True, eq=False)
class ReviewRound:
    """Borda scores aligned slot-for-slot with ``Assignment.piles``."""

    borda: np.ndarray

    def __post_init__(self):
        borda = np.asarray(self.borda, dtype=np.int64)
        m = borda.shape[-1]
        expected = np.arange(m)
        assert np.array_equal(np.sort(borda, axis=-1), np.broadcast_to(expected, borda.shape)), (
            "each reviewer must hand out every score 0..m-1 exactly once"
        )
        borda.setflags(write=False)
        object.__setattr__(self, "borda", borda)


@dataclass(frozen=True, eq=False)
class ScoreTable:
    mbc: np.ndarray
    quality: np.ndarray
    q_max: int
    spacing: float
    bonus: np.ndarray
    final: np.ndarray
    global_rank: np.ndarray
    funded: np.ndarray
    degenerate: bool = False

    def funded_merits(self) -> list[int]:
        return [int(k) + 1 for k in np.flatnonzero(self.funded)]


# -- behaviour profiles -----------------------------------------------------

@dataclass(frozen=True)
class Honest:
    pass


@dataclass(frozen=True)
class Noisy:
    sigma: float


@dataclass(frozen=True)
class ReverseRanking:
    pass


@dataclass(frozen=True)
class OneSidedFavor:
    ally: int


@dataclass(frozen=True)
class ReciprocalFavor:
    ally: int


Strategy = Union[Honest, Noisy, ReverseRanking, OneSidedFavor, ReciprocalFavor]


@dataclass(frozen=True)
class ControversialSet:
    """Proposals whose perceived merit is shifted by ``+shift`` or ``-shift`` per reviewer."""

    indices: tuple[int, ...]
    shift: float = 5.0
    sigma: float = 2.5
    p_plus: float = 0.5


@dataclass(frozen=True)
class BehaviorProfile:
    """Per-reviewer strategies keyed by merit index; unlisted reviewers are honest.

    ``sigma`` is the perception noise of every reviewer not given an explicit
    :class:`Noisy` strategy.
    """

    strategies: Mapping[int, Strategy] = field(default_factory=dict)
    sigma: float = 0.0
    controversy: ControversialSet | None = None
    label: str = ""

    def strategy_of(self, merit: int) -> Strategy:
        return self.strategies.get(merit, Honest())

    def validate(self, n: int) -> None:
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        for merit, strat in self.strategies.items():
            if not 1 <= merit <= n:
                raise ConfigError(f"reviewer {merit} is not a proposal index in 1..{n}")
            if isinstance(strat, Noisy) and strat.sigma < 0:
                raise ConfigError(f"reviewer {merit}: sigma must be >= 0")
            if isinstance(strat, (OneSidedFavor, ReciprocalFavor)):
                if strat.ally == merit:
                    raise ConfigError(f"reviewer {merit} cannot favor itself")
                if not 1 <= strat.ally <= n:
                    raise ConfigError(f"ally {strat.ally} is not a proposal index in 1..{n}")
        c = self.controversy
        if c is not None:
            bad = [k for k in c.indices if not 1 <= k <= n]
            if bad:
                raise ConfigError(f"controversial indices out of range: {bad}")
            if c.shift < 0 or c.sigma < 0:
                raise ConfigError("controversy shift and sigma must be >= 0")
            if not 0 <= c.p_plus <= 1:
                raise ConfigError(f"p_plus must lie in [0, 1], got {c.p_plus}")


def reciprocal_pair(i: int, j: int) -> dict[int, Strategy]:
    return {i: ReciprocalFavor(j), j: ReciprocalFavor(i)}


@dataclass(frozen=True, eq=False)
class FundingStats:
    replications: int
    funded_probability: np.ndarray
    std_error: np.ndarray
    label: str = ""
    mean_mbc: np.ndarray | None = None
    mbc_std_error: np.ndarray | None = None
    degenerate: int = 0

    def probability(self, merit: int) -> float:
        return float(self.funded_probability[merit - 1])
