"""How reviewers perceive their pile and turn it into Borda scores.

Ranking functions work on the last axis, so they accept a single pile of
shape (m,) or a whole batch of shape (..., m).
"""

from __future__ import annotations

import numpy as np

from .model import (
    BehaviorProfile,
    Noisy,
    OneSidedFavor,
    ReciprocalFavor,
    ReverseRanking,
)

HONEST, REVERSE, ONE_SIDED, RECIPROCAL = range(4)


def reviewer_sigmas(profile: BehaviorProfile, n: int) -> np.ndarray:
    sig = np.full(n, float(profile.sigma))
    for merit, strat in profile.strategies.items():
        if isinstance(strat, Noisy):
            sig[merit - 1] = strat.sigma
    return sig


def _perceived(merits, sigma, controversy, normals, uniforms) -> np.ndarray:
    values = merits + sigma * normals
    c = controversy
    if c is not None and c.indices:
        hot = np.isin(merits, c.indices)
        sign = np.where(uniforms < c.p_plus, 1.0, -1.0)
        values = np.where(hot, merits + c.sigma * normals + c.shift * sign, values)
    return values


def perceive_batch(
    piles: np.ndarray,
    profile: BehaviorProfile,
    normals: np.ndarray,
    uniforms: np.ndarray,
) -> np.ndarray:
    """Perceived values ``merit + noise`` for every (reviewer, slot) of 0-based ``piles``.

    ``normals`` and ``uniforms`` have the shape of ``piles`` and are consumed
    whatever the profile, so scenarios sharing them see identical randomness.
    """
    sig = reviewer_sigmas(profile, piles.shape[-2])[:, None]
    return _perceived(piles + 1, sig, profile.controversy, normals, uniforms)


def perceive(reviewer: int, pile, profile: BehaviorProfile, rng: np.random.Generator) -> np.ndarray:
    """Perceived values for one reviewer's pile, given as merit indices."""
    merits = np.asarray(pile)
    strat = profile.strategy_of(reviewer)
    sigma = strat.sigma if isinstance(strat, Noisy) else profile.sigma
    normals = rng.standard_normal(merits.shape)
    uniforms = rng.random(merits.shape)
    return _perceived(merits, sigma, profile.controversy, normals, uniforms)


def rank_honest(values, keys=None) -> np.ndarray:
    """Borda scores: highest perceived value gets m-1, lowest gets 0.

    Equal values are ordered by ``keys`` (random uniforms) when given.
    """
    values = np.asarray(values, dtype=float)
    if keys is None:
        order = np.argsort(values, axis=-1, kind="stable")
    else:
        order = np.lexsort((keys, values), axis=-1)
    scores = np.empty(values.shape, dtype=np.int64)
    np.put_along_axis(scores, order, np.arange(values.shape[-1]), axis=-1)
    return scores


def rank_reverse(values, keys=None) -> np.ndarray:
    scores = rank_honest(values, keys)
    return (scores.shape[-1] - 1) - scores


def _favor(honest: np.ndarray, ally_slot: np.ndarray, reverse_rest: bool) -> np.ndarray:
    m = honest.shape[-1]
    present = ally_slot.any(axis=-1, keepdims=True)
    ally_score = np.where(ally_slot, honest, 0).sum(axis=-1, keepdims=True)
    rest = honest - (honest > ally_score)
    if reverse_rest:
        rest = (m - 2) - rest
    favored = np.where(ally_slot, m - 1, rest)
    return np.where(present, favored, honest)


def rank_one_sided_favor(values, pile, ally: int, keys=None) -> np.ndarray:
    """Ally (merit index) gets m-1; the rest are scored m-2..0 in reverse perceived order."""
    honest = rank_honest(values, keys)
    return _favor(honest, np.asarray(pile) == ally, reverse_rest=True)


def rank_reciprocal_favor(values, pile, ally: int, keys=None) -> np.ndarray:
    """Ally (merit index) gets m-1; the rest keep their honest order on 0..m-2."""
    honest = rank_honest(values, keys)
    return _favor(honest, np.asarray(pile) == ally, reverse_rest=False)


def strategy_codes(profile: BehaviorProfile, n: int) -> tuple[np.ndarray, np.ndarray]:
    kind = np.full(n, HONEST)
    ally = np.full(n, -1)
    for merit, strat in profile.strategies.items():
        if isinstance(strat, ReverseRanking):
            kind[merit - 1] = REVERSE
        elif isinstance(strat, OneSidedFavor):
            kind[merit - 1], ally[merit - 1] = ONE_SIDED, strat.ally - 1
        elif isinstance(strat, ReciprocalFavor):
            kind[merit - 1], ally[merit - 1] = RECIPROCAL, strat.ally - 1
    return kind, ally


def submit_scores(
    piles: np.ndarray,
    values: np.ndarray,
    profile: BehaviorProfile,
    keys: np.ndarray | None = None,
) -> np.ndarray:
    """Borda scores every reviewer submits, shape (..., N, m) like ``piles``."""
    n, m = piles.shape[-2:]
    honest = rank_honest(values, keys)
    kind, ally = strategy_codes(profile, n)
    if np.all(kind == HONEST):
        return honest
    kind = kind[:, None]
    ally_slot = piles == ally[:, None]
    scores = np.where(kind == REVERSE, (m - 1) - honest, honest)
    scores = np.where(kind == ONE_SIDED, _favor(honest, ally_slot, True), scores)
    scores = np.where(kind == RECIPROCAL, _favor(honest, ally_slot, False), scores)
    return scores
