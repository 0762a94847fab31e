"""Scoring pipeline: MBC, global list, review quality, bonus and funding.

All functions accept a single replication (leading shape ``()``) or a batch
(leading shape ``(B,)``).  Piles are 0-based proposal indices.  Tie-breaking
draws come in as ``keys`` (uniforms) so that paired scenarios can share them;
when omitted they are drawn from ``rng``.
"""

from __future__ import annotations

import numpy as np

from .model import GroupConfig


def _keys(shape, keys, rng) -> np.ndarray:
    if keys is not None:
        return keys
    if rng is None:
        rng = np.random.default_rng()
    return rng.random(shape)


def mbc_normalizer(m: int) -> int:
    # m = 1 hands out only zeros; keep MBC at 0 instead of 0/0
    return max(m * (m - 1), 1)


def borda_totals(borda: np.ndarray, piles: np.ndarray) -> np.ndarray:
    """Integer sum of the Borda scores each proposal received."""
    *lead, n, m = piles.shape
    b = int(np.prod(lead)) if lead else 1
    offsets = (np.arange(b) * n)[:, None]
    flat = (piles.reshape(b, n * m) + offsets).ravel()
    totals = np.bincount(flat, weights=borda.reshape(-1), minlength=b * n)
    return totals.reshape(*lead, n).round().astype(np.int64)


def compute_mbc(borda: np.ndarray, piles: np.ndarray, m: int | None = None) -> np.ndarray:
    if m is None:
        m = piles.shape[-1]
    return borda_totals(borda, piles) / mbc_normalizer(m)


def _descending_positions(score: np.ndarray, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((keys, -score), axis=-1)
    pos = np.empty(order.shape, dtype=np.int64)
    np.put_along_axis(pos, order, np.arange(order.shape[-1]), axis=-1)
    return order, pos


def global_ranking(mbc: np.ndarray, rng=None, keys=None) -> tuple[np.ndarray, np.ndarray]:
    """Order proposals by MBC, best first; ties broken uniformly at random.

    Returns ``(order, rank)`` where ``order[0]`` is the top proposal and
    ``rank[j]`` is proposal ``j``'s 0-based position.
    """
    mbc = np.asarray(mbc, dtype=float)
    return _descending_positions(mbc, _keys(mbc.shape, keys, rng))


def quality_measure(borda: np.ndarray, piles: np.ndarray, rank: np.ndarray) -> np.ndarray:
    """Q for every reviewer: total displacement between the submitted order and
    the global order restricted to the pile (0-based ranks, best first)."""
    m = piles.shape[-1]
    lead = rank.shape[:-1]
    grank = np.take_along_axis(rank, piles.reshape(*lead, -1), axis=-1).reshape(piles.shape)
    within = np.argsort(np.argsort(grank, axis=-1), axis=-1)
    submitted = (m - 1) - np.asarray(borda)
    return np.abs(submitted - within).sum(axis=-1)


def q_max(m: int) -> int:
    return (m * m) // 2


def bonus(quality: np.ndarray, mbc: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Review-quality bonus ``2a (Qmax - Q) / Qmax`` with ``a = (MBC_max - MBC_min) / N``.

    Returns ``(bonus, spacing, degenerate)``; a replication whose MBCs are all
    equal is flagged degenerate and gets a zero bonus.
    """
    n = mbc.shape[-1]
    spread = mbc.max(axis=-1) - mbc.min(axis=-1)
    spacing = spread / n
    degenerate = spread == 0
    qmax = q_max(m)
    if qmax == 0:
        return np.zeros(np.shape(quality)), spacing, degenerate
    b = 2 * np.asarray(spacing)[..., None] * (qmax - np.asarray(quality)) / qmax
    return b, spacing, degenerate


def final_scores(mbc: np.ndarray, bonus_values: np.ndarray, cfg: GroupConfig) -> np.ndarray:
    if cfg.bonus_enabled:
        return mbc + bonus_values
    return np.array(mbc, dtype=float, copy=True)


def fund(final: np.ndarray, cfg: GroupConfig, rng=None, keys=None) -> np.ndarray:
    """Boolean mask of the top ``T = ceil(rate * N)`` proposals by final score."""
    final = np.asarray(final, dtype=float)
    _, pos = _descending_positions(final, _keys(final.shape, keys, rng))
    return pos < cfg.n_funded
