"""Random m-regular review assignments.

Every batch starts from a circulant assignment under a random relabelling
(reviewer at position t reviews positions t+1..t+m), which is regular, free of
self-review, and, when 2m <= N-1, free of mutual pairs.  A switch chain then
randomizes it: pick two review slots (i -> a) and (j -> b) and rewire them to
(i -> b) and (j -> a) when the result is still legal.  Proposals are drawn
uniformly and rejected moves leave the state unchanged, so the chain is
symmetric and its stationary law is uniform over legal assignments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Assignment, GroupConfig, SamplingExhausted, validate_config

# switch proposals per review slot
MIXING_SWEEPS = 5


@dataclass(frozen=True)
class ForcedReview:
    """Condition that ``reviewer`` is one of ``proposal``'s reviewers (merit indices)."""

    reviewer: int
    proposal: int


def default_steps(n: int, m: int) -> int:
    return MIXING_SWEEPS * n * m


def sample_piles(
    cfg: GroupConfig,
    size: int,
    rng: np.random.Generator,
    forced: ForcedReview | None = None,
    steps: int | None = None,
) -> np.ndarray:
    """Sample ``size`` assignments at once; returns 0-based piles of shape (size, N, m)."""
    n, m = cfg.n_proposals, cfg.reviews_per_pi
    if not cfg.mutual_review_allowed and 2 * m > n - 1:
        raise SamplingExhausted(
            f"no assignment with N={n}, m={m} avoids mutual pairs (needs 2m <= N-1)"
        )
    if forced is not None:
        i, j = forced.reviewer - 1, forced.proposal - 1
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise SamplingExhausted(f"cannot force reviewer {forced.reviewer} onto {forced.proposal}")
    if steps is None:
        steps = default_steps(n, m)

    pos = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
    if forced is not None:
        # put the forced reviewer at position 0 and its target at position 1
        rows = np.arange(size)
        for slot, who in ((0, i), (1, j)):
            where = np.argmax(pos == who, axis=1)
            pos[rows, where] = pos[rows, slot]
            pos[rows, slot] = who
    inv = np.argsort(pos, axis=1)
    rows = np.arange(size)[:, None]
    piles = np.stack([pos[rows, (inv + s) % n] for s in range(1, m + 1)], axis=2)
    if steps == 0 or m == n - 1:
        return np.sort(piles, axis=2)

    one = np.int64(1)
    flat = piles.reshape(-1).copy()
    bits = np.bitwise_or.reduce(one << piles, axis=2).reshape(-1)
    base_nm = np.arange(size) * (n * m)
    base_n = np.arange(size) * n
    pinned = base_nm + (i * m if forced is not None else -1)

    for _ in range(steps):
        r = rng.integers(n * m, size=(2, size))
        ps, pt = base_nm + r[0], base_nm + r[1]
        ri, rj = r[0] // m, r[1] // m
        a, b = flat[ps], flat[pt]
        bits_i, bits_j = bits[base_n + ri], bits[base_n + rj]
        ok = (ri != rj) & (a != b) & (b != ri) & (a != rj)
        ok &= ((bits_i >> b) & 1) == 0
        ok &= ((bits_j >> a) & 1) == 0
        if not cfg.mutual_review_allowed:
            ok &= ((bits[base_n + b] >> ri) & 1) == 0
            ok &= ((bits[base_n + a] >> rj) & 1) == 0
        if forced is not None:
            ok &= (ps != pinned) & (pt != pinned)
        k = np.flatnonzero(ok)
        if k.size == 0:
            continue
        flat[ps[k]] = b[k]
        flat[pt[k]] = a[k]
        toggle = (one << a[k]) | (one << b[k])
        bits[base_n[k] + ri[k]] ^= toggle
        bits[base_n[k] + rj[k]] ^= toggle
    # canonical slot order, so equal assignments give equal downstream draws
    return np.sort(flat.reshape(size, n, m), axis=2)


def sample_assignment(
    cfg: GroupConfig, rng: np.random.Generator, forced: ForcedReview | None = None
) -> Assignment:
    validate_config(cfg)
    return Assignment(sample_piles(cfg, 1, rng, forced)[0])


def incidence_check(a: Assignment, cfg: GroupConfig) -> bool:
    """True iff ``a`` is m-regular on both sides, has no self-review and honours the mutual-pair rule."""
    n, m = cfg.n_proposals, cfg.reviews_per_pi
    piles = a.piles
    if piles.shape != (n, m):
        return False
    if piles.min() < 0 or piles.max() >= n:
        return False
    inc = np.zeros((n, n), dtype=np.int64)
    np.add.at(inc, (np.repeat(np.arange(n), m), piles.ravel()), 1)
    if inc.max() > 1 or np.any(np.diag(inc)):
        return False
    if not (np.all(inc.sum(axis=0) == m) and np.all(inc.sum(axis=1) == m)):
        return False
    if not cfg.mutual_review_allowed and np.any(inc & inc.T):
        return False
    return True
