"""Independent brute-force references.

Nothing here imports the scoring pipeline: assignments, Borda scores, the
global list, Q, bonuses and the funding cut are recomputed with plain loops
and exact fractions.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def all_assignments(n: int, m: int, mutual_allowed: bool = True):
    """Every m-regular assignment without self-review, as tuples of sorted piles (0-based)."""
    choices = [list(itertools.combinations([j for j in range(n) if j != i], m)) for i in range(n)]
    for piles in itertools.product(*choices):
        counts = [0] * n
        for pile in piles:
            for j in pile:
                counts[j] += 1
        if any(c != m for c in counts):
            continue
        if not mutual_allowed and any(i in piles[j] for i in range(n) for j in piles[i]):
            continue
        yield piles


def _linear_extensions(score):
    """All best-first orders consistent with ``score``; equally likely under random tie-breaks."""
    n = len(score)
    for perm in itertools.permutations(range(n)):
        if all(score[perm[k]] >= score[perm[k + 1]] for k in range(n - 1)):
            yield perm


def _submitted(pile, reverse: bool):
    # honest, noiseless: higher merit (index) ranks higher
    best_first = sorted(pile, reverse=True)
    if reverse:
        best_first = best_first[::-1]
    m = len(pile)
    return {j: m - 1 - pos for pos, j in enumerate(best_first)}


def exact_funding(n: int, m: int, t: int, bonus: bool, reverse=(), mutual_allowed: bool = True):
    """Exact funding probabilities (Fractions) for noiseless reviewers, averaging
    uniformly over assignments, global-list tie-breaks and cutoff tie-breaks.

    ``reverse`` holds 0-based reviewers who submit reversed rankings.
    """
    assignments = list(all_assignments(n, m, mutual_allowed))
    prob = [Fraction(0)] * n
    qmax = (m * m) // 2
    for piles in assignments:
        scores = [_submitted(piles[i], i in reverse) for i in range(n)]
        totals = [0] * n
        for i in range(n):
            for j, s in scores[i].items():
                totals[j] += s
        mbc = [Fraction(tot, max(m * (m - 1), 1)) for tot in totals]
        orders = list(_linear_extensions(mbc))
        for order in orders:
            pos = {j: k for k, j in enumerate(order)}
            final = list(mbc)
            if bonus:
                a = (max(mbc) - min(mbc)) / n
                for i in range(n):
                    restricted = sorted(piles[i], key=lambda j: pos[j])
                    q = sum(abs((m - 1 - scores[i][j]) - restricted.index(j)) for j in piles[i])
                    b = 2 * a * Fraction(qmax - q, qmax) if qmax else Fraction(0)
                    final[i] = mbc[i] + b
            share = _cutoff_shares(final, t)
            weight = Fraction(1, len(assignments) * len(orders))
            for j in range(n):
                prob[j] += weight * share[j]
    return prob


def _cutoff_shares(final, t: int):
    """P(funded) per proposal when the top t are funded and cutoff ties are split uniformly."""
    ranked = sorted(set(final), reverse=True)
    share = [Fraction(0)] * len(final)
    slots = t
    for value in ranked:
        group = [j for j, v in enumerate(final) if v == value]
        if slots <= 0:
            break
        take = min(slots, len(group))
        for j in group:
            share[j] = Fraction(take, len(group))
        slots -= take
    return share


def brute_q_max(m: int) -> int:
    """Largest total displacement over all permutations of m items."""
    return max(sum(abs(k - p) for k, p in enumerate(perm)) for perm in itertools.permutations(range(m)))


def exact_pmf(n: int, m: int, i: int):
    """Distribution of the Borda score proposal i (1-based merit) gets from a random
    pile containing it, by enumerating every set of m-1 pile-mates."""
    counts = [0] * m
    others = [j for j in range(1, n + 1) if j != i]
    for mates in itertools.combinations(others, m - 1):
        counts[sum(1 for j in mates if j < i)] += 1
    total = math.comb(n - 1, m - 1)
    return [Fraction(c, total) for c in counts]


def conditional_mbc(n: int, m: int, target: int, deviator: int, mode: str) -> Fraction:
    """E[MBC_target] given ``deviator`` is one of its reviewers (1-based merits).

    Unlike the textbook formula this keeps track of self-exclusion: nobody's
    pile contains their own proposal, so a reviewer's m-1 pile-mates come from
    the N-2 proposals other than the target and the reviewer.  The remaining
    m-1 reviewers are treated as a uniform draw from everyone but the target
    and the deviator.
    """
    above_d = n - target - (1 if deviator > target else 0)
    if mode == "reverse":
        dev = Fraction((m - 1) * above_d, n - 2)
    elif mode == "favor":
        dev = Fraction(m - 1)
    else:
        raise ValueError(mode)
    p_below = Fraction(target - 1 - (1 if deviator < target else 0), n - 2)
    honest_each = (m - 1) * (Fraction(target - 1, n - 2) - p_below / (n - 2))
    return (dev + (m - 1) * honest_each) / (m * (m - 1))
