"""Monte Carlo runner: assignment -> behaviour -> mechanism, many times over.

Replications are processed in fixed-size blocks.  Block ``b`` of stream ``s``
draws everything from ``SeedSequence(seed, spawn_key=(s, b))``, so results
depend only on the master seed, never on how blocks are spread over workers.
Within a block all randomness (assignments, perception noise, controversy
signs, tie-break keys) is drawn before any profile is applied; evaluating
several profiles on one block is what "paired" means here.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import mechanism
from .assignment import ForcedReview, sample_piles
from .behavior import perceive_batch, submit_scores
from .model import (
    BehaviorProfile,
    FundingStats,
    GroupConfig,
    ReviewRound,
    ScoreTable,
    validate_config,
)

BLOCK_SIZE = 2000
DEFAULT_REPLICATIONS = 100_000


@dataclass
class Draws:
    piles: np.ndarray
    normals: np.ndarray
    uniforms: np.ndarray
    rank_keys: np.ndarray
    global_keys: np.ndarray
    fund_keys: np.ndarray

    @property
    def size(self) -> int:
        return self.piles.shape[0]


def draw_block(
    cfg: GroupConfig, size: int, rng: np.random.Generator, forced: ForcedReview | None = None
) -> Draws:
    piles = sample_piles(cfg, size, rng, forced)
    shape = piles.shape
    return Draws(
        piles=piles,
        normals=rng.standard_normal(shape),
        uniforms=rng.random(shape),
        rank_keys=rng.random(shape),
        global_keys=rng.random(shape[:2]),
        fund_keys=rng.random(shape[:2]),
    )


@dataclass
class BatchResult:
    borda: np.ndarray
    totals: np.ndarray
    mbc: np.ndarray
    rank: np.ndarray
    quality: np.ndarray
    spacing: np.ndarray
    bonus: np.ndarray
    final: np.ndarray
    funded: np.ndarray
    degenerate: np.ndarray


def evaluate(cfg: GroupConfig, profile: BehaviorProfile, draws: Draws) -> BatchResult:
    m = cfg.reviews_per_pi
    global_keys, fund_keys = draws.global_keys, draws.fund_keys
    if cfg.tie_break == "merit":
        global_keys = fund_keys = np.broadcast_to(-np.arange(cfg.n_proposals, dtype=float), global_keys.shape)
    values = perceive_batch(draws.piles, profile, draws.normals, draws.uniforms)
    borda = submit_scores(draws.piles, values, profile, draws.rank_keys)
    ReviewRound(borda)
    totals = mechanism.borda_totals(borda, draws.piles)
    mbc = totals / mechanism.mbc_normalizer(m)
    _, rank = mechanism.global_ranking(mbc, keys=global_keys)
    quality = mechanism.quality_measure(borda, draws.piles, rank)
    bonus, spacing, degenerate = mechanism.bonus(quality, mbc, m)
    final = mechanism.final_scores(mbc, bonus, cfg)
    funded = mechanism.fund(final, cfg, keys=fund_keys)
    return BatchResult(borda, totals, mbc, rank, quality, spacing, bonus, final, funded, degenerate)


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def run_replication(
    cfg: GroupConfig,
    profile: BehaviorProfile,
    rng: np.random.Generator,
    forced: ForcedReview | None = None,
) -> ScoreTable:
    """One full pass of the mechanism; deterministic given the state of ``rng``."""
    validate_config(cfg)
    profile.validate(cfg.n_proposals)
    res = evaluate(cfg, profile, draw_block(cfg, 1, rng, forced))
    return ScoreTable(
        mbc=res.mbc[0],
        quality=res.quality[0],
        q_max=mechanism.q_max(cfg.reviews_per_pi),
        spacing=float(res.spacing[0]),
        bonus=res.bonus[0],
        final=res.final[0],
        global_rank=res.rank[0],
        funded=res.funded[0],
        degenerate=bool(res.degenerate[0]),
    )


# -- tallies ---------------------------------------------------------------

@dataclass
class Tally:
    """Integer sufficient statistics for one profile over some replications."""

    n: int
    replications: int = 0
    funded: np.ndarray = None
    totals: np.ndarray = None
    totals_sq: np.ndarray = None
    degenerate: int = 0
    top_exact: int = 0
    discordant: int = 0
    discordant_sq: int = 0

    def __post_init__(self):
        for name in ("funded", "totals", "totals_sq"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.n, dtype=np.int64))

    def add(self, other: "Tally") -> None:
        self.replications += other.replications
        self.funded += other.funded
        self.totals += other.totals
        self.totals_sq += other.totals_sq
        self.degenerate += other.degenerate
        self.top_exact += other.top_exact
        self.discordant += other.discordant
        self.discordant_sq += other.discordant_sq


def _discordant_pairs(rank: np.ndarray) -> np.ndarray:
    # pairs (a, b) with merit a > b but a listed below b
    lower = np.tril(np.ones((rank.shape[-1],) * 2, dtype=bool), k=-1)
    worse = rank[:, :, None] > rank[:, None, :]
    return (worse & lower).sum(axis=(1, 2))


def _tally(cfg: GroupConfig, res: BatchResult) -> Tally:
    n, t = cfg.n_proposals, cfg.n_funded
    truth = np.zeros(n, dtype=bool)
    truth[n - t:] = True
    disc = _discordant_pairs(res.rank).astype(np.int64)
    return Tally(
        n=n,
        replications=res.funded.shape[0],
        funded=res.funded.sum(axis=0).astype(np.int64),
        totals=res.totals.sum(axis=0),
        totals_sq=(res.totals**2).sum(axis=0),
        degenerate=int(res.degenerate.sum()),
        top_exact=int(np.all(res.funded == truth, axis=1).sum()),
        discordant=int(disc.sum()),
        discordant_sq=int((disc**2).sum()),
    )


@dataclass
class _Job:
    cfgs: tuple
    profiles: tuple
    seed: int
    block: int
    size: int
    stream: int = 0
    forced: ForcedReview | None = None


def _run_block(job: _Job) -> tuple[list[Tally], list[np.ndarray]]:
    rng = block_rng(job.seed, job.block, job.stream)
    draws = draw_block(job.cfgs[0], job.size, rng, job.forced)
    results = [evaluate(c, prof, draws) for c, prof in zip(job.cfgs, job.profiles)]
    tallies = [_tally(c, r) for c, r in zip(job.cfgs, results)]
    # replications where each profile's funding differs from the first one's
    differ = [(r.funded != results[0].funded).sum(axis=0).astype(np.int64) for r in results]
    return tallies, differ


def simulate(
    cfg: GroupConfig,
    profiles: Sequence[BehaviorProfile],
    replications: int,
    seed: int | None = None,
    forced: ForcedReview | None = None,
    workers: int = 1,
    stream: int = 0,
    cfgs: Sequence[GroupConfig] | None = None,
) -> tuple[list[Tally], list[np.ndarray]]:
    """Run every profile on shared draws.

    ``cfgs`` optionally gives each profile its own mechanism settings; they
    must agree with ``cfg`` on N and m.  Returns one tally per profile and the
    per-proposal count of replications whose funding differs from profile 0's.
    """
    cfgs = tuple(cfgs) if cfgs is not None else (cfg,) * len(profiles)
    if len(cfgs) != len(profiles):
        raise ValueError("need one config per profile")
    for c, prof in zip(cfgs, profiles):
        validate_config(c)
        if (c.n_proposals, c.reviews_per_pi) != (cfg.n_proposals, cfg.reviews_per_pi):
            raise ValueError("paired scenarios must share N and m")
        prof.validate(cfg.n_proposals)
    if replications < 1:
        raise ValueError("replications must be >= 1")
    seed = cfg.seed if seed is None else seed
    n_blocks = math.ceil(replications / BLOCK_SIZE)
    jobs = [
        _Job(cfgs, tuple(profiles), seed, b, min(BLOCK_SIZE, replications - b * BLOCK_SIZE), stream, forced)
        for b in range(n_blocks)
    ]
    if workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_block, jobs))
    else:
        outputs = [_run_block(job) for job in jobs]

    n = cfg.n_proposals
    tallies = [Tally(n) for _ in profiles]
    differ = [np.zeros(n, dtype=np.int64) for _ in profiles]
    for block_tallies, block_differ in outputs:
        for acc, part in zip(tallies, block_tallies):
            acc.add(part)
        for acc, part in zip(differ, block_differ):
            acc += part
    return tallies, differ


def funding_stats(cfg: GroupConfig, tally: Tally, label: str = "") -> FundingStats:
    reps = tally.replications
    prob = tally.funded / reps
    norm = mechanism.mbc_normalizer(cfg.reviews_per_pi)
    mean = tally.totals / reps / norm
    var = np.maximum(tally.totals_sq / reps - (tally.totals / reps) ** 2, 0.0) / norm**2
    return FundingStats(
        replications=reps,
        funded_probability=prob,
        std_error=np.sqrt(prob * (1 - prob) / reps),
        label=label,
        mean_mbc=mean,
        mbc_std_error=np.sqrt(var / reps),
        degenerate=tally.degenerate,
    )


def run_experiment(
    cfg: GroupConfig,
    profile: BehaviorProfile,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int | None = None,
    workers: int = 1,
) -> FundingStats:
    (tally,), _ = simulate(cfg, [profile], replications, seed, workers=workers)
    return funding_stats(cfg, tally, profile.label)


def conditional_experiment(
    cfg: GroupConfig,
    profile: BehaviorProfile,
    condition: ForcedReview,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int | None = None,
    workers: int = 1,
) -> FundingStats:
    """Funding statistics given that ``condition.reviewer`` reviews ``condition.proposal``."""
    (tally,), _ = simulate(cfg, [profile], replications, seed, forced=condition, workers=workers)
    return funding_stats(cfg, tally, profile.label)


@dataclass(frozen=True, eq=False)
class DeltaStats:
    base: FundingStats
    variant: FundingStats
    delta: np.ndarray
    std_error: np.ndarray
    paired: bool

    def at(self, merit: int) -> float:
        return float(self.delta[merit - 1])


def delta_experiment(
    cfg: GroupConfig,
    base: BehaviorProfile,
    variant: BehaviorProfile,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int | None = None,
    paired: bool = True,
    condition: ForcedReview | None = None,
    workers: int = 1,
    variant_cfg: GroupConfig | None = None,
) -> DeltaStats:
    """Variant minus base funding probabilities.

    ``variant_cfg`` lets the two sides differ in mechanism settings (e.g.
    bonus on vs off) while sharing the group size and, when paired, all draws.
    """
    vcfg = cfg if variant_cfg is None else variant_cfg
    reps = replications
    if paired:
        (tb, tv), (_, differ) = simulate(
            cfg, [base, variant], reps, seed, condition, workers, cfgs=[cfg, vcfg]
        )
    else:
        (tb,), _ = simulate(cfg, [base], reps, seed, condition, workers, stream=0)
        (tv,), _ = simulate(vcfg, [variant], reps, seed, condition, workers, stream=1)
        differ = None
    sb = funding_stats(cfg, tb, base.label)
    sv = funding_stats(vcfg, tv, variant.label)
    delta = sv.funded_probability - sb.funded_probability
    if differ is None:
        se = np.sqrt(sb.std_error**2 + sv.std_error**2)
    else:
        # per-replication difference d in {-1, 0, 1}; E[d^2] = P(differ)
        var = np.maximum(differ / reps - delta**2, 0.0)
        se = np.sqrt(var / reps)
    return DeltaStats(sb, sv, delta, se, paired)


@dataclass(frozen=True)
class AccuracyRow:
    m: int
    top_accuracy: float
    top_std_error: float
    kendall_tau: float
    kendall_std_error: float


def ranking_accuracy(
    cfg: GroupConfig,
    m_values: Sequence[int],
    replications: int = DEFAULT_REPLICATIONS,
    seed: int | None = None,
    profile: BehaviorProfile | None = None,
    workers: int = 1,
) -> list[AccuracyRow]:
    """Per m: P(funded set == true top-T) and the mean normalized Kendall-tau
    distance between the MBC list and the merit order."""
    profile = profile or BehaviorProfile()
    rows = []
    for m in m_values:
        mcfg = cfg.replace(reviews_per_pi=m)
        (tally,), _ = simulate(mcfg, [profile], replications, seed, workers=workers)
        reps = tally.replications
        acc = tally.top_exact / reps
        pairs = cfg.n_proposals * (cfg.n_proposals - 1) / 2
        mean = tally.discordant / reps
        var = max(tally.discordant_sq / reps - mean**2, 0.0)
        rows.append(
            AccuracyRow(
                m=m,
                top_accuracy=acc,
                top_std_error=math.sqrt(acc * (1 - acc) / reps),
                kendall_tau=mean / pairs,
                kendall_std_error=math.sqrt(var / reps) / pairs,
            )
        )
    return rows
