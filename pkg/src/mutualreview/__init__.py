"""Simulator and closed-form calculator for mutual (proposer-as-reviewer) proposal review."""

__version__ = "0.1.0"

from .assignment import ForcedReview, incidence_check, sample_assignment
from .engine import (
    conditional_experiment,
    delta_experiment,
    ranking_accuracy,
    run_experiment,
    run_replication,
)
from .model import (
    Assignment,
    BehaviorProfile,
    ConfigError,
    ControversialSet,
    FundingStats,
    GroupConfig,
    Honest,
    Noisy,
    OneSidedFavor,
    ReciprocalFavor,
    ReverseRanking,
    ReviewRound,
    SamplingExhausted,
    ScoreTable,
    validate_config,
)

__all__ = [
    "Assignment",
    "BehaviorProfile",
    "ConfigError",
    "ControversialSet",
    "ForcedReview",
    "FundingStats",
    "GroupConfig",
    "Honest",
    "Noisy",
    "OneSidedFavor",
    "ReciprocalFavor",
    "ReverseRanking",
    "ReviewRound",
    "SamplingExhausted",
    "ScoreTable",
    "conditional_experiment",
    "delta_experiment",
    "incidence_check",
    "ranking_accuracy",
    "run_experiment",
    "run_replication",
    "sample_assignment",
    "validate_config",
]
