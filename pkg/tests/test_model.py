import numpy as np
import pytest

from mutualreview.model import (
    Assignment,
    BehaviorProfile,
    ConfigError,
    ControversialSet,
    GroupConfig,
    OneSidedFavor,
    ReviewRound,
    validate_config,
)


def test_default_group_is_valid():
    validate_config(GroupConfig(25, 7, 0.15, 1.0))


def test_minimal_group_is_valid():
    validate_config(GroupConfig(3, 2, 0.34, 0.5))


@pytest.mark.parametrize(
    "cfg, fragment",
    [
        (GroupConfig(5, 5), "m <= N-1"),
        (GroupConfig(5, 0), "reviews_per_pi"),
        (GroupConfig(25, 7, acceptance_rate=1.0), "acceptance_rate"),
        (GroupConfig(25, 7, acceptance_rate=0.0), "acceptance_rate"),
        (GroupConfig(25, 7, utility_exponent=0.0), "utility_exponent"),
        (GroupConfig(25, 7, seed=-1), "seed"),
        (GroupConfig(25, 7, tie_break="index"), "tie_break"),
    ],
)
def test_invalid_configs_name_the_constraint(cfg, fragment):
    with pytest.raises(ConfigError, match=fragment):
        validate_config(cfg)


@pytest.mark.parametrize("n, rate, t", [(25, 0.15, 4), (20, 0.15, 3), (40, 0.15, 6), (4, 0.25, 1)])
def test_funded_count_is_ceiling(n, rate, t):
    assert GroupConfig(n, 2, rate).n_funded == t


def test_review_round_rejects_non_permutation():
    ReviewRound(np.array([[0, 1, 2], [2, 0, 1]]))
    with pytest.raises(AssertionError):
        ReviewRound(np.array([[0, 1, 1]]))


def test_assignment_inverse_map():
    a = Assignment(np.array([[1, 2], [0, 2], [0, 1]]))
    assert a.reviewers.tolist() == [[1, 2], [0, 2], [0, 1]]
    assert (a.incidence().sum(axis=0) == 2).all()


def test_profile_validation():
    BehaviorProfile({3: OneSidedFavor(5)}).validate(25)
    with pytest.raises(ConfigError):
        BehaviorProfile({3: OneSidedFavor(3)}).validate(25)
    with pytest.raises(ConfigError):
        BehaviorProfile({3: OneSidedFavor(26)}).validate(25)
    with pytest.raises(ConfigError):
        BehaviorProfile(controversy=ControversialSet((0,))).validate(25)
    with pytest.raises(ConfigError):
        BehaviorProfile(sigma=-1).validate(25)
