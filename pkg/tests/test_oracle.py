import itertools
import math

import pytest

from mutualreview.model import ConfigError, GroupConfig
from mutualreview.oracle import (
    BonusMode,
    UtilityParams,
    borda_pmf,
    evil_bonus_correction,
    evil_correction,
    expected_mbc,
    expected_mbc_collusion,
    log_comb,
    utility_collusion,
    utility_evil,
    utility_evil_with_bonus,
    utility_truthful,
)

from .oracles import exact_pmf

SIZES = [10, 25, 40]
EXPONENTS = [0.5, 1.0, 2.0]


def test_log_comb_out_of_range():
    assert log_comb(3, 4) == float("-inf")
    assert log_comb(3, -1) == float("-inf")
    assert log_comb(300, 150) == pytest.approx(math.log(math.comb(300, 150)), rel=1e-12)


@pytest.mark.parametrize("n, m", [(3, 2), (10, 3), (25, 7), (40, 9)])
def test_pmf_normalized(n, m):
    cfg = GroupConfig(n, m)
    for i in range(1, n + 1):
        assert abs(sum(borda_pmf(i, k, cfg) for k in range(m)) - 1) < 1e-12


@pytest.mark.parametrize("n, m", [(6, 3), (9, 4), (12, 7)])
def test_pmf_matches_enumeration(n, m):
    cfg = GroupConfig(n, m)
    for i in range(1, n + 1):
        exact = exact_pmf(n, m, i)
        for k in range(m):
            assert borda_pmf(i, k, cfg) == pytest.approx(float(exact[k]), abs=1e-13)


@pytest.mark.parametrize("n, m", [(10, 3), (25, 7), (40, 9)])
def test_pmf_reproduces_expected_mbc(n, m):
    cfg = GroupConfig(n, m)
    for i in range(1, n + 1):
        mean_score = sum(k * borda_pmf(i, k, cfg) for k in range(m))
        # m reviewers, each contributing mean_score, normalized by m(m-1)
        assert m * mean_score / (m * (m - 1)) == pytest.approx(expected_mbc(i, 0, cfg), abs=1e-12)


def test_pmf_examples():
    cfg = GroupConfig(25, 7)
    assert borda_pmf(1, 0, cfg) == 1.0
    assert all(borda_pmf(1, k, cfg) == 0.0 for k in range(1, 7))
    assert borda_pmf(25, 6, cfg) == pytest.approx(1.0, abs=1e-12)
    small = GroupConfig(3, 2)
    assert borda_pmf(2, 0, small) == pytest.approx(0.5)
    assert borda_pmf(2, 1, small) == pytest.approx(0.5)


def test_expected_mbc_examples():
    cfg = GroupConfig(25, 7)
    assert expected_mbc(1, 0, cfg) == 0
    assert expected_mbc(25, 0, cfg) == 1
    assert expected_mbc(13, 0, cfg) == 0.5
    assert expected_mbc(25, 1, cfg) == pytest.approx(6 / 7)
    for i in range(1, 26):
        assert expected_mbc(i, 7, cfg) == pytest.approx((25 - i) / 24)
    with pytest.raises(ConfigError):
        expected_mbc(3, 8, cfg)


def test_utility_params_validated():
    with pytest.raises(ConfigError):
        UtilityParams(25, p=0)
    with pytest.raises(ConfigError):
        UtilityParams(25, e=8, m=7)


@pytest.mark.parametrize("p", EXPONENTS)
def test_truthful_utility_center_and_monotone(p):
    params = UtilityParams(25, p)
    assert utility_truthful(13, params) == pytest.approx(0, abs=1e-12)
    values = [utility_truthful(i, params) for i in range(1, 26)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_truthful_utility_small_example():
    assert utility_truthful(3, UtilityParams(3, 1.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("n, p", list(itertools.product(SIZES, EXPONENTS)))
def test_evil_correction_flips_sign_once(n, p):
    params = UtilityParams(n, p)
    signs = [evil_correction(i, params) > 0 for i in range(1, n + 1)]
    assert not signs[0] and signs[-1]
    assert sum(a != b for a, b in zip(signs, signs[1:])) == 1


def test_evil_correction_zero_at_center():
    for p in EXPONENTS:
        assert evil_correction(13, UtilityParams(25, p)) == pytest.approx(0, abs=1e-12)


def test_evil_helps_borderline_without_bonus():
    params = UtilityParams(25, 1.0)
    assert utility_evil(21, params) > utility_truthful(21, params)


@pytest.mark.parametrize("n, p", list(itertools.product(SIZES, EXPONENTS)))
def test_evil_bonus_correction_negative(n, p):
    params = UtilityParams(n, p, BonusMode.DEGRADED)
    for i in range(1, n + 1):
        assert evil_bonus_correction(i, params) < 0
        assert utility_evil_with_bonus(i, params) < utility_truthful(i, params)


@pytest.mark.parametrize("n", SIZES)
def test_evil_bonus_sum_negative_despite_positive_summand(n):
    params = UtilityParams(n, 1.0, BonusMode.DEGRADED)
    for i in range(1, n):
        terms = [-(2 * n - 1 + 1 / n - 2 * j) / (n - 1) ** 2 / abs(i - j) for j in range(1, n + 1) if j != i]
        assert terms[-1] > 0
        assert sum(terms) == pytest.approx(evil_bonus_correction(i, params), abs=1e-14)
        assert sum(terms) < 0


def test_evil_with_bonus_requires_degraded_mode():
    with pytest.raises(ConfigError):
        utility_evil_with_bonus(21, UtilityParams(25))


def test_collusion_mbc_examples():
    cfg = GroupConfig(25, 7)
    ally, _ = expected_mbc_collusion(20, 3, cfg)
    assert ally - expected_mbc(20, 0, cfg) == pytest.approx(5 / (7 * 24))
    top, _ = expected_mbc_collusion(25, 3, cfg)
    assert top == pytest.approx(1.0)
    # the bystander shift vanishes when k - 1 = (m-2)/(m-1) (N-k); m=2, k=1 solves it
    small = GroupConfig(12, 2)
    _, by = expected_mbc_collusion(5, 1, small)
    assert by == pytest.approx(expected_mbc(1, 0, small))


@pytest.mark.parametrize("p", EXPONENTS)
def test_collusion_term_signs(p):
    params = UtilityParams(25, p, m=7)
    ally, colluder = utility_collusion(18, 20, params)
    assert ally.boost > 0
    assert colluder.ally_boost_loss < 0
    assert colluder.ally_boost_loss == pytest.approx(-5 / (7 * 24) / 2**p)
    assert ally.total > utility_truthful(20, params)
    assert colluder.bonus_loss == 0
    with_bonus = utility_collusion(18, 20, UtilityParams(25, p, BonusMode.IDEAL, m=7))[1]
    assert with_bonus.bonus_loss < 0


def test_collusion_top_ally_gets_no_boost():
    ally, colluder = utility_collusion(5, 25, UtilityParams(25))
    assert ally.boost == 0
    assert colluder.ally_boost_loss == 0
