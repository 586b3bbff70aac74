import math

import numpy as np
import pytest
from scipy import stats as sps

from rsma_outage.channel import (
    PERFECT,
    LinkStatistics,
    PropagationEnv,
    UserRadio,
    dbm_to_watts,
    derive_link_stats,
    sample_channel_power,
    sample_channel_powers,
)
from rsma_outage.specfun import lower_inc_gamma_reg

NOISE = dbm_to_watts(-100.0)

# 70 ** -3.8 evaluated with 30-digit arithmetic
OMEGA_70M = 9.74153618254070017e-8


def test_dbm_conversion():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-100.0) == pytest.approx(1e-13)


def test_path_loss_at_70m():
    stats = derive_link_stats(UserRadio.from_dbm(10.0, 70.0, 3), PropagationEnv(NOISE))
    assert stats.total_var == pytest.approx(OMEGA_70M, rel=1e-12)
    assert stats.snr == pytest.approx(1e11)


def test_perfect_csir_has_zero_error():
    stats = derive_link_stats(UserRadio.from_dbm(0.0, 75.0, 4), PropagationEnv(NOISE))
    assert stats.err_var == 0.0
    assert stats.est_var == stats.total_var


def test_high_quality_limit():
    user = UserRadio.from_dbm(60.0, 10.0, 2)
    stats = derive_link_stats(user, PropagationEnv(NOISE, csir_quality=0.5))
    assert 0.5 * stats.snr * stats.total_var > 1e10
    assert stats.err_var == pytest.approx(1.0 / (0.5 * stats.snr), rel=1e-9)
    assert stats.est_var == pytest.approx(stats.total_var, rel=1e-9)


def test_error_variance_monotone_in_delta_and_snr():
    user = UserRadio.from_dbm(0.0, 75.0, 4)
    errs = [derive_link_stats(user, PropagationEnv(NOISE, csir_quality=d)).err_var
            for d in (0.0, 0.1, 0.5, 0.9, 5.0)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    env = PropagationEnv(NOISE, csir_quality=0.3)
    by_snr = [derive_link_stats(UserRadio.from_dbm(p, 75.0, 4), env) for p in (-20, 0, 20)]
    assert all(b.err_var < a.err_var for a, b in zip(by_snr, by_snr[1:]))
    assert all(b.est_var > a.est_var for a, b in zip(by_snr, by_snr[1:]))
    for s in by_snr:
        assert 0.0 <= s.err_var <= s.total_var


@pytest.mark.parametrize("kwargs", [
    dict(transmit_power=0.0, distance_m=1.0, nakagami_m=1),
    dict(transmit_power=1.0, distance_m=-1.0, nakagami_m=1),
    dict(transmit_power=1.0, distance_m=1.0, nakagami_m=1.5),
])
def test_user_radio_validation(kwargs):
    with pytest.raises(ValueError):
        UserRadio(**kwargs)


def test_env_validation():
    with pytest.raises(ValueError):
        PropagationEnv(0.0)
    with pytest.raises(ValueError):
        PropagationEnv(NOISE, csir_quality=-0.1)
    assert repr(PERFECT) == "PERFECT"


def test_sample_moments():
    rng = np.random.default_rng(7)
    n = 10**6
    x = sample_channel_powers(1.0, 3, rng, n)
    assert abs(x.mean() - 1.0) <= 3.0 / math.sqrt(3 * n)
    # Gamma(k=3, scale=1/3): fourth central moment 3 k (k + 2) scale^4
    mu4 = 3 * 3 * 5 / 3**4
    se = math.sqrt((mu4 - (1 / 3) ** 2) / n)
    assert abs(x.var() - 1.0 / 3.0) <= 3.0 * se


def test_scalar_sample_and_zero_variance():
    rng = np.random.default_rng(1)
    stats = LinkStatistics(snr=1.0, total_var=2.0, err_var=0.0, est_var=2.0)
    assert sample_channel_power(stats, 4, rng) > 0.0
    zero = LinkStatistics(snr=1.0, total_var=2.0, err_var=2.0, est_var=0.0)
    assert sample_channel_power(zero, 4, rng) == 0.0


def test_empirical_cdf_matches_gamma_cdf():
    rng = np.random.default_rng(11)
    x = sample_channel_powers(1.0, 4, rng, 10**5)
    ecdf = np.mean(x <= 1.0)
    expected = lower_inc_gamma_reg(4, 4.0)
    assert abs(ecdf - expected) <= 3.0 * math.sqrt(expected * (1 - expected) / x.size)
    ks = sps.kstest(x, lambda v: sps.gamma.cdf(v, 4, scale=0.25))
    assert ks.pvalue > 0.01


def test_sum_of_exponentials_matches_general_gamma_sampler():
    rng = np.random.default_rng(5)
    n = 10**5
    ours = sample_channel_powers(2.5, 3, rng, n)
    general = np.random.default_rng(6).gamma(3, 2.5 / 3, n)
    result = sps.ks_2samp(ours, general)
    critical = 1.628 * math.sqrt(2.0 / n)  # alpha = 0.01
    assert result.statistic < critical
