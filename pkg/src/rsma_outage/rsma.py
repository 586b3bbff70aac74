"""Two-user uplink RSMA system model.

User 2 splits its message into two streams decoded around user 1's stream,
giving the SIC order ``s_21 -> s_1 -> s_22``. The SINR helpers accept
scalars or numpy arrays for the channel powers ``x1 = |h1_hat|^2`` and
``x2 = |h2_hat|^2``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .channel import LinkStatistics, PropagationEnv, UserRadio, derive_link_stats

__all__ = [
    "ConfigError",
    "SystemConfig",
    "Thresholds",
    "SampleOutcome",
    "link_stats",
    "thresholds",
    "sinr_stage_21",
    "sinr_stage_1",
    "sinr_stage_22",
    "decode_chain",
    "decode_chain_arrays",
    "noma_sinrs",
    "noma_outage_events",
]

ALPHA_SUM_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid configuration field.

    Carries the offending ``field``, the violated ``constraint`` and the
    ``value`` so callers can report all three.
    """

    def __init__(self, field, constraint, value):
        self.field = field
        self.constraint = constraint
        self.value = value
        super().__init__(f"{field}: {constraint} (got {value!r})")


@dataclass(frozen=True)
class SystemConfig:
    user1: UserRadio
    user2: UserRadio
    env: PropagationEnv
    alpha_21: float
    alpha_22: float
    sic_residual_1: float = 0.0
    sic_residual_2: float = 0.0
    rate_1: float = 0.7
    rate_2: float = 0.95
    rate_split: float = 0.15

    def __post_init__(self):
        for name in ("alpha_21", "alpha_22"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, "must lie in [0, 1]", value)
        total = self.alpha_21 + self.alpha_22
        if abs(total - 1.0) > ALPHA_SUM_TOL:
            raise ConfigError(
                "alpha_21+alpha_22", "power fractions must sum to 1", total
            )
        for name in ("sic_residual_1", "sic_residual_2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ConfigError(name, "must lie in [0, 1)", value)
        for name in ("rate_1", "rate_2"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(name, "must be > 0", value)
        if not 0.0 <= self.rate_split <= 1.0:
            raise ConfigError("rate_split", "must lie in [0, 1]", self.rate_split)

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Thresholds:
    th_1: float
    th_21: float
    th_22: float


@dataclass(frozen=True)
class SampleOutcome:
    sinr_21: float
    sinr_1: float
    sinr_22: float
    stage1_ok: bool
    stage2_ok: bool
    stage3_ok: bool

    @property
    def user1_outage(self):
        return not self.stage2_ok

    @property
    def user2_outage(self):
        return not self.stage3_ok


def link_stats(cfg: SystemConfig):
    """``(stats1, stats2)`` for the two users of ``cfg``."""
    return derive_link_stats(cfg.user1, cfg.env), derive_link_stats(cfg.user2, cfg.env)


def thresholds(cfg: SystemConfig) -> Thresholds:
    r21 = cfg.rate_split * cfg.rate_2
    r22 = (1.0 - cfg.rate_split) * cfg.rate_2
    return Thresholds(
        th_1=2.0 ** cfg.rate_1 - 1.0,
        th_21=2.0 ** r21 - 1.0,
        th_22=2.0 ** r22 - 1.0,
    )


def _sic_weight(cfg):
    # alpha_22 + alpha_21 * Xi_2: stream s_22 plus the residual of s_21
    return cfg.alpha_22 + cfg.alpha_21 * cfg.sic_residual_2


def sinr_stage_21(x1, x2, stats1: LinkStatistics, stats2: LinkStatistics, cfg: SystemConfig):
    rho1, rho2 = stats1.snr, stats2.snr
    num = x2 * rho2 * cfg.alpha_21
    den = (
        x2 * cfg.alpha_22 * rho2
        + x1 * rho1
        + rho1 * stats1.err_var
        + rho2 * stats2.err_var
        + 1.0
    )
    return num / den


def sinr_stage_1(x1, x2, stats1: LinkStatistics, stats2: LinkStatistics, cfg: SystemConfig):
    rho1, rho2 = stats1.snr, stats2.snr
    den = (x2 + stats2.err_var) * rho2 * _sic_weight(cfg) + rho1 * stats1.err_var + 1.0
    return x1 * rho1 / den


def sinr_stage_22(x1, x2, stats1: LinkStatistics, stats2: LinkStatistics, cfg: SystemConfig):
    rho1, rho2 = stats1.snr, stats2.snr
    d1 = rho2 * _sic_weight(cfg)
    den = (
        x2 * rho2 * cfg.alpha_21 * cfg.sic_residual_2
        + stats2.err_var * d1
        + (x1 + stats1.err_var) * rho1 * cfg.sic_residual_1
        + 1.0
    )
    return x2 * rho2 * cfg.alpha_22 / den


def decode_chain(x1, x2, stats, cfg: SystemConfig, th: Thresholds) -> SampleOutcome:
    """Run the SIC chain on one channel realization.

    A stage succeeds when its SINR reaches the threshold (ties succeed);
    decoding stops at the first failure.
    """
    stats1, stats2 = stats
    g21 = float(sinr_stage_21(x1, x2, stats1, stats2, cfg))
    g1 = float(sinr_stage_1(x1, x2, stats1, stats2, cfg))
    g22 = float(sinr_stage_22(x1, x2, stats1, stats2, cfg))
    ok1 = g21 >= th.th_21
    ok2 = ok1 and g1 >= th.th_1
    ok3 = ok2 and g22 >= th.th_22
    return SampleOutcome(g21, g1, g22, ok1, ok2, ok3)


def decode_chain_arrays(x1, x2, stats, cfg: SystemConfig, th: Thresholds):
    """Vectorized :func:`decode_chain`.

    Returns the unconditional per-stage failure masks ``(fail_21, fail_1,
    fail_22)``; the chain outcome is ``ok2 = ~fail_21 & ~fail_1`` and
    ``ok3 = ok2 & ~fail_22``.
    """
    stats1, stats2 = stats
    fail_21 = sinr_stage_21(x1, x2, stats1, stats2, cfg) < th.th_21
    fail_1 = sinr_stage_1(x1, x2, stats1, stats2, cfg) < th.th_1
    fail_22 = sinr_stage_22(x1, x2, stats1, stats2, cfg) < th.th_22
    return fail_21, fail_1, fail_22


def noma_sinrs(x1, x2, stats1: LinkStatistics, stats2: LinkStatistics, cfg: SystemConfig):
    """NOMA baseline SINRs ``(sinr_u2, sinr_u1)`` with user 2 decoded first.

    No message splitting; ``sic_residual_2`` is the fraction of user 2's
    power left over after cancelling it.
    """
    rho1, rho2 = stats1.snr, stats2.snr
    sinr_u2 = x2 * rho2 / (x1 * rho1 + rho1 * stats1.err_var + rho2 * stats2.err_var + 1.0)
    sinr_u1 = x1 * rho1 / (
        (x2 + stats2.err_var) * rho2 * cfg.sic_residual_2 + rho1 * stats1.err_var + 1.0
    )
    return sinr_u2, sinr_u1


def noma_outage_events(x1, x2, stats, cfg: SystemConfig):
    """Outage masks ``(user1_out, user2_out)`` for the NOMA baseline."""
    stats1, stats2 = stats
    sinr_u2, sinr_u1 = noma_sinrs(x1, x2, stats1, stats2, cfg)
    u2_out = np.asarray(sinr_u2 < 2.0 ** cfg.rate_2 - 1.0)
    u1_out = u2_out | np.asarray(sinr_u1 < 2.0 ** cfg.rate_1 - 1.0)
    return u1_out, u2_out
