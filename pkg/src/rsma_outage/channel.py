"""Link statistics and channel power sampling.

Channel power gains are only ever represented through their variances and
the sampled estimated power ``|h_hat|^2``; the estimation error enters the
SINRs as a deterministic variance term.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .specfun import check_shape

__all__ = [
    "PERFECT",
    "UserRadio",
    "PropagationEnv",
    "LinkStatistics",
    "dbm_to_watts",
    "watts_to_dbm",
    "derive_link_stats",
    "sample_channel_power",
    "sample_channel_powers",
]


class _PerfectCSIR:
    """Sentinel for perfect channel estimation (zero error variance)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "PERFECT"

    def __reduce__(self):
        return (_PerfectCSIR, ())


PERFECT = _PerfectCSIR()


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class UserRadio:
    transmit_power: float  # W
    distance_m: float
    nakagami_m: int

    def __post_init__(self):
        if not self.transmit_power > 0:
            raise ValueError(f"transmit_power must be > 0, got {self.transmit_power!r}")
        if not self.distance_m > 0:
            raise ValueError(f"distance_m must be > 0, got {self.distance_m!r}")
        object.__setattr__(self, "nakagami_m", check_shape(self.nakagami_m, "nakagami_m"))

    @classmethod
    def from_dbm(cls, power_dbm, distance_m, nakagami_m):
        return cls(dbm_to_watts(power_dbm), distance_m, nakagami_m)

    @property
    def power_dbm(self):
        return watts_to_dbm(self.transmit_power)


@dataclass(frozen=True)
class PropagationEnv:
    noise_power: float  # W
    pathloss_ref_m: float = 1.0
    pathloss_exponent: float = 3.8
    csir_quality: object = PERFECT

    def __post_init__(self):
        if not self.noise_power > 0:
            raise ValueError(f"noise_power must be > 0, got {self.noise_power!r}")
        if not self.pathloss_ref_m > 0:
            raise ValueError(f"pathloss_ref_m must be > 0, got {self.pathloss_ref_m!r}")
        if not self.pathloss_exponent > 0:
            raise ValueError(
                f"pathloss_exponent must be > 0, got {self.pathloss_exponent!r}"
            )
        if self.csir_quality is not PERFECT and not self.csir_quality >= 0:
            raise ValueError(
                f"csir_quality must be >= 0 or PERFECT, got {self.csir_quality!r}"
            )

    @property
    def perfect_csir(self):
        return self.csir_quality is PERFECT


@dataclass(frozen=True)
class LinkStatistics:
    snr: float
    total_var: float
    err_var: float
    est_var: float


def derive_link_stats(user: UserRadio, env: PropagationEnv) -> LinkStatistics:
    """Per-link SNR, path-loss variance and channel-estimation error split.

    The error variance follows ``total / (1 + delta * snr * total)`` and is
    exactly zero under :data:`PERFECT` CSIR.
    """
    snr = user.transmit_power / env.noise_power
    total = env.pathloss_ref_m / user.distance_m ** env.pathloss_exponent
    if env.perfect_csir:
        err = 0.0
    else:
        err = total / (1.0 + env.csir_quality * snr * total)
    return LinkStatistics(snr=snr, total_var=total, err_var=err, est_var=total - err)


def sample_channel_powers(est_var, m, rng: np.random.Generator, size: Optional[int] = None):
    """Draw ``|h_hat|^2 ~ Gamma(shape=m, mean=est_var)`` as a sum of exponentials."""
    m = check_shape(m)
    if est_var == 0:
        return 0.0 if size is None else np.zeros(size)
    if size is None:
        return float(rng.standard_exponential(m).sum()) * est_var / m
    return rng.standard_exponential((size, m)).sum(axis=1) * (est_var / m)


def sample_channel_power(stats: LinkStatistics, m, rng: np.random.Generator) -> float:
    """One draw of the estimated channel power for a link."""
    return sample_channel_powers(stats.est_var, m, rng)
