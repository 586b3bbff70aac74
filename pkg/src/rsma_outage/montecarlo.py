"""Monte Carlo oracle for the RSMA decoding chain and the NOMA baseline.

Samples are generated in fixed-size chunks. Chunk ``k`` of user ``u`` draws
from its own Philox stream keyed by ``(seed, k, u)``, so results do not
depend on how chunks are spread across workers, and every configuration
evaluated with the same seed sees the same normalized fading draws
(common random numbers).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic
from .channel import PERFECT, sample_channel_powers
from .config import with_overrides
from .rsma import SystemConfig, decode_chain_arrays, link_stats, noma_outage_events, thresholds

__all__ = [
    "CHUNK_SIZE",
    "McEstimate",
    "McRun",
    "OperatingPoint",
    "ValidationRow",
    "chunk_generator",
    "estimate_outage",
    "default_validation_grid",
    "validate_against_closed_form",
]

CHUNK_SIZE = 1 << 16
DEFAULT_VALIDATION_SAMPLES = 10**6
DEFAULT_SWEEP_SAMPLES = 10**5
ABS_SLACK = 5e-4

RSMA_TARGETS = ("stage_21", "stage_11", "stage_22", "user1", "user2")
NOMA_TARGETS = ("user1", "user2")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    n_samples: int
    std_err: float

    @classmethod
    def from_count(cls, count, n):
        p = count / n
        if count == 0 or count == n:
            # rule of three instead of a vacuous zero
            se = 3.0 / n
        else:
            se = math.sqrt(p * (1.0 - p) / n)
        return cls(p, n, se)


@dataclass(frozen=True)
class McRun:
    seed: int
    n_samples: int
    scheme: str
    estimates: dict
    throughput: tuple
    throughput_std_err: tuple
    counts: dict = field(repr=False)


def chunk_generator(seed, chunk, user):
    ss = np.random.SeedSequence(seed, spawn_key=(chunk, user))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_counts(cfg, scheme, seed, chunk, size):
    stats = link_stats(cfg)
    x1 = sample_channel_powers(stats[0].est_var, cfg.user1.nakagami_m, chunk_generator(seed, chunk, 1), size)
    x2 = sample_channel_powers(stats[1].est_var, cfg.user2.nakagami_m, chunk_generator(seed, chunk, 2), size)
    if scheme == "NOMA":
        u1, u2 = noma_outage_events(x1, x2, stats, cfg)
        return {"user1": int(u1.sum()), "user2": int(u2.sum())}
    f21, f11, f22 = decode_chain_arrays(x1, x2, stats, cfg, thresholds(cfg))
    ok2 = ~f21 & ~f11
    return {
        "stage_21": int(f21.sum()),
        "stage_11": int(f11.sum()),
        "stage_22": int(f22.sum()),
        "user1": int(size - ok2.sum()),
        "stage_22_after_pass": int((ok2 & f22).sum()),
        "user2": int(size - (ok2 & ~f22).sum()),
    }


def estimate_outage(
    cfg: SystemConfig,
    scheme: str = "RSMA",
    seed: int = 0,
    n_samples: int = DEFAULT_VALIDATION_SAMPLES,
    workers: int = 1,
) -> McRun:
    """Estimate outage frequencies by sampling the channel and decoding chain.

    Stage estimates are unconditional frequencies (each stage evaluated on
    every sample), matching the per-stage closed forms. User estimates come
    from the SIC chain itself: user 1 fails unless ``s_21`` and ``s_1``
    decode, user 2 fails unless all three streams decode.
    """
    scheme = scheme.upper()
    if scheme not in ("RSMA", "NOMA"):
        raise ValueError(f"scheme must be RSMA or NOMA, got {scheme!r}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    sizes = [CHUNK_SIZE] * (n_samples // CHUNK_SIZE)
    if n_samples % CHUNK_SIZE:
        sizes.append(n_samples % CHUNK_SIZE)

    def job(k):
        return _chunk_counts(cfg, scheme, seed, k, sizes[k])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(k) for k in range(len(sizes))]
    counts = {key: sum(part[key] for part in parts) for key in parts[0]}

    targets = NOMA_TARGETS if scheme == "NOMA" else RSMA_TARGETS
    estimates = {t: McEstimate.from_count(counts[t], n_samples) for t in targets}
    u1, u2 = estimates["user1"], estimates["user2"]
    return McRun(
        seed=seed,
        n_samples=n_samples,
        scheme=scheme,
        estimates=estimates,
        throughput=((1.0 - u1.p_hat) * cfg.rate_1, (1.0 - u2.p_hat) * cfg.rate_2),
        throughput_std_err=(u1.std_err * cfg.rate_1, u2.std_err * cfg.rate_2),
        counts=counts,
    )


@dataclass(frozen=True)
class OperatingPoint:
    tx_power_dbm: float
    delta: object = PERFECT
    xi_1: float = 0.0
    xi_2: float = 0.0

    def apply(self, cfg):
        return with_overrides(
            cfg, tx_power_dbm=self.tx_power_dbm, delta=self.delta, xi_1=self.xi_1, xi_2=self.xi_2
        )


@dataclass(frozen=True)
class ValidationRow:
    point: OperatingPoint
    target: str
    closed_form: float
    mc: float
    std_err: float
    z: float
    passed: bool
    infeasible: bool


def default_validation_grid():
    """Powers 0..40 dBm x delta {0.2, 0.9, perfect} x four SIC-residual pairs."""
    return [
        OperatingPoint(p, d, x1, x2)
        for p in (0.0, 10.0, 20.0, 30.0, 40.0)
        for d in (0.2, 0.9, PERFECT)
        for x1, x2 in ((0.0, 0.0), (0.0, 0.1), (0.1, 0.0), (0.05, 0.05))
    ]


def validate_against_closed_form(
    cfg: SystemConfig,
    grid=None,
    n_samples: int = DEFAULT_VALIDATION_SAMPLES,
    seed: int = 0,
    workers: int = 1,
    slack: float = ABS_SLACK,
    targets: Optional[tuple] = None,
):
    """Compare closed-form and simulated outage at each grid point.

    A row passes when ``|closed - mc| <= max(3 * std_err, slack)``. Failures
    are reported in the returned rows, never raised.
    """
    grid = default_validation_grid() if grid is None else grid
    targets = RSMA_TARGETS if targets is None else targets
    rows = []
    for point in grid:
        point_cfg = point.apply(cfg)
        report = analytic.closed_form_report(point_cfg)
        run = estimate_outage(point_cfg, "RSMA", seed, n_samples, workers)
        closed = {
            "stage_21": report.p_stage_21,
            "stage_11": report.p_stage_11,
            "stage_22": report.p_stage_22,
            "user1": report.p_user1,
            "user2": report.p_user2,
        }
        for target in targets:
            est = run.estimates[target]
            diff = closed[target] - est.p_hat
            rows.append(
                ValidationRow(
                    point=point,
                    target=target,
                    closed_form=closed[target],
                    mc=est.p_hat,
                    std_err=est.std_err,
                    z=diff / est.std_err,
                    passed=abs(diff) <= max(3.0 * est.std_err, slack),
                    infeasible=report.infeasible,
                )
            )
    return rows
