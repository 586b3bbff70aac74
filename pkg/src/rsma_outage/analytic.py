"""Closed-form outage, throughput and high-SNR floors for uplink RSMA.

Every stage outage has the same structure: a Gamma-distributed desired
power ``X`` (integer shape ``M``) falls below an affine function
``T * (A + B * Y)`` of an independent Gamma interferer ``Y`` (shape ``m``,
rate ``c``). Expanding the Erlang CDF and integrating over ``Y`` gives

    P = 1 - sum_{p<M} sum_{q<=p} C(p,q) (TB)^q (TA)^(p-q) e^(-TA)
              c^m Gamma(m+q) / (Gamma(m) p! (c+TB)^(m+q))

which :func:`erlang_mixture_outage` evaluates. Each summand is the
product of a Poisson(TA) mass and a negative-binomial mass, so the
complement can also be summed as a convergent tail when the outage is
small and ``1 - S`` would cancel.
"""

import math
from dataclasses import dataclass, replace

from .channel import PERFECT
from .rsma import SystemConfig, Thresholds, link_stats, thresholds
from .specfun import binom, clamp_probability, lower_inc_gamma_reg, rising_factorial

__all__ = [
    "CoefficientSet",
    "AsymCoefficientSet",
    "OutageReport",
    "erlang_mixture_outage",
    "coefficients",
    "split_feasible_21",
    "split_feasible_22",
    "outage_stage_21",
    "outage_stage_11",
    "outage_stage_22",
    "compose_user1",
    "compose_user2",
    "outage_user1",
    "outage_user2",
    "closed_form_report",
    "throughput",
    "asymptotic_coefficients",
    "asymptotic_user1",
    "asymptotic_user2",
    "asymptotic_report",
    "stage_outage_quadrature",
    "perfect_csir_sic",
    "perfect_csir",
]

_TAIL_SWITCH = 1e-3
_TAIL_MAX_TERMS = 5000


@dataclass(frozen=True)
class CoefficientSet:
    T_21: float
    T_22: float
    A_21: float
    A_1: float
    A_22: float
    B_21: float
    B_11: float
    C_1: float
    D_1: float
    D_2: float
    G_1: float


@dataclass(frozen=True)
class AsymCoefficientSet:
    TT_21: float
    GG_1: float
    TT_22: float
    TF_22: float


@dataclass(frozen=True)
class OutageReport:
    p_stage_21: float
    p_stage_11: float
    p_stage_22: float
    p_user1: float
    p_user2: float
    method_tag: str
    infeasible: bool = False


def _log_term(p, q, ta, tb, c, m):
    """Log of one ``(p, q)`` summand of the Erlang-mixture double sum."""
    k = p - q
    if (k and ta == 0.0) or (q and tb == 0.0):
        return -math.inf
    out = math.log(binom(p, q)) - ta + m * math.log(c) - math.lgamma(p + 1)
    out += math.log(rising_factorial(m, q)) - (m + q) * math.log(c + tb)
    if k:
        out += k * math.log(ta)
    if q:
        out += q * math.log(tb)
    return out


def _block(p, ta, tb, c, m):
    return math.fsum(math.exp(_log_term(p, q, ta, tb, c, m)) for q in range(p + 1))


def erlang_mixture_outage(M, m, c, t, a, b):
    """``Pr(X < t * (a + b * Y))`` for ``X ~ Erlang(M, 1)`` and ``Y ~ Gamma(m, rate=c)``.

    ``t`` already carries the desired user's rate ``M / est_var``. The finite
    double sum is used directly unless the outage is below 1e-3, where the
    (exact) complementary tail ``sum_{p>=M}`` is accumulated instead.
    """
    if t == 0.0:
        return 0.0
    if math.isinf(t):
        return 1.0
    ta, tb = t * a, t * b
    if math.isinf(c):
        # degenerate interferer Y == 0
        return lower_inc_gamma_reg(M, ta)
    survive = math.fsum(_block(p, ta, tb, c, m) for p in range(M))
    outage = 1.0 - survive
    if outage >= _TAIL_SWITCH:
        return clamp_probability(outage)
    mean = ta + m * tb / c
    terms = []
    for p in range(M, M + _TAIL_MAX_TERMS):
        term = _block(p, ta, tb, c, m)
        terms.append(term)
        if p > mean and term <= 1e-17 * math.fsum(terms):
            break
    return clamp_probability(math.fsum(terms))


def _gap_21(cfg, th):
    return cfg.alpha_21 - th.th_21 * cfg.alpha_22


def _gap_22(cfg, th):
    return cfg.alpha_22 - th.th_22 * cfg.alpha_21 * cfg.sic_residual_2


def split_feasible_21(cfg: SystemConfig, th: Thresholds) -> bool:
    """False when stream ``s_21`` can never meet its threshold.

    The first-stage SINR is bounded above by ``alpha_21 / alpha_22``, so a
    nonpositive gap makes outage certain.
    """
    return th.th_21 == 0.0 or _gap_21(cfg, th) > 0.0


def split_feasible_22(cfg: SystemConfig, th: Thresholds) -> bool:
    return th.th_22 == 0.0 or _gap_22(cfg, th) > 0.0


def _rate(m, est_var):
    return math.inf if est_var == 0.0 else m / est_var


def _scaled_threshold(m, th, est_var, snr, gap):
    if th == 0.0:
        return 0.0
    if gap <= 0.0 or est_var == 0.0:
        return math.inf
    return m * th / (est_var * snr * gap)


def coefficients(stats, cfg: SystemConfig, th: Thresholds) -> CoefficientSet:
    s1, s2 = stats
    m1, m2 = cfg.user1.nakagami_m, cfg.user2.nakagami_m
    rho1, rho2 = s1.snr, s2.snr
    weight = cfg.alpha_22 + cfg.alpha_21 * cfg.sic_residual_2
    return CoefficientSet(
        T_21=_scaled_threshold(m2, th.th_21, s2.est_var, rho2, _gap_21(cfg, th)),
        T_22=_scaled_threshold(m2, th.th_22, s2.est_var, rho2, _gap_22(cfg, th)),
        A_21=rho1 * s1.err_var + rho2 * s2.err_var + 1.0,
        A_1=rho1 * s1.err_var + rho2 * s2.err_var * weight + 1.0,
        A_22=rho1 * s1.err_var * cfg.sic_residual_1 + rho2 * s2.err_var * weight + 1.0,
        B_21=rho1,
        B_11=rho1 * cfg.sic_residual_1,
        C_1=_rate(m1, s1.est_var),
        D_1=rho2 * weight,
        D_2=_rate(m2, s2.est_var),
        G_1=_scaled_threshold(m1, th.th_1, s1.est_var, rho1, 1.0),
    )


def outage_stage_21(stats, cfg: SystemConfig, th: Thresholds) -> float:
    """Probability that stream ``s_21`` is not decodable (first SIC stage)."""
    k = coefficients(stats, cfg, th)
    return erlang_mixture_outage(
        cfg.user2.nakagami_m, cfg.user1.nakagami_m, k.C_1, k.T_21, k.A_21, k.B_21
    )


def outage_stage_11(stats, cfg: SystemConfig, th: Thresholds) -> float:
    """Probability that user 1's stream fails, with ``s_21`` cancelled."""
    k = coefficients(stats, cfg, th)
    return erlang_mixture_outage(
        cfg.user1.nakagami_m, cfg.user2.nakagami_m, k.D_2, k.G_1, k.A_1, k.D_1
    )


def outage_stage_22(stats, cfg: SystemConfig, th: Thresholds) -> float:
    k = coefficients(stats, cfg, th)
    return erlang_mixture_outage(
        cfg.user2.nakagami_m, cfg.user1.nakagami_m, k.C_1, k.T_22, k.A_22, k.B_11
    )


def compose_user1(p21, p11):
    return clamp_probability(p21 + (1.0 - p21) * p11)


def compose_user2(p21, p11, p22):
    p1 = compose_user1(p21, p11)
    return clamp_probability(p1 + (1.0 - p1) * p22)


def outage_user1(stats, cfg: SystemConfig, th: Thresholds) -> float:
    return compose_user1(outage_stage_21(stats, cfg, th), outage_stage_11(stats, cfg, th))


def outage_user2(stats, cfg: SystemConfig, th: Thresholds) -> float:
    return compose_user2(
        outage_stage_21(stats, cfg, th),
        outage_stage_11(stats, cfg, th),
        outage_stage_22(stats, cfg, th),
    )


def closed_form_report(cfg: SystemConfig) -> OutageReport:
    stats = link_stats(cfg)
    th = thresholds(cfg)
    p21 = outage_stage_21(stats, cfg, th)
    p11 = outage_stage_11(stats, cfg, th)
    p22 = outage_stage_22(stats, cfg, th)
    return OutageReport(
        p_stage_21=p21,
        p_stage_11=p11,
        p_stage_22=p22,
        p_user1=compose_user1(p21, p11),
        p_user2=compose_user2(p21, p11, p22),
        method_tag="closed_form",
        infeasible=not (split_feasible_21(cfg, th) and split_feasible_22(cfg, th)),
    )


def throughput(cfg: SystemConfig, report: OutageReport):
    """Throughputs ``(t1, t2)`` in bit/s/Hz from a report's user outages."""
    return (1.0 - report.p_user1) * cfg.rate_1, (1.0 - report.p_user2) * cfg.rate_2


# -- high-SNR floors -------------------------------------------------------


def asymptotic_coefficients(cfg: SystemConfig, est_vars, snr2=None) -> AsymCoefficientSet:
    """Limits of the scaled thresholds as both SNRs grow at the same rate.

    ``TF_22`` keeps its ``1 / snr2`` dependence and is NaN when ``snr2`` is
    not supplied.
    """
    th = thresholds(cfg)
    m1, m2 = cfg.user1.nakagami_m, cfg.user2.nakagami_m
    ev1, ev2 = est_vars
    weight = cfg.alpha_22 + cfg.alpha_21 * cfg.sic_residual_2
    tt21 = _scaled_threshold(m2, th.th_21, ev2, 1.0, _gap_21(cfg, th))
    tt22 = _scaled_threshold(m2, th.th_22, ev2, 1.0, _gap_22(cfg, th))
    gg1 = _scaled_threshold(m1, th.th_1, ev1, 1.0, 1.0) * weight
    if snr2 is None:
        tf22 = math.nan
    else:
        tf22 = _scaled_threshold(m2, th.th_22, ev2, snr2, _gap_22(cfg, th))
    return AsymCoefficientSet(
        TT_21=tt21, GG_1=gg1, TT_22=tt22 * cfg.sic_residual_1, TF_22=tf22
    )


def _floor_stage(M, m, c, scaled):
    # single-sum limit: A terms vanish, leaving Pr(X < scaled * Y)
    return erlang_mixture_outage(M, m, c, 1.0, 0.0, scaled)


def _asym_stages_1(cfg, est_vars):
    k = asymptotic_coefficients(cfg, est_vars)
    m1, m2 = cfg.user1.nakagami_m, cfg.user2.nakagami_m
    ev1, ev2 = est_vars
    if math.isinf(k.TT_21):
        p21 = 1.0
    else:
        p21 = _floor_stage(m2, m1, _rate(m1, ev1), k.TT_21)
    if math.isinf(k.GG_1):
        p11 = 1.0
    else:
        p11 = _floor_stage(m1, m2, _rate(m2, ev2), k.GG_1)
    return p21, p11


def asymptotic_user1(cfg: SystemConfig, est_vars) -> float:
    """SNR-independent outage floor of user 1."""
    return compose_user1(*_asym_stages_1(cfg, est_vars))


def _asym_stage_22(cfg, est_vars, snr2):
    m1, m2 = cfg.user1.nakagami_m, cfg.user2.nakagami_m
    k = asymptotic_coefficients(cfg, est_vars, snr2)
    if cfg.sic_residual_1 > 0.0:
        if math.isinf(k.TT_22):
            return 1.0
        return _floor_stage(m2, m1, _rate(m1, est_vars[0]), k.TT_22)
    # no residual of user 1: small-argument limit of gamma(m2, z), decays with snr2
    if snr2 is None:
        raise ValueError("snr2 is required when sic_residual_1 == 0")
    if math.isinf(k.TF_22):
        return 1.0
    return min(1.0, k.TF_22 ** m2 / (math.factorial(m2 - 1) * m2))


def asymptotic_user2(cfg: SystemConfig, est_vars, snr2=None) -> float:
    """High-SNR outage of user 2.

    With ``sic_residual_1 > 0`` this is a true floor. Without it the last
    stage's outage still falls as ``snr2 ** -m2`` and ``snr2`` must be given.
    """
    p21, p11 = _asym_stages_1(cfg, est_vars)
    return compose_user2(p21, p11, _asym_stage_22(cfg, est_vars, snr2))


def asymptotic_report(cfg: SystemConfig) -> OutageReport:
    s1, s2 = link_stats(cfg)
    est_vars = (s1.est_var, s2.est_var)
    th = thresholds(cfg)
    p21, p11 = _asym_stages_1(cfg, est_vars)
    p22 = _asym_stage_22(cfg, est_vars, s2.snr)
    return OutageReport(
        p_stage_21=p21,
        p_stage_11=p11,
        p_stage_22=p22,
        p_user1=compose_user1(p21, p11),
        p_user2=compose_user2(p21, p11, p22),
        method_tag="asymptotic",
        infeasible=not (split_feasible_21(cfg, th) and split_feasible_22(cfg, th)),
    )


# -- independent numerical route ---------------------------------------------


def stage_outage_quadrature(stage, stats, cfg: SystemConfig, th: Thresholds) -> float:
    """Outage of one stage by adaptive quadrature of ``E_Y[F_X(T (A + B Y))]``.

    Uses scipy's ``gammainc`` and ``quad`` only, so it shares no code with
    the closed-form path. ``stage`` is one of ``"21"``, ``"11"``, ``"22"``.
    """
    from scipy import integrate, special, stats as sps

    s1, s2 = stats
    m1, m2 = cfg.user1.nakagami_m, cfg.user2.nakagami_m
    rho1, rho2 = s1.snr, s2.snr
    e1, e2 = s1.err_var, s2.err_var
    weight = cfg.alpha_22 + cfg.alpha_21 * cfg.sic_residual_2
    if stage == "21":
        th_, gap = th.th_21, cfg.alpha_21 - th.th_21 * cfg.alpha_22
        M, ev_x, snr_x = m2, s2.est_var, rho2
        m, ev_y = m1, s1.est_var
        a, b = rho1 * e1 + rho2 * e2 + 1.0, rho1
    elif stage == "11":
        th_, gap = th.th_1, 1.0
        M, ev_x, snr_x = m1, s1.est_var, rho1
        m, ev_y = m2, s2.est_var
        a, b = rho1 * e1 + rho2 * e2 * weight + 1.0, rho2 * weight
    elif stage == "22":
        th_, gap = th.th_22, cfg.alpha_22 - th.th_22 * cfg.alpha_21 * cfg.sic_residual_2
        M, ev_x, snr_x = m2, s2.est_var, rho2
        m, ev_y = m1, s1.est_var
        a = rho1 * e1 * cfg.sic_residual_1 + rho2 * e2 * weight + 1.0
        b = rho1 * cfg.sic_residual_1
    else:
        raise ValueError(f"unknown stage {stage!r}")
    if th_ == 0.0:
        return 0.0
    if gap <= 0.0:
        return 1.0
    # X < th * (a + b * Y) / (snr_x * gap); X normalized to unit rate, Y = (ev_y / m) * u
    scale = M * th_ / (ev_x * snr_x * gap)

    def integrand(u):
        return sps.gamma.pdf(u, m) * special.gammainc(M, scale * (a + b * ev_y / m * u))

    pieces = [0.0, float(m), 4.0 * m + 20.0, math.inf]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=500)
        total += val
    return total


# -- named presets ----------------------------------------------------------


def perfect_csir(cfg: SystemConfig) -> SystemConfig:
    """Same configuration with error-free channel estimates."""
    return cfg.replace(env=replace(cfg.env, csir_quality=PERFECT))


def perfect_csir_sic(cfg: SystemConfig) -> SystemConfig:
    """Perfect channel estimates and perfect interference cancellation."""
    return perfect_csir(cfg).replace(sic_residual_1=0.0, sic_residual_2=0.0)
