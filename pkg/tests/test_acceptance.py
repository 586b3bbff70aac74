"""Exit criteria for the package, one test per criterion.

Each test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts the criterion at its fixed tolerance.
"""

import time
from collections import Counter

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from rsma_outage import analytic
from rsma_outage.analytic import (
    asymptotic_user1,
    asymptotic_user2,
    closed_form_report,
    stage_outage_quadrature,
    throughput,
)
from rsma_outage.config import build_config, with_overrides
from rsma_outage.montecarlo import (
    default_validation_grid,
    estimate_outage,
    validate_against_closed_form,
)
from rsma_outage.rsma import link_stats, thresholds
from rsma_outage.specfun import erlang_tail_sum, lower_inc_gamma_reg
from rsma_outage.sweep import SweepSpec, frange, run_sweep

MC_SEED = 20240601


def record(number, ok, detail):
    line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


# 1 ---------------------------------------------------------------------------


def test_criterion_1_closed_form_vs_monte_carlo():
    start = time.perf_counter()
    rows = validate_against_closed_form(build_config(), default_validation_grid(),
                                        n_samples=10**6, seed=MC_SEED)
    elapsed = time.perf_counter() - start
    assert len(rows) == 60 * 5
    stage = [r for r in rows if r.target.startswith("stage")]
    user = [r for r in rows if r.target.startswith("user")]
    worst = max(user, key=lambda r: abs(r.closed_form - r.mc))
    ok = all(r.passed for r in rows) and elapsed < 300
    record(1, ok,
           f"stage rows {sum(r.passed for r in stage)}/{len(stage)}, user rows "
           f"{sum(r.passed for r in user)}/{len(user)} within max(3 se, 5e-4); "
           f"worst user gap {worst.closed_form - worst.mc:+.4f} ({worst.target} at "
           f"{worst.point}); {elapsed:.0f} s")
    assert elapsed < 300
    failed = [(r.point, r.target, r.closed_form, r.mc, r.z) for r in rows if not r.passed]
    assert not failed, f"{len(failed)} rows outside tolerance, first: {failed[0]}"


# 2 ---------------------------------------------------------------------------


def _random_feasible_configs(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a21 = float(rng.uniform(0.15, 0.6))
        power = float(rng.uniform(-50.0, 40.0))
        cfg = build_config({
            "m1": int(rng.integers(1, 7)),
            "m2": int(rng.integers(1, 7)),
            "p1_dbm": power,
            "p2_dbm": power + float(rng.uniform(-5.0, 5.0)),
            "d1_m": float(rng.uniform(40.0, 120.0)),
            "d2_m": float(rng.uniform(40.0, 120.0)),
            "delta": "perfect" if rng.random() < 0.25 else float(rng.uniform(0.05, 2.0)),
            "xi_1": float(rng.uniform(0.0, 0.3)),
            "xi_2": float(rng.uniform(0.0, 0.3)),
            "alpha_21": a21,
            "alpha_22": 1.0 - a21,
            "rate_1": float(rng.uniform(0.2, 1.5)),
            "rate_2": float(rng.uniform(0.2, 1.5)),
            "rate_split": float(rng.uniform(0.05, 0.6)),
        })
        th = thresholds(cfg)
        if analytic.split_feasible_21(cfg, th) and analytic.split_feasible_22(cfg, th):
            out.append(cfg)
    return out


def test_criterion_2_quadrature_oracle():
    closed = {"21": analytic.outage_stage_21, "11": analytic.outage_stage_11,
              "22": analytic.outage_stage_22}
    worst = 0.0
    for cfg in _random_feasible_configs(20, seed=77):
        stats, th = link_stats(cfg), thresholds(cfg)
        for stage, fn in closed.items():
            cf = fn(stats, cfg, th)
            quad = stage_outage_quadrature(stage, stats, cfg, th)
            rel = abs(cf - quad) / abs(quad) if quad else abs(cf)
            worst = max(worst, rel)
    ok = worst <= 1e-6
    record(2, ok, f"60 stage evaluations, worst relative gap {worst:.2e} (limit 1e-6)")
    assert ok


# 3 ---------------------------------------------------------------------------


def test_criterion_3_fig2_operating_points():
    base = build_config({"p1_dbm": 10.0, "p2_dbm": 10.0, "delta": "perfect"})
    a = closed_form_report(with_overrides(base, xi_1=0.0, xi_2=0.1))
    b = closed_form_report(with_overrides(base, xi_1=0.1, xi_2=0.0))
    checks = {
        "P1(0,0.1)~8e-2": within(a.p_user1, 8e-2, 0.25),
        "P2(0,0.1)~1.3e-2": within(a.p_user2, 1.3e-2, 0.25),
        "P1(0.1,0)~5e-2": within(b.p_user1, 5e-2, 0.25),
        "P2(0.1,0)~1.8e-2": within(b.p_user2, 1.8e-2, 0.25),
        "U1 improves": b.p_user1 < a.p_user1,
        "U2 degrades": b.p_user2 > a.p_user2,
    }
    ok = all(checks.values())
    record(3, ok,
           f"(0,0.1): P1={a.p_user1:.4g} P2={a.p_user2:.4g}; (0.1,0): P1={b.p_user1:.4g} "
           f"P2={b.p_user2:.4g}; failing: {[k for k, v in checks.items() if not v]}")
    assert ok


# 4 ---------------------------------------------------------------------------

FIG3_DELTA = 0.5


def test_criterion_4_fig3_throughput():
    base = build_config({"p1_dbm": 5.0, "p2_dbm": 5.0, "delta": FIG3_DELTA})
    cfg0 = with_overrides(base, xi_1=0.0, xi_2=0.0)
    cfg5 = with_overrides(base, xi_1=0.05, xi_2=0.05)
    t0 = throughput(cfg0, closed_form_report(cfg0))
    t5 = throughput(cfg5, closed_form_report(cfg5))
    checks = {
        "T1(0)~0.594": within(t0[0], 0.594, 0.05),
        "T2(0)~0.425": within(t0[1], 0.425, 0.05),
        "T1(0.05)~0.579": within(t5[0], 0.579, 0.05),
        "T2(0.05)~0.322": within(t5[1], 0.322, 0.05),
    }
    # saturation at 40 dBm: to R when the outage floor allows it, else to the floor-limited rate
    notes = []
    for cfg in (cfg0, cfg5):
        hi = with_overrides(cfg, tx_power_dbm=40.0)
        s1, s2 = link_stats(hi)
        ev = (s1.est_var, s2.est_var)
        floors = (asymptotic_user1(hi, ev), asymptotic_user2(hi, ev, s2.snr))
        t = throughput(hi, closed_form_report(hi))
        for k, (rate, floor) in enumerate(zip((hi.rate_1, hi.rate_2), floors)):
            target = rate if floor <= 0.01 else (1.0 - floor) * rate
            checks[f"T{k + 1} saturates (xi={hi.sic_residual_1})"] = within(t[k], target, 0.01)
            notes.append(f"floor{k + 1}={floor:.3g}")
    ok = all(checks.values())
    record(4, ok,
           f"5 dBm delta={FIG3_DELTA}: xi=0 T=({t0[0]:.4f},{t0[1]:.4f}), xi=0.05 "
           f"T=({t5[0]:.4f},{t5[1]:.4f}); {' '.join(notes)}; failing: "
           f"{[k for k, v in checks.items() if not v]}")
    assert ok


# 5 ---------------------------------------------------------------------------


def _loglog_slope(x, y):
    return np.polyfit(np.log(x), np.log(y), 1)[0]


def test_criterion_5_asymptotic_floors():
    gaps = []
    for delta in ("perfect", 0.9):
        for xi in ((0.1, 0.1), (0.05, 0.05), (0.1, 0.05)):
            cfg = build_config({"p1_dbm": 80.0, "p2_dbm": 80.0, "delta": delta,
                                "xi_1": xi[0], "xi_2": xi[1]})
            s1, s2 = link_stats(cfg)
            ev = (s1.est_var, s2.est_var)
            cf = closed_form_report(cfg)
            gaps.append(abs(cf.p_user1 - asymptotic_user1(cfg, ev)) / asymptotic_user1(cfg, ev))
            a2 = asymptotic_user2(cfg, ev, s2.snr)
            gaps.append(abs(cf.p_user2 - a2) / a2)

    # perfect SIC: last-stage term decays as snr2 ** -m2
    cfg = build_config()
    ev = tuple(s.est_var for s in link_stats(cfg))
    rhos = np.logspace(9, 13, 9)
    formula = [analytic._asym_stage_22(cfg, ev, r) for r in rhos]
    slope_formula = _loglog_slope(rhos, formula)
    powers = np.linspace(40.0, 80.0, 9)
    closed = []
    for p in powers:
        c = with_overrides(cfg, tx_power_dbm=float(p))
        closed.append(analytic.outage_stage_22(link_stats(c), c, thresholds(c)))
    slope_closed = _loglog_slope(10 ** (powers / 10), closed)
    m2 = cfg.user2.nakagami_m
    ok = (max(gaps) <= 0.01 and abs(slope_formula + m2) <= 0.02 * m2
          and abs(slope_closed + m2) <= 0.02 * m2)
    record(5, ok, f"80 dBm worst floor gap {max(gaps):.2e} (limit 1e-2); slope "
                  f"formula {slope_formula:.4f}, closed form {slope_closed:.4f} (target -{m2} +-2%)")
    assert ok


# 6 ---------------------------------------------------------------------------


def test_criterion_6_rate_allocation():
    cfg = build_config({"delta": "perfect", "xi_1": 0.0, "xi_2": 0.0})
    phis = frange(0.05, 0.95, 0.05)
    result = run_sweep(SweepSpec("rate_split", tuple(phis), cfg, ("closed_form",)))
    _, p1 = result.series(metric="outage", target="user1")
    _, p2 = result.series(metric="outage", target="user2")
    at = {round(phi, 2): i for i, phi in enumerate(phis)}
    better = all(p[at[0.15]] < p[at[0.5]] and p[at[0.15]] < p[at[0.9]] for p in (p1, p2))
    rel = [abs(a - b) / max(a, b) for phi, a, b in zip(phis, p1, p2) if phi > 0.3]
    ok = better and max(rel) < 0.10
    record(6, ok, f"P1/P2 at phi=0.15: {p1[at[0.15]]:.4f}/{p2[at[0.15]]:.4f}, at 0.5: "
                  f"{p1[at[0.5]]:.4f}/{p2[at[0.5]]:.4f}; max rel gap for phi>0.3 {max(rel):.2e}")
    assert ok


# 7 ---------------------------------------------------------------------------


def test_criterion_7_noma_comparison():
    cfg = build_config({"rate_1": 0.75, "rate_2": 0.85, "delta": 0.2})
    est = {}
    for scheme in ("RSMA", "NOMA"):
        for p in (20.0, 40.0):
            run = estimate_outage(with_overrides(cfg, tx_power_dbm=p), scheme, MC_SEED, 10**6)
            est[scheme, p] = (run.estimates["user1"].p_hat, run.estimates["user2"].p_hat)
    noma_worse = all(est["NOMA", 40.0][k] > est["RSMA", 40.0][k] for k in range(2))
    noma_flat = all(abs(est["NOMA", 20.0][k] - est["NOMA", 40.0][k]) <= 0.1 * est["NOMA", 40.0][k]
                    for k in range(2))
    rsma_falling = all(est["RSMA", 20.0][k] - est["RSMA", 40.0][k] > 0.1 * est["RSMA", 20.0][k]
                       for k in range(2))
    ok = noma_worse and noma_flat and rsma_falling
    record(7, ok, f"40 dBm NOMA={est['NOMA', 40.0]} RSMA={est['RSMA', 40.0]}; 20 dBm "
                  f"NOMA={est['NOMA', 20.0]} RSMA={est['RSMA', 20.0]}; noma_worse={noma_worse} "
                  f"noma_floor_early={noma_flat} rsma_still_falling={rsma_falling}")
    assert ok


# 8 ---------------------------------------------------------------------------


def _random_configs(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a21 = float(rng.uniform(0.05, 0.95))
        power = float(rng.uniform(-50.0, 60.0))
        out.append({
            "m1": int(rng.integers(1, 7)),
            "m2": int(rng.integers(1, 7)),
            "p1_dbm": power,
            "p2_dbm": power + float(rng.uniform(-10.0, 10.0)),
            "d1_m": float(rng.uniform(20.0, 200.0)),
            "d2_m": float(rng.uniform(20.0, 200.0)),
            "delta": "perfect" if rng.random() < 0.2 else float(rng.uniform(0.01, 3.0)),
            "xi_1": float(rng.uniform(0.0, 0.5)),
            "xi_2": float(rng.uniform(0.0, 0.5)),
            "alpha_21": a21,
            "alpha_22": 1.0 - a21,
            "rate_1": float(rng.uniform(0.1, 2.0)),
            "rate_2": float(rng.uniform(0.1, 2.0)),
            "rate_split": float(rng.uniform(0.0, 1.0)),
        })
    return out


def test_criterion_8_structural_invariants():
    start = time.perf_counter()
    tol = 1e-12
    failures = []
    for d in _random_configs(1000, seed=8):
        base = closed_form_report(build_config(d))
        probs = (base.p_stage_21, base.p_stage_11, base.p_stage_22, base.p_user1, base.p_user2)
        if not all(0.0 <= p <= 1.0 for p in probs):
            failures.append(("range", d))
        if base.p_user2 < base.p_user1:
            failures.append(("order", d))
        if d["delta"] != "perfect":
            hi = closed_form_report(build_config({**d, "delta": d["delta"] * 2.0}))
            if (hi.p_stage_21 > base.p_stage_21 + tol or hi.p_stage_11 > base.p_stage_11 + tol
                    or hi.p_stage_22 > base.p_stage_22 + tol):
                failures.append(("delta", d))
        for key in ("xi_1", "xi_2"):
            bumped = closed_form_report(build_config({**d, key: d[key] + 0.2}))
            if bumped.p_user2 < base.p_user2 - tol:
                failures.append((key, d))
        for key in ("rate_1", "rate_2"):
            bumped = closed_form_report(build_config({**d, key: d[key] + 0.2}))
            if bumped.p_user1 < base.p_user1 - tol or bumped.p_user2 < base.p_user2 - tol:
                failures.append((key, d))

    rng = np.random.default_rng(88)
    erlang_worst = 0.0
    for m, x in zip(rng.integers(1, 60, 1000), rng.exponential(20.0, 1000)):
        erlang_worst = max(erlang_worst,
                           abs(lower_inc_gamma_reg(int(m), x) + erlang_tail_sum(int(m), x) - 1.0))
    if erlang_worst > 1e-12:
        failures.append(("erlang", erlang_worst))

    cfg = build_config({"delta": 0.2, "xi_1": 0.05, "xi_2": 0.1})
    for scheme in ("RSMA", "NOMA"):
        counts = [estimate_outage(cfg, scheme, 31, 200_000, workers=w).counts for w in (1, 2, 8)]
        if not counts[0] == counts[1] == counts[2]:
            failures.append(("determinism", scheme))

    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    record(8, ok, f"1000 configs x (range, order, delta, xi_1, xi_2, rates), Erlang identity "
                  f"worst {erlang_worst:.1e}, determinism over 1/2/8 workers; "
                  f"violations {dict(Counter(f[0] for f in failures))}; {elapsed:.1f} s")
    assert not failures, failures[:3]
    assert elapsed < 60
