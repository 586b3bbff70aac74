"""Parameter sweeps, figure presets and CSV/JSON emission."""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, montecarlo
from .config import build_config, with_overrides
from .rsma import SystemConfig

__all__ = [
    "AXES",
    "METHODS",
    "SCHEMES",
    "COLUMNS",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "apply_axis",
    "run_sweep",
    "preset",
    "PRESETS",
    "emit",
    "load_result",
    "frange",
]

AXES = ("tx_power_dbm", "delta", "xi_pair", "rate_split", "distance")
METHODS = ("closed_form", "asymptotic", "monte_carlo")
SCHEMES = ("RSMA", "NOMA")
COLUMNS = (
    "axis_name",
    "axis_value",
    "scheme",
    "method",
    "metric",
    "target",
    "value",
    "std_err",
    "infeasible",
)


def frange(start, stop, step):
    """Inclusive arithmetic range, rounded to kill float drift."""
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base_config: SystemConfig
    methods: tuple = ("closed_form", "monte_carlo")
    schemes: tuple = ("RSMA",)
    mc_seed: int = 0
    mc_samples: int = montecarlo.DEFAULT_SWEEP_SAMPLES

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        values = tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ValueError("sweep values must be nonempty")
        pairs = list(zip(values, values[1:]))
        if not (all(b > a for a, b in pairs) or all(b < a for a, b in pairs)):
            raise ValueError("sweep values must be strictly monotone")
        if not self.methods or set(self.methods) - set(METHODS):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if not self.schemes or set(self.schemes) - set(SCHEMES):
            raise ValueError(f"schemes must be a nonempty subset of {SCHEMES}")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    axis_name: str
    axis_value: object
    scheme: str
    method: str
    metric: str
    target: str
    value: float
    std_err: object  # float, or None outside Monte Carlo
    infeasible: bool


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def select(self, **match):
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in match.items())]

    def series(self, **match):
        """``(axis_values, values)`` of the rows matching ``match``, in sweep order."""
        rows = self.select(**match)
        return [r.axis_value for r in rows], np.array([r.value for r in rows])


def apply_axis(cfg: SystemConfig, axis, value) -> SystemConfig:
    if axis == "tx_power_dbm":
        return with_overrides(cfg, tx_power_dbm=value)
    if axis == "delta":
        return with_overrides(cfg, delta=value)
    if axis == "xi_pair":
        xi_1, xi_2 = value
        return with_overrides(cfg, xi_1=xi_1, xi_2=xi_2)
    if axis == "rate_split":
        return with_overrides(cfg, rate_split=value)
    if axis == "distance":
        # moves the splitting user
        return with_overrides(cfg, d2_m=value)
    raise ValueError(f"unknown axis {axis!r}")


_STAGE_FIELDS = (("stage_21", "p_stage_21"), ("stage_11", "p_stage_11"), ("stage_22", "p_stage_22"))


def _report_rows(make, cfg, report, method):
    rows = [make("RSMA", method, "outage", t, getattr(report, f), None, report.infeasible)
            for t, f in _STAGE_FIELDS]
    rows.append(make("RSMA", method, "outage", "user1", report.p_user1, None, report.infeasible))
    rows.append(make("RSMA", method, "outage", "user2", report.p_user2, None, report.infeasible))
    t1, t2 = analytic.throughput(cfg, report)
    rows.append(make("RSMA", method, "throughput", "user1", t1, None, report.infeasible))
    rows.append(make("RSMA", method, "throughput", "user2", t2, None, report.infeasible))
    return rows


def _point_rows(spec: SweepSpec, value):
    cfg = apply_axis(spec.base_config, spec.axis, value)

    def make(scheme, method, metric, target, val, se, infeasible):
        return SweepRow(spec.axis, value, scheme, method, metric, target, float(val),
                        None if se is None else float(se), bool(infeasible))

    rows = []
    cf = analytic.closed_form_report(cfg)
    for scheme in spec.schemes:
        for method in spec.methods:
            if scheme == "NOMA" and method != "monte_carlo":
                # only a simulated baseline exists for NOMA
                continue
            if method == "closed_form":
                rows += _report_rows(make, cfg, cf, method)
            elif method == "asymptotic":
                rows += _report_rows(make, cfg, analytic.asymptotic_report(cfg), method)
            else:
                run = montecarlo.estimate_outage(cfg, scheme, spec.mc_seed, spec.mc_samples)
                flag = cf.infeasible if scheme == "RSMA" else False
                for target, est in run.estimates.items():
                    rows.append(make(scheme, method, "outage", target, est.p_hat, est.std_err, flag))
                for target, t, se in zip(("user1", "user2"), run.throughput, run.throughput_std_err):
                    rows.append(make(scheme, method, "throughput", target, t, se, flag))
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every requested scheme/method at each axis value.

    Points may run in parallel; rows always come back in the order of
    ``spec.values``. Infeasible rate splits are flagged, not dropped.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda v: _point_rows(spec, v), spec.values))
    else:
        chunks = [_point_rows(spec, v) for v in spec.values]
    return SweepResult([row for chunk in chunks for row in chunk])


# -- presets ------------------------------------------------------------------

_POWERS = frange(0.0, 40.0, 2.0)


def preset(name, base=None, seed=0, samples=montecarlo.DEFAULT_SWEEP_SAMPLES, methods=None):
    """Named figure reproductions as a list of ``(label, SweepSpec)`` series."""
    base = build_config() if base is None else base

    def spec(label, axis, values, cfg, default_methods, schemes=("RSMA",)):
        return label, SweepSpec(axis, tuple(values), cfg, tuple(methods or default_methods),
                                schemes, seed, samples)

    if name == "fig1":
        return [
            spec(f"delta_{d}", "tx_power_dbm", _POWERS,
                 with_overrides(base, delta=d, xi_1=0.0, xi_2=0.0),
                 ("closed_form", "monte_carlo"))
            for d in (0.2, 0.5, 0.9)
        ]
    if name == "fig2":
        return [
            spec(f"xi_{x1}_{x2}", "tx_power_dbm", _POWERS,
                 with_overrides(base, delta="perfect", xi_1=x1, xi_2=x2),
                 ("closed_form", "asymptotic", "monte_carlo"))
            for x1, x2 in ((0.0, 0.1), (0.1, 0.0), (0.1, 0.1))
        ]
    if name == "fig3":
        return [
            spec(f"delta_{d}_xi_{x}", "tx_power_dbm", _POWERS,
                 with_overrides(base, delta=d, xi_1=x, xi_2=x),
                 ("closed_form", "monte_carlo"))
            for d, x in ((0.5, 0.0), (0.5, 0.05), (0.51, 0.05))
        ]
    if name == "fig4":
        return [
            spec("perfect_sic", "rate_split", frange(0.05, 0.95, 0.05),
                 with_overrides(base, xi_1=0.0, xi_2=0.0),
                 ("closed_form", "monte_carlo"))
        ]
    if name == "fig5":
        cfg = with_overrides(base, rate_1=0.75, rate_2=0.85, delta=0.2)
        return [
            spec("rsma_vs_noma", "tx_power_dbm", _POWERS, cfg,
                 ("closed_form", "monte_carlo"), schemes=("RSMA", "NOMA"))
        ]
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5")


# -- serialization --------------------------------------------------------------


def _format_axis_value(value):
    if isinstance(value, tuple):
        return ";".join(repr(float(v)) for v in value)
    return repr(float(value))


def _parse_axis_value(axis, text):
    if axis == "xi_pair":
        return tuple(float(v) for v in text.split(";"))
    return float(text)


def _row_record(row: SweepRow):
    return {
        "axis_name": row.axis_name,
        "axis_value": _format_axis_value(row.axis_value),
        "scheme": row.scheme,
        "method": row.method,
        "metric": row.metric,
        "target": row.target,
        "value": repr(row.value),
        "std_err": "" if row.std_err is None else repr(row.std_err),
        "infeasible": "true" if row.infeasible else "false",
    }


def emit(result: SweepResult, fmt, path):
    """Write ``result`` as CSV (header always present) or a JSON array of flat objects."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=COLUMNS)
                writer.writeheader()
                for row in result.rows:
                    writer.writerow(_row_record(row))
        elif fmt == "json":
            records = []
            for row in result.rows:
                rec = asdict(row)
                rec["axis_value"] = _format_axis_value(row.axis_value)
                records.append({k: rec[k] for k in COLUMNS})
            path.write_text(json.dumps(records, indent=1), encoding="utf-8")
        else:
            raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def load_result(path, fmt=None) -> SweepResult:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    rows = []
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != COLUMNS:
                raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
            for rec in reader:
                rows.append(SweepRow(
                    rec["axis_name"],
                    _parse_axis_value(rec["axis_name"], rec["axis_value"]),
                    rec["scheme"], rec["method"], rec["metric"], rec["target"],
                    float(rec["value"]),
                    float(rec["std_err"]) if rec["std_err"] else None,
                    rec["infeasible"] == "true",
                ))
    elif fmt == "json":
        for rec in json.loads(path.read_text(encoding="utf-8")):
            rec = dict(rec)
            rec["axis_value"] = _parse_axis_value(rec["axis_name"], rec["axis_value"])
            rows.append(SweepRow(**rec))
    else:
        raise ValueError(f"cannot infer format of {path}")
    return SweepResult(rows)
