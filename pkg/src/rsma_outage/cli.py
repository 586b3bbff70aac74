"""Command-line front end: ``analyze``, ``sweep`` and ``validate``."""

import argparse
import csv
import sys
from pathlib import Path

import yaml

from . import analytic, montecarlo
from .config import build_config, load_config
from .rsma import ConfigError
from .sweep import METHODS, PRESETS, SweepSpec, emit, frange, preset, run_sweep


def _methods(text):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}")
    return methods


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key/value config file (YAML)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo samples")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", type=Path, help="write rows to this file")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = argparse.ArgumentParser(
        prog="rsma-outage", description="Uplink RSMA outage analysis with a Monte Carlo check."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="evaluate one operating point")
    p.add_argument("--methods", type=_methods, default=METHODS)

    p = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--spec", type=Path, help="sweep description file (YAML)")
    p.add_argument("--methods", type=_methods, default=None)
    p.add_argument("--axis", choices=("tx_power_dbm", "delta", "rate_split", "distance"))
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--schemes", default="RSMA", help="comma list of RSMA,NOMA")

    p = sub.add_parser("validate", parents=[common], help="closed form vs Monte Carlo grid")
    p.add_argument("--strict", action="store_true", help="exit 1 if any grid row fails")
    return parser


def _output_path(base, label, n_series):
    if n_series == 1:
        return base
    return base.with_name(f"{base.stem}_{label}{base.suffix}")


def _format(args):
    if args.format:
        return args.format
    if args.out is not None and args.out.suffix.lower() == ".json":
        return "json"
    return "csv"


def _print_rows(rows, file=None):
    file = file or sys.stdout
    print(f"{'scheme':6} {'method':12} {'metric':10} {'target':9} {'value':>13} {'std_err':>10}", file=file)
    for r in rows:
        se = "" if r.std_err is None else f"{r.std_err:.2e}"
        flag = "  (infeasible split)" if r.infeasible else ""
        print(f"{r.scheme:6} {r.method:12} {r.metric:10} {r.target:9} {r.value:13.6e} {se:>10}{flag}",
              file=file)


def _load_spec_file(path, base, args):
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    cfg = build_config(data.pop("config", {}) or {}) if "config" in data else base
    axis = data.pop("axis")
    if "values" in data:
        values = data.pop("values")
    else:
        values = frange(data.pop("from"), data.pop("to"), data.pop("step"))
    spec = SweepSpec(
        axis=axis,
        values=tuple(values),
        base_config=cfg,
        methods=tuple(data.pop("methods", ("closed_form", "monte_carlo"))),
        schemes=tuple(data.pop("schemes", ("RSMA",))),
        mc_seed=int(data.pop("seed", args.seed)),
        mc_samples=int(data.pop("samples", args.samples or montecarlo.DEFAULT_SWEEP_SAMPLES)),
    )
    if data:
        raise ConfigError(sorted(data)[0], "unknown sweep spec key", data[sorted(data)[0]])
    return [("spec", spec)]


def _cmd_analyze(args, cfg):
    samples = args.samples or montecarlo.DEFAULT_SWEEP_SAMPLES
    # a one-point sweep on a no-op axis keeps the configured powers untouched
    spec = SweepSpec("rate_split", (cfg.rate_split,), cfg, tuple(args.methods),
                     ("RSMA", "NOMA") if "monte_carlo" in args.methods else ("RSMA",),
                     args.seed, samples)
    result = run_sweep(spec)
    _print_rows(result.rows)
    if args.out:
        emit(result, _format(args), args.out)
    return 0


def _cmd_sweep(args, cfg):
    samples = args.samples or montecarlo.DEFAULT_SWEEP_SAMPLES
    if args.preset:
        series = preset(args.preset, cfg, args.seed, samples, args.methods)
    elif args.spec:
        series = _load_spec_file(args.spec, cfg, args)
    elif args.axis:
        if None in (args.start, args.stop, args.step):
            raise ConfigError("--axis", "needs --from, --to and --step", args.axis)
        schemes = tuple(s.strip().upper() for s in args.schemes.split(","))
        spec = SweepSpec(args.axis, tuple(frange(args.start, args.stop, args.step)), cfg,
                         tuple(args.methods or ("closed_form", "monte_carlo")), schemes,
                         args.seed, samples)
        series = [("axis", spec)]
    else:
        raise ConfigError("sweep", "one of --preset, --spec or --axis is required", None)
    for label, spec in series:
        result = run_sweep(spec, workers=args.workers)
        if args.out:
            path = _output_path(args.out, label, len(series))
            emit(result, _format(args), path)
            print(f"{label}: {len(result.rows)} rows -> {path}")
        else:
            print(f"# {label}")
            _print_rows(result.rows)
    return 0


def _write_validation(rows, path):
    fields = ("tx_power_dbm", "delta", "xi_1", "xi_2", "target", "closed_form", "mc",
              "std_err", "z", "passed")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for r in rows:
            pt = r.point
            writer.writerow([repr(pt.tx_power_dbm), str(pt.delta).lower(), repr(pt.xi_1),
                             repr(pt.xi_2), r.target, repr(r.closed_form), repr(r.mc),
                             repr(r.std_err), repr(r.z), str(r.passed).lower()])


def _cmd_validate(args, cfg):
    samples = args.samples or montecarlo.DEFAULT_VALIDATION_SAMPLES
    rows = montecarlo.validate_against_closed_form(cfg, n_samples=samples, seed=args.seed,
                                                   workers=args.workers)
    n_pass = sum(r.passed for r in rows)
    n_z4 = sum(abs(r.z) <= 4 for r in rows)
    print(f"{'P_dBm':>6} {'delta':>8} {'xi1':>5} {'xi2':>5} {'target':9} {'closed':>12} "
          f"{'mc':>12} {'z':>8}  ok")
    for r in rows:
        pt = r.point
        print(f"{pt.tx_power_dbm:6.1f} {str(pt.delta):>8} {pt.xi_1:5.2f} {pt.xi_2:5.2f} "
              f"{r.target:9} {r.closed_form:12.5e} {r.mc:12.5e} {r.z:8.2f}  {'yes' if r.passed else 'NO'}")
    print(f"passed {n_pass}/{len(rows)} (|z|<=3 or slack); |z|<=4: {n_z4}/{len(rows)}")
    if args.out:
        _write_validation(rows, args.out)
    return 1 if args.strict and n_pass < len(rows) else 0


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else build_config()
        if args.command == "analyze":
            return _cmd_analyze(args, cfg)
        if args.command == "sweep":
            return _cmd_sweep(args, cfg)
        return _cmd_validate(args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
