"""Command-line front end: parse a config file, dispatch experiments, write
CSV (optionally JSON-mirrored) results.

Exit status is 0 only when every requested experiment completed; config
problems exit with status 2 and a field-level message on stderr. Flags
override config-file values. Output files are written to a temporary name
and renamed into place, so a crash never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

from .montecarlo import SchemeSpec, cdf, percentile, run_experiment, sweep_users
from .scenario import ConfigError, SimulationConfig, config_from_mapping

DEFAULT_SWEEP_K = (2, 6, 10, 16, 20, 24, 32)


def _load_yaml(path: str) -> dict:
    import yaml

    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return raw


class ExperimentPlan:
    """Which antenna layouts to run; read from the config's `experiments` section."""

    def __init__(self, section: dict | None):
        section = dict(section or {})
        self.cellfree_nt = [int(n) for n in section.pop("cellfree_nt", [1, 8])]
        self.cellular = bool(section.pop("cellular", True))
        self.sweep_k = [int(k) for k in section.pop("sweep_k", DEFAULT_SWEEP_K)]
        self.sweep_nt = [int(n) for n in section.pop("sweep_nt", [1])]
        if section:
            raise ConfigError(
                f"unknown experiments key(s): {', '.join(sorted(section))}")

    def cellfree_layouts(self, m: int, nt_list=None):
        layouts = []
        for nt in (self.cellfree_nt if nt_list is None else nt_list):
            if nt < 1 or m % nt != 0:
                raise ConfigError(f"N_t={nt} does not divide M={m}")
            layouts.append((m // nt, nt))
        return layouts


def _slug(spec: SchemeSpec) -> str:
    scheme = spec.scheme.lower().replace("-", "_")
    return f"{scheme}_nap{spec.n_ap}_nt{spec.n_t}"


def _format(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    os.replace(tmp, path)


def _write_json(path: str, header: list[str], rows: list[list]) -> None:
    tmp = path + ".tmp"
    records = [dict(zip(header, row)) for row in rows]
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _emit(out_dir: str, name: str, header: list[str], rows: list[list],
          mirror_json: bool) -> None:
    _write_csv(os.path.join(out_dir, name + ".csv"), header, rows)
    if mirror_json:
        _write_json(os.path.join(out_dir, name + ".json"), header, rows)


def read_summary_csv(path: str) -> list[dict]:
    """Parse a summary CSV back into records (floats restored exactly)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            parsed = {}
            for key, value in row.items():
                try:
                    parsed[key] = int(value)
                except ValueError:
                    try:
                        parsed[key] = float(value)
                    except ValueError:
                        parsed[key] = value
            rows.append(parsed)
    return rows


def _run_reports(config: SimulationConfig, specs: list[SchemeSpec],
                 out_dir: str, summary_name: str, mirror_json: bool) -> None:
    summary_rows = []
    for spec in specs:
        report = run_experiment(config, spec)
        series = cdf(report.samples)
        _emit(out_dir, f"cdf_{_slug(spec)}",
              ["se_bps_hz", "cum_prob"],
              [[float(v), float(p)] for v, p in zip(series.values, series.probs)],
              mirror_json)
        summary_rows.append([
            spec.label,
            float(report.percentile_05),
            float(percentile(report.samples, 0.5)),
            float(report.sum_se_mean),
        ])
        print(f"{spec.label}: 5%-likely SE {report.percentile_05:.3f} bps/Hz, "
              f"mean sum SE {report.sum_se_mean:.2f} bps/Hz")
    _emit(out_dir, summary_name,
          ["scheme", "se_5pct_bps_hz", "se_median_bps_hz", "sum_se_mean_bps_hz"],
          summary_rows, mirror_json)


def _downlink_specs(config: SimulationConfig, plan: ExperimentPlan) -> list[SchemeSpec]:
    specs = []
    for n_ap, n_t in plan.cellfree_layouts(config.M):
        specs.append(SchemeSpec("DL-CBF", n_ap, n_t))
        specs.append(SchemeSpec("DL-ZFP", n_ap, n_t))
    if plan.cellular:
        specs.append(SchemeSpec("DL-ZFP", 1, config.M))
        specs.append(SchemeSpec("DL-CBF-maxmin", 1, config.M))
    return specs


def _uplink_specs(config: SimulationConfig, plan: ExperimentPlan) -> list[SchemeSpec]:
    layouts = plan.cellfree_layouts(config.M)
    if plan.cellular:
        layouts.append((1, config.M))
    return [SchemeSpec(scheme, n_ap, n_t)
            for n_ap, n_t in layouts
            for scheme in ("UL-MF-fullCSI", "UL-MF-stats", "UL-ZF")]


def _sweep_specs(config: SimulationConfig, plan: ExperimentPlan) -> list[SchemeSpec]:
    specs = []
    for n_ap, n_t in plan.cellfree_layouts(config.M, plan.sweep_nt):
        specs.append(SchemeSpec("DL-CBF", n_ap, n_t))
        specs.append(SchemeSpec("DL-ZFP", n_ap, n_t))
    if plan.cellular:
        specs.append(SchemeSpec("DL-ZFP", 1, config.M))
        specs.append(SchemeSpec("DL-CBF-maxmin", 1, config.M))
    return specs


def cmd_downlink(config: SimulationConfig, plan: ExperimentPlan, out_dir: str,
                 mirror_json: bool) -> None:
    _run_reports(config, _downlink_specs(config, plan), out_dir,
                 "summary_downlink", mirror_json)


def cmd_uplink(config: SimulationConfig, plan: ExperimentPlan, out_dir: str,
               mirror_json: bool) -> None:
    _run_reports(config, _uplink_specs(config, plan), out_dir,
                 "summary_uplink", mirror_json)


def cmd_sweep(config: SimulationConfig, plan: ExperimentPlan, out_dir: str,
              mirror_json: bool) -> None:
    rows = []
    for spec in _sweep_specs(config, plan):
        for point in sweep_users(config, plan.sweep_k, spec):
            rows.append([spec.label, point.k, float(point.sum_se_mean),
                         float(point.sum_se_stderr)])
            print(f"{spec.label}: K={point.k} "
                  f"sum SE {point.sum_se_mean:.2f} bps/Hz")
    _emit(out_dir, "sweep",
          ["scheme", "K", "sum_se_mean", "sum_se_stderr"], rows, mirror_json)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfmimo",
        description="Cellular / cell-free massive MIMO spectral-efficiency "
                    "experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("downlink", "per-user SE CDFs for downlink precoding schemes"),
            ("uplink", "per-user SE CDFs for uplink detection schemes"),
            ("sweep", "mean sum SE versus number of users")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", metavar="PATH",
                         help="YAML config file (defaults used when omitted)")
        cmd.add_argument("--out", metavar="DIR", default="results",
                         help="output directory (default: results)")
        cmd.add_argument("--seed", type=int, help="override RNG seed")
        cmd.add_argument("--trials", type=int,
                         help="override number of topology draws")
        cmd.add_argument("--samples", type=int,
                         help="override inner channel-sample count")
        cmd.add_argument("--json", action="store_true",
                         help="also write JSON mirrors of every CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _load_yaml(args.config) if args.config else {}
        plan = ExperimentPlan(raw.pop("experiments", None))
        config = config_from_mapping(raw)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["n_topology_trials"] = args.trials
        if args.samples is not None:
            overrides["n_channel_samples"] = args.samples
        if overrides:
            config = replace(config, **overrides)
    except FileNotFoundError as exc:
        print(f"error: config not found: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    try:
        if args.command == "downlink":
            cmd_downlink(config, plan, args.out, args.json)
        elif args.command == "uplink":
            cmd_uplink(config, plan, args.out, args.json)
        else:
            cmd_sweep(config, plan, args.out, args.json)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report, fail with nonzero status
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
