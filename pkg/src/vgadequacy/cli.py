"""Command-line front end: ``vgadequacy <command> --config scenario.yaml ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .config import load_config
from .exceptions import AdequacyError, ConfigError
from .experiments import (
    bootstrap_statistic, load_scenario, loess_rows, risk_record, sweep_rows, topn_rows, validation_report,
)
from .jointmodel import HINDCAST, MODEL_KINDS
from .synth import FixtureSpec, write_fixture

EXIT_OK = 0


def _capacities(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values or any(v < 0 or v != v for v in values):
        raise argparse.ArgumentTypeError("capacities must be a nonempty list of nonnegative numbers")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="scenario YAML file")
    common.add_argument("--model", choices=MODEL_KINDS, help="joint model (overrides scenario.model)")
    common.add_argument("--capacities", type=_capacities, help="installed wind MW, comma separated")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads (results do not change)")
    common.add_argument("--allow-gaps", action="store_true", help="drop incomplete weeks instead of failing")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")

    boot = argparse.ArgumentParser(add_help=False)
    boot.add_argument("--seed", type=_seed, help="bootstrap seed (overrides bootstrap.seed)")
    boot.add_argument("--replicates", type=_positive_int, help="bootstrap replicates (overrides bootstrap.replicates)")

    parser = _Parser(prog="vgadequacy", description="Generation adequacy risk with wind-demand joint models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="check inputs and report coverage and block counts")
    p = sub.add_parser("risk", parents=[common], help="LOLP, LOLE, EPU and EEU as JSON")
    p.add_argument("--capvalue", action="store_true", help="also solve EFC and ELCC")
    p = sub.add_parser("sweep", parents=[common, boot], help="LOLE and EFC per installed capacity as CSV")
    p.add_argument("--bootstrap", action="store_true", help="add percentile confidence intervals")
    p = sub.add_parser("topn", parents=[common], help="hindcast top-n LOLE shares as CSV")
    p.add_argument("--n-max", type=_positive_int, help="largest n reported (default: all hours)")
    p = sub.add_parser("loess", parents=[common], help="daily-peak load factor against demand with LOESS curve")
    p.add_argument("--span", type=float, help="LOESS span in (0, 1] (overrides loess.span)")
    p = sub.add_parser("bootstrap", parents=[common, boot], help="bootstrap one statistic at one capacity")
    p.add_argument("--statistic", choices=("lole", "efc"), default="lole")
    p.add_argument("--replicates-out", type=Path, help="write replicate values as CSV here")

    p = sub.add_parser("synth", help="write the synthetic GB-like fixture and a config")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--winters", type=_positive_int, default=7)
    p.add_argument("--weeks", type=_positive_int, default=20)
    p.add_argument("--cadence-hours", type=_positive_int, default=1, help="record spacing in hours")
    p.add_argument("--capacities", type=_capacities, help="installed wind MW written to the config")
    return parser


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(rows: list[dict], columns: list[str] | None = None) -> str:
    columns = columns or list(rows[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _scenario(args, **overrides):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(**{
        "scenario.model": args.model,
        "scenario.installed_wind_mw": args.capacities,
        "season.allow_gaps": True if args.allow_gaps else None,
        **overrides,
    })
    return load_scenario(cfg)


def cmd_validate(args) -> str:
    return _json_text(validation_report(_scenario(args)))


def cmd_risk(args) -> str:
    sc = _scenario(args)
    kind = sc.config["scenario.model"]
    records = [risk_record(sc, kind, cap, capvalue=args.capvalue) for cap in sc.config.capacities]
    return _json_text(records[0] if len(records) == 1 else records)


def cmd_sweep(args) -> str:
    sc = _scenario(args, **{
        "bootstrap.enabled": True if args.bootstrap else None,
        "bootstrap.seed": args.seed,
        "bootstrap.replicates": args.replicates,
    })
    rows = sweep_rows(sc, sc.config["scenario.model"], sc.config.capacities, threads=args.threads)
    return _csv_text(rows)


def cmd_topn(args) -> str:
    sc = _scenario(args, **{"topn.n_max": args.n_max})
    if sc.config["scenario.model"] != HINDCAST:
        raise ConfigError("topn is defined for the hindcast model only")
    return _csv_text(topn_rows(sc, sc.config.capacities, sc.config["topn.n_max"]))


def cmd_loess(args) -> str:
    sc = _scenario(args, **{"loess.span": args.span})
    cfg = sc.config
    rows = loess_rows(sc, cfg["loess.span"], cfg["loess.demand_threshold"], cfg["loess.grid_points"])
    return _csv_text(rows, ["tag", "demand_norm", "load_factor", "loess_load_factor"])


def cmd_bootstrap(args) -> str:
    sc = _scenario(args, **{"bootstrap.seed": args.seed, "bootstrap.replicates": args.replicates})
    caps = sc.config.capacities
    if len(caps) != 1:
        raise ConfigError("bootstrap needs exactly one installed capacity; pass --capacities with one value")
    res = bootstrap_statistic(sc, sc.config["scenario.model"], caps[0], args.statistic, threads=args.threads)
    if args.replicates_out is not None:
        rows = [{"replicate": r, "value": float(v)} for r, v in enumerate(res.replicates)]
        args.replicates_out.write_text(_csv_text(rows), encoding="utf-8")
    summary = {"statistic": args.statistic, "installed_mw": caps[0], **res.summary(sc.config["bootstrap.seed"])}
    return _json_text(summary)


def cmd_synth(args) -> str:
    spec = FixtureSpec(n_winters=args.winters, weeks_per_winter=args.weeks, cadence_hours=args.cadence_hours)
    if 24 % args.cadence_hours:
        raise ConfigError("cadence must divide a day")
    path = write_fixture(args.out, spec, seed=args.seed, capacities=args.capacities)
    return f"wrote synthetic fixture; config at {path}\n"


COMMANDS = {
    "validate": cmd_validate,
    "risk": cmd_risk,
    "sweep": cmd_sweep,
    "topn": cmd_topn,
    "loess": cmd_loess,
    "bootstrap": cmd_bootstrap,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    previous = _kernels.get_num_threads()
    try:
        _kernels.set_num_threads(getattr(args, "threads", 1))
        text = COMMANDS[args.command](args)
    except AdequacyError as exc:
        print(f"vgadequacy {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"vgadequacy {args.command}: invalid argument: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    finally:
        _kernels.set_num_threads(previous)
    out = getattr(args, "out", None) if args.command != "synth" else None
    _emit(text, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
