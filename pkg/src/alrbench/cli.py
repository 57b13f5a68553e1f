"""Command-line entry point: ``alr-bench {datasets-list,run,report,plot-data}``.

Exit codes: 0 success, 2 configuration error, 3 data or results error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
import warnings
from pathlib import Path

from . import harness
from .dataio import DataError, dataset_registry, default_data_dir, load_csv
from .preprocess import one_hot
from .strategies import StrategyId

log = logging.getLogger("alrbench")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

CONFIG_KEYS = {
    "experiment": {"datasets", "strategies", "repetitions", "reg_r", "committee_p", "base_seed", "jobs",
                   "emcm_bias_coordinate"},
    "paths": {"data_dir", "output_dir"},
}


class MissingResults(DataError):
    pass


def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def read_config(path) -> dict:
    """Parse an INI experiment config into ExperimentConfig keyword arguments."""
    path = Path(path)
    if not path.is_file():
        raise harness.ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise harness.ConfigError(f"{path}: {exc}") from None
    out = {}
    for section in parser.sections():
        if section not in CONFIG_KEYS:
            raise harness.ConfigError(f"{path}: unknown section [{section}]")
        for key, value in parser[section].items():
            if key not in CONFIG_KEYS[section]:
                raise harness.ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                if key in ("datasets", "strategies"):
                    out[key] = _csv_list(value)
                elif key == "reg_r":
                    out[key] = [float(v) for v in _csv_list(value)]
                elif key in ("repetitions", "base_seed", "jobs"):
                    out[key] = int(value)
                elif key == "committee_p":
                    out["committee_P"] = int(value)
                elif key == "emcm_bias_coordinate":
                    out[key] = parser[section].getboolean(key)
                else:
                    out[key] = Path(value)
            except ValueError:
                raise harness.ConfigError(f"{path}: bad value for {key!r}: {value!r}") from None
    return out


def build_config(args) -> harness.ExperimentConfig:
    kw = read_config(args.config) if args.config else {}
    try:
        if args.datasets:
            kw["datasets"] = _csv_list(args.datasets)
        if args.strategies:
            kw["strategies"] = _csv_list(args.strategies)
        if args.reps is not None:
            kw["repetitions"] = args.reps
        if args.r:
            kw["reg_r"] = [float(v) for v in _csv_list(args.r)]
    except ValueError as exc:
        raise harness.ConfigError(f"--r: {exc}") from None
    if args.seed is not None:
        kw["base_seed"] = args.seed
    if args.jobs is not None:
        kw["jobs"] = args.jobs
    if args.data_dir:
        kw["data_dir"] = Path(args.data_dir)
    if args.out:
        kw["output_dir"] = Path(args.out)
    kw.setdefault("data_dir", default_data_dir())
    if "datasets" not in kw:
        raise harness.ConfigError("datasets: none given (use --datasets or a config file)")
    return harness.ExperimentConfig(**kw)


def cmd_datasets_list(args) -> int:
    data_dir = Path(args.data_dir) if args.data_dir else default_data_dir()
    header = ["name", "N", "raw_features", "numeric", "categorical", "total_features", "status"]
    rows = []
    for m in dataset_registry(data_dir):
        raw_n = m.expected_raw_features
        cat_n = len(m.categorical_columns)
        row = [m.name, m.expected_samples, raw_n, raw_n - cat_n if raw_n is not None else "", cat_n,
               m.expected_total_features, "unavailable"]
        if m.available:
            try:
                raw = load_csv(m)
                row = [m.name, raw.n_samples, len(raw.columns), len(raw.numeric_columns),
                       len(raw.categorical_columns), one_hot(raw).shape[1], "available"]
            except DataError as exc:
                row[-1] = f"error: {exc}"
        rows.append(["" if v is None else v for v in row])
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
        for row in [header, *rows]:
            print("  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip())
    return EXIT_OK


def _report(out_dir: Path, plot: bool, tables: bool) -> list[Path]:
    try:
        records = harness.load_results(out_dir)
    except FileNotFoundError as exc:
        raise MissingResults(str(exc)) from None
    agg = harness.aggregate(records)
    written = []
    if tables:
        written += harness.write_report(agg, out_dir)
    if plot:
        written += harness.write_plot_data(agg, out_dir)
    return written


def cmd_run(args) -> int:
    config = build_config(args)

    def progress(i, n):
        log.info("unit %d/%d done", i, n)

    records = harness.run_all(config, progress=progress)
    log.info("%d new records written under %s", len(records), config.output_dir)
    for p in _report(config.output_dir, plot=True, tables=True):
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_report(args) -> int:
    for p in _report(Path(args.out), plot=False, tables=True):
        print(p)
    return EXIT_OK


def cmd_plot_data(args) -> int:
    for p in _report(Path(args.out), plot=True, tables=False):
        print(p)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alr-bench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datasets-list", help="show known datasets and whether their CSVs are present")
    p.add_argument("--data-dir")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.set_defaults(func=cmd_datasets_list)

    p = sub.add_parser("run", help="run the benchmark and write results, tables and plot data")
    p.add_argument("--config", help="INI file with [experiment] and [paths] sections")
    p.add_argument("--data-dir")
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--datasets", help="comma-separated dataset names")
    p.add_argument("--strategies", help=f"comma-separated subset of {','.join(s.value for s in StrategyId)}")
    p.add_argument("--reps", type=int)
    p.add_argument("--r", help="comma-separated ridge regularization values")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_run)

    for name, func, text in (("report", cmd_report, "summary, improvement and p-value tables"),
                             ("plot-data", cmd_plot_data, "mean curves and normalized-AUC bar data")):
        p = sub.add_parser(name, help=f"write {text} from an existing results directory")
        p.add_argument("--out", default="results", help="results directory")
        p.add_argument("--format", choices=["csv"], default="csv")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
