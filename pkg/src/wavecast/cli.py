"""Batch command-line front end.

Subcommands: ingest, stats, unitroot, decompose, train, gridsearch, forecast,
compare. All outputs are files written under --out; every stochastic command
takes --seed and prints the seed it used so any run can be reproduced.

Exit codes: 0 success, 1 usage, 2 data/format error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import network, stationarity, swt, trainer
from .errors import NumericError, UsageError, WavecastError
from .ingest import (
    CaseSeries,
    TimeSeriesFrame,
    align,
    frame_stats,
    invert_scaler,
    parse_jhu_cases,
    parse_ohlcv,
    ScalerParams,
    stats_to_json,
)

log = logging.getLogger("wavecast")

PRICE_SOURCES = ["crude_oil", "dji", "sp500", "nasdaq"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract says 1
        raise UsageError(message)


def read_manifest(path: str) -> dict[str, str]:
    """Plain-text `key = value` config; blank lines and # comments ignored."""
    values: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected `key = value`")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p.read_text()


def _int_tuple(text: str) -> tuple[int, ...]:
    items = [s for s in text.replace("(", "").replace(")", "").split(",") if s.strip()]
    try:
        return tuple(int(s) for s in items)
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def _float_tuple(text: str) -> tuple[float, ...]:
    items = [s for s in text.split(",") if s.strip()]
    try:
        return tuple(float(s) for s in items)
    except ValueError:
        raise UsageError(f"expected a comma-separated float list, got {text!r}") from None


class Settings:
    """Merged view of CLI flags over manifest values over defaults."""

    def __init__(self, args: argparse.Namespace):
        self.manifest: dict[str, str] = {}
        if args.manifest:
            self.manifest = read_manifest(args.manifest)
        self.args = args

    def get(self, key: str, default=None, cast=str):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.manifest:
            raw = self.manifest[key]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default

    def out_dir(self) -> Path:
        out = self.get("out", "out")
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def seed(self) -> int:
        value = self.get("seed", None, int)
        if value is None:
            value = secrets.randbits(32)
            print(f"seed (drawn from entropy): {value}")
        return int(value)

    def pipeline_config(self, seed: int) -> trainer.PipelineConfig:
        return trainer.PipelineConfig(
            mode=self.get("mode", "RAW"),
            lookback=self.get("lookback", 128, int),
            horizon=self.get("horizon", 5, int),
            target=self.get("target", "crude_oil"),
            train_fraction=self.get("train_fraction", 0.8, float),
            epochs=self.get("epochs", 100, int),
            batch_size=self.get("batch_size", 32, int),
            seed=seed,
            dropout_rates=self.get("dropout", (0.2, 0.1), _float_tuple),
            levels=self.get("levels", 5, int),
            per_partition_swt=self.get("per_partition_swt", True, bool),
        )

    def hyperparams(self) -> trainer.HyperParams:
        return trainer.HyperParams(
            bdlstm_sizes=self.get("bdlstm_sizes", (64, 64), _int_tuple),
            fc_sizes=self.get("fc_sizes", (12,), _int_tuple),
            activation=self.get("activation", "tanh"),
            optimizer=self.get("optimizer", "adam"),
            learning_rate=self.get("learning_rate", 0.001, float),
            decay=self.get("decay", 1e-6, float),
            l2=self.get("l2", 0.0001, float),
        )

    def budget(self):
        raw = self.get("grid_budget", "full")
        if raw == "full":
            return "full"
        if raw.startswith("random:"):
            return ("random", int(raw.split(":", 1)[1]))
        raise UsageError(f"grid_budget must be `full` or `random:<k>`, got {raw!r}")


def _write(path: Path, text: str, quiet: bool) -> None:
    path.write_text(text)
    if not quiet:
        print(f"wrote {path}")


def _load_frame(settings: Settings) -> TimeSeriesFrame:
    path = settings.get("frame")
    if not path:
        raise UsageError("missing --frame (or `frame = ...` in the manifest)")
    return TimeSeriesFrame.from_csv(_read_text(path))


def cmd_ingest(settings: Settings) -> int:
    prices = {}
    for name in PRICE_SOURCES:
        path = settings.get(name)
        if not path:
            raise UsageError(f"missing --{name.replace('_', '-')} input path")
        prices[name] = parse_ohlcv(_read_text(path)).closes()
    cases_path = settings.get("cases")
    cases: CaseSeries | None = None
    if cases_path:
        cases = parse_jhu_cases(_read_text(cases_path))
    frame = align(prices, cases)
    out = settings.out_dir()
    quiet = settings.get("quiet", False, bool)
    _write(out / "frame.csv", frame.to_csv(), quiet)
    _write(out / "stats.json", stats_to_json(frame_stats(frame)), quiet)
    return 0


def cmd_stats(settings: Settings) -> int:
    frame = _load_frame(settings)
    _write(settings.out_dir() / "stats.json", stats_to_json(frame_stats(frame)),
           settings.get("quiet", False, bool))
    return 0


def cmd_unitroot(settings: Settings) -> int:
    frame = _load_frame(settings)
    max_lags = settings.get("max_lags", 31, int)
    report = stationarity.unit_root_report(
        {name: frame.column(name) for name in frame.columns}, max_lags=max_lags)
    _write(settings.out_dir() / "unitroot.json", json.dumps(report, indent=2, sort_keys=True),
           settings.get("quiet", False, bool))
    return 0


def cmd_decompose(settings: Settings) -> int:
    frame = _load_frame(settings)
    levels = settings.get("levels", 5, int)
    filters = swt.meyer_filters()
    out = settings.out_dir()
    quiet = settings.get("quiet", False, bool)
    for name in frame.columns:
        coeffs = swt.decompose_signal(frame.column(name), levels, filters)
        matrix = swt.coefficient_matrix(coeffs)
        lines = ["date,cA%d,%s" % (levels, ",".join(f"cD{j}" for j in range(1, levels + 1)))]
        for i, d in enumerate(frame.dates):
            lines.append(d.isoformat() + "," + ",".join(repr(float(v)) for v in matrix[i]))
        _write(out / f"{name}_swt.csv", "\n".join(lines) + "\n", quiet)
    return 0


def _scaler_to_json(scaler: ScalerParams) -> dict:
    return {"minimums": scaler.minimums, "maximums": scaler.maximums}


def _scaler_from_json(doc: dict) -> ScalerParams:
    return ScalerParams(dict(doc["minimums"]), dict(doc["maximums"]))


def cmd_train(settings: Settings) -> int:
    frame = _load_frame(settings)
    seed = settings.seed()
    config = settings.pipeline_config(seed)
    hp = settings.hyperparams()
    filters = swt.meyer_filters() if config.mode != "RAW" else None
    bundle = trainer.build_features(frame, config, filters)
    rng = np.random.default_rng([seed, 0])
    model, optimizer, trace = trainer.fit_model(hp, bundle.train, config, rng)
    test_rmse, test_mae, _ = trainer.evaluate(model, bundle.test)

    extra = {
        "pipeline": {
            "mode": config.mode, "lookback": config.lookback, "horizon": config.horizon,
            "target": config.target, "levels": config.levels,
            "dropout_rates": list(config.dropout_rates),
            "per_partition_swt": config.per_partition_swt,
        },
        "scaler": _scaler_to_json(bundle.scaler),
        "seed": seed,
    }
    out = settings.out_dir()
    quiet = settings.get("quiet", False, bool)
    _write(out / "checkpoint.json", network.save_checkpoint(model, optimizer, rng, extra), quiet)
    trial = trainer.TrialResult(0, hp, trace, test_rmse, test_mae, 0.0, seed)
    _write(out / "trial.json", trainer.trials_to_json([trial]), quiet)
    return 0


def cmd_gridsearch(settings: Settings) -> int:
    frame = _load_frame(settings)
    seed = settings.seed()
    config = settings.pipeline_config(seed)
    filters = swt.meyer_filters() if config.mode != "RAW" else None
    bundle = trainer.build_features(frame, config, filters)
    trials = trainer.grid_search(None, bundle.train, bundle.test, config,
                                 budget=settings.budget(),
                                 max_workers=settings.get("threads", 1, int))
    out = settings.out_dir()
    quiet = settings.get("quiet", False, bool)
    _write(out / "trials.json", trainer.trials_to_json(trials), quiet)
    _write(out / "ranking.csv", trainer.ranking_to_csv(trials), quiet)
    return 0


def cmd_forecast(settings: Settings) -> int:
    ckpt_path = settings.get("checkpoint")
    if not ckpt_path:
        raise UsageError("missing --checkpoint")
    frame = _load_frame(settings)
    model, _, _, extra = network.load_checkpoint(_read_text(ckpt_path))
    if "pipeline" not in extra or "scaler" not in extra:
        raise UsageError(f"checkpoint {ckpt_path} carries no pipeline metadata")
    pipe = extra["pipeline"]
    config = trainer.PipelineConfig(
        mode=pipe["mode"], lookback=pipe["lookback"], horizon=pipe["horizon"],
        target=pipe["target"], levels=pipe["levels"],
        dropout_rates=tuple(pipe["dropout_rates"]),
        per_partition_swt=pipe.get("per_partition_swt", True),
    )
    scaler = _scaler_from_json(extra["scaler"])
    filters = swt.meyer_filters() if config.mode != "RAW" else None
    points = trainer.forecast(model, frame, config, scaler, filters)
    _write(settings.out_dir() / "forecast.csv", trainer.forecast_to_csv(points),
           settings.get("quiet", False, bool))
    return 0


def cmd_compare(settings: Settings) -> int:
    frame = _load_frame(settings)
    seed = settings.seed()
    config = settings.pipeline_config(seed)
    hp = settings.hyperparams()
    seeds_raw = settings.get("seeds", None)
    seeds = [int(s) for s in str(seeds_raw).split(",")] if seeds_raw else [seed]
    modes_raw = settings.get("modes", None)
    modes = tuple(str(modes_raw).split(",")) if modes_raw else trainer.MODES
    report = trainer.compare_configurations(frame, hp, config, seeds, modes)
    _write(settings.out_dir() / "comparison.json", json.dumps(report, indent=2, sort_keys=True),
           settings.get("quiet", False, bool))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "unitroot": cmd_unitroot,
    "decompose": cmd_decompose,
    "train": cmd_train,
    "gridsearch": cmd_gridsearch,
    "forecast": cmd_forecast,
    "compare": cmd_compare,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="wavecast",
                     description="SWT + bidirectional-LSTM forecasting pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: _Parser) -> None:
        p.add_argument("--manifest", help="key = value run configuration file")
        p.add_argument("--seed", type=int, help="run seed (printed if omitted)")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--threads", type=int, help="parallel trial runners")
        p.add_argument("--quiet", action="store_true", default=None,
                       help="suppress per-file output lines")

    p = sub.add_parser("ingest", help="align OHLCV and case CSVs into one frame")
    for name in PRICE_SOURCES:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, help=f"{name} OHLCV CSV path")
    p.add_argument("--cases", help="JHU wide-format cases CSV path")
    add_common(p)

    p = sub.add_parser("stats", help="descriptive statistics of an aligned frame")
    p.add_argument("--frame", help="aligned frame CSV")
    add_common(p)

    p = sub.add_parser("unitroot", help="ADF and PP tests per column")
    p.add_argument("--frame", help="aligned frame CSV")
    p.add_argument("--max-lags", dest="max_lags", type=int, help="ADF max lag order")
    add_common(p)

    p = sub.add_parser("decompose", help="per-column SWT coefficient CSVs")
    p.add_argument("--frame", help="aligned frame CSV")
    p.add_argument("--levels", type=int, help="decomposition levels (default 5)")
    add_common(p)

    for name, help_text in (("train", "train one model from the manifest"),
                            ("gridsearch", "run the hyperparameter grid"),
                            ("compare", "compare RAW / WT_AD / WT_ADA")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--frame", help="aligned frame CSV")
        add_common(p)

    p = sub.add_parser("forecast", help="forecast from a trained checkpoint")
    p.add_argument("--frame", help="aligned frame CSV")
    p.add_argument("--checkpoint", help="checkpoint.json from `train`")
    add_common(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = Settings(args)
        level = logging.WARNING if settings.get("quiet", False, bool) else logging.INFO
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](settings)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except WavecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
