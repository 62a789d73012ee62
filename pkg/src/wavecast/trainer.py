"""Pipeline orchestration: feature building for the three input configurations,
training/evaluation, the hyperparameter grid search, forecasting, and the
configuration comparison report.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import itertools
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import network, swt
from .errors import DataError, NumericError, WindowError
from .ingest import (
    ScalerParams,
    TimeSeriesFrame,
    WindowedDataset,
    apply_scaler,
    chronological_split,
    fit_scaler,
    invert_scaler,
    make_windows,
)

log = logging.getLogger(__name__)

MODES = ("RAW", "WT_AD", "WT_ADA")


def mae(y: np.ndarray, y_hat: np.ndarray) -> float:
    """Mean absolute error over all elements."""
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.size == 0 or y.size != y_hat.size:
        raise DataError(f"metric needs equal nonzero lengths, got {y.size} and {y_hat.size}")
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y: np.ndarray, y_hat: np.ndarray) -> float:
    """Root mean square error over all elements."""
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.size == 0 or y.size != y_hat.size:
        raise DataError(f"metric needs equal nonzero lengths, got {y.size} and {y_hat.size}")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


@dataclass(frozen=True)
class HyperParams:
    bdlstm_sizes: tuple[int, ...] = (64, 64)
    fc_sizes: tuple[int, ...] = (12,)
    activation: str = "tanh"
    optimizer: str = "adam"
    learning_rate: float = 0.001
    decay: float = 1e-6
    l2: float = 0.0001


# The searched axes: hidden layer layouts for both stages, activation,
# optimizer, learning rate, its decay, and the L2 penalty.
TABLE3_SPACE: dict[str, list] = {
    "bdlstm_sizes": [(32,), (64,), (32, 32), (64, 32), (64, 64),
                     (32, 32, 32), (64, 32, 32), (64, 32, 64), (64, 64, 64)],
    "fc_sizes": [(12,), (24,), (12, 12), (24, 12), (24, 24),
                 (12, 12, 12), (24, 12, 12), (24, 12, 24), (24, 24, 24)],
    "activation": ["relu", "elu", "tanh", "identity"],
    "optimizer": ["adam", "rmsprop"],
    "learning_rate": [0.0001, 0.001, 0.01],
    "decay": [1e-7, 1e-6, 1e-5],
    "l2": [0.0001, 0.001, 0.01],
}

_AXIS_ORDER = ("bdlstm_sizes", "fc_sizes", "activation", "optimizer",
               "learning_rate", "decay", "l2")


def enumerate_space(space: dict[str, list] | None = None) -> list[HyperParams]:
    """Cartesian product of the axes in their fixed order."""
    space = TABLE3_SPACE if space is None else space
    for axis in _AXIS_ORDER:
        if axis not in space or not space[axis]:
            raise DataError(f"hyperparameter space is missing axis {axis!r}")
    combos = itertools.product(*(space[axis] for axis in _AXIS_ORDER))
    return [HyperParams(**dict(zip(_AXIS_ORDER, values))) for values in combos]


@dataclass
class PipelineConfig:
    mode: str = "RAW"
    lookback: int = 128
    horizon: int = 5
    target: str = "crude_oil"
    train_fraction: float = 0.8
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    dropout_rates: tuple[float, ...] = (0.2, 0.1)
    levels: int = 5
    per_partition_swt: bool = True  # decompose train/test separately (no leakage)
    cases_column: str = "covid_cases"

    def __post_init__(self):
        if self.mode not in MODES:
            raise DataError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.lookback < 1 or self.horizon < 1:
            raise DataError("lookback and horizon must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must be in (0, 1)")


@dataclass
class FeatureBundle:
    train: WindowedDataset
    test: WindowedDataset
    scaler: ScalerParams
    feature_names: list[str]


def _mode_features(frame: TimeSeriesFrame, config: PipelineConfig,
                   filters: swt.FilterPair | None) -> tuple[np.ndarray, list[str]]:
    if config.mode == "RAW":
        return frame.values, list(frame.columns)
    swt_mode = "AD" if config.mode == "WT_AD" else "ADA"
    return swt.decompose_frame(frame, config.levels, swt_mode, filters,
                               cases_column=config.cases_column)


def build_features(frame: TimeSeriesFrame, config: PipelineConfig,
                   filters: swt.FilterPair | None = None) -> FeatureBundle:
    """Split chronologically, scale on the training rows only, expand the
    configured wavelet features, and window both partitions.

    Targets always come from the scaled raw target column, never from
    coefficients.
    """
    min_rows = config.lookback + config.horizon
    train_frame, test_frame = chronological_split(frame, config.train_fraction, min_rows)
    scaler = fit_scaler(train_frame)
    train_scaled = apply_scaler(train_frame, scaler)
    test_scaled = apply_scaler(test_frame, scaler)

    if config.mode == "RAW" or config.per_partition_swt:
        feats_train, names = _mode_features(train_scaled, config, filters)
        feats_test, _ = _mode_features(test_scaled, config, filters)
    else:
        # full-series decomposition (leaks test rows into training features;
        # kept available because the reference pipeline may have done this)
        full_scaled = apply_scaler(frame, scaler)
        feats_full, names = _mode_features(full_scaled, config, filters)
        n_train = train_frame.n_rows
        feats_train, feats_test = feats_full[:n_train], feats_full[n_train:]

    train_ds = make_windows(feats_train, train_scaled.column(config.target),
                            config.lookback, config.horizon, config.target)
    test_ds = make_windows(feats_test, test_scaled.column(config.target),
                           config.lookback, config.horizon, config.target)
    return FeatureBundle(train_ds, test_ds, scaler, names)


@dataclass
class TrialResult:
    trial_index: int
    hyperparams: HyperParams
    train_loss_trace: list[float]
    rmse: float
    mae: float
    wall_time: float
    seed: int
    failed: bool = False

    def __post_init__(self):
        # quadratic mean dominates the absolute mean on any sample set
        if not self.failed and self.rmse < self.mae - 1e-12:
            raise NumericError(f"rmse {self.rmse} < mae {self.mae}")


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial_index])


def fit_model(hyperparams: HyperParams, train_ds: WindowedDataset,
              config: PipelineConfig, rng: np.random.Generator
              ) -> tuple[network.BdLstmModel, network.OptimizerState, list[float]]:
    """Train one model on the training windows; returns the per-epoch mean
    batch loss trace alongside the model and optimizer."""
    model = network.init_model(
        num_features=train_ds.inputs.shape[2],
        bdlstm_sizes=hyperparams.bdlstm_sizes,
        fc_sizes=hyperparams.fc_sizes,
        horizon=config.horizon,
        rng=rng,
        activation=hyperparams.activation,
        dropout_rates=config.dropout_rates,
        l2=hyperparams.l2,
    )
    optimizer = network.init_optimizer(hyperparams.optimizer,
                                       hyperparams.learning_rate, hyperparams.decay)
    trace: list[float] = []
    n = train_ds.n_samples
    for _ in range(config.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            value = network.train_step(model, optimizer,
                                       train_ds.inputs[idx], train_ds.targets[idx], rng)
            batch_losses.append(value)
        trace.append(float(np.mean(batch_losses)))
    return model, optimizer, trace


def evaluate(model: network.BdLstmModel, ds: WindowedDataset) -> tuple[float, float, np.ndarray]:
    """Inference-mode predictions plus (rmse, mae) on the dataset."""
    preds = network.forward_pass(model, ds.inputs, training=False).predictions
    return rmse(ds.targets, preds), mae(ds.targets, preds), preds


def train_and_evaluate(hyperparams: HyperParams, train_ds: WindowedDataset,
                       test_ds: WindowedDataset, config: PipelineConfig,
                       trial_index: int = 0) -> TrialResult:
    """Train on the training windows and score MAE/RMSE on the held-out ones.

    A diverged (non-finite) trial is returned with ``failed=True`` and its
    hyperparameters kept for post-mortem instead of being dropped.
    """
    rng = _trial_rng(config.seed, trial_index)
    started = time.perf_counter()
    try:
        model, _, trace = fit_model(hyperparams, train_ds, config, rng)
        trial_rmse, trial_mae, _ = evaluate(model, test_ds)
    except NumericError:
        log.warning("trial %d diverged: %s", trial_index, hyperparams)
        return TrialResult(trial_index, hyperparams, [], float("nan"), float("nan"),
                           time.perf_counter() - started, config.seed, failed=True)
    return TrialResult(trial_index, hyperparams, trace, trial_rmse, trial_mae,
                       time.perf_counter() - started, config.seed)


def select_trials(space: dict[str, list] | list[HyperParams] | None,
                  budget: str | tuple[str, int] = "full",
                  seed: int = 0) -> list[HyperParams]:
    """Resolve the grid: the full Cartesian product, a seeded random subset of
    it, or an explicit list of combinations."""
    if isinstance(space, list):
        if not space:
            raise DataError("explicit hyperparameter list is empty")
        candidates = list(space)
    else:
        candidates = enumerate_space(space)
    if budget == "full":
        return candidates
    if isinstance(budget, tuple) and len(budget) == 2 and budget[0] == "random":
        k = int(budget[1])
        if not 0 < k <= len(candidates):
            raise DataError(f"random budget {k} out of range 1..{len(candidates)}")
        rng = np.random.default_rng([seed, 0x9e3779b9])
        picks = rng.choice(len(candidates), size=k, replace=False)
        return [candidates[i] for i in sorted(picks)]
    raise DataError(f"unknown budget {budget!r}")


def grid_search(space: dict[str, list] | list[HyperParams] | None,
                train_ds: WindowedDataset, test_ds: WindowedDataset,
                config: PipelineConfig, budget: str | tuple[str, int] = "full",
                max_workers: int = 1) -> list[TrialResult]:
    """Run every selected combination and return all trials in index order.

    Trials are independent (each derives its RNG from the run seed and its
    index), so parallel execution cannot change the results.
    """
    selected = select_trials(space, budget, config.seed)
    log.info("grid search over %d combinations", len(selected))

    def run(item: tuple[int, HyperParams]) -> TrialResult:
        index, hp = item
        return train_and_evaluate(hp, train_ds, test_ds, config, trial_index=index)

    items = list(enumerate(selected))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            trials = list(pool.map(run, items))
    else:
        trials = [run(item) for item in items]
    trials.sort(key=lambda t: t.trial_index)
    return trials


def rank_trials(trials: list[TrialResult]) -> list[TrialResult]:
    """Successful trials ordered by RMSE, ties broken by MAE then enumeration."""
    ok = [t for t in trials if not t.failed]
    return sorted(ok, key=lambda t: (t.rmse, t.mae, t.trial_index))


def trials_to_json(trials: list[TrialResult]) -> str:
    """Deterministic JSON for the full trial list (timings are logged, not
    serialized, so reruns with one seed are bitwise identical)."""
    doc = {"trials": [{
        "trial_index": t.trial_index,
        "seed": t.seed,
        "failed": t.failed,
        "rmse": None if t.failed else t.rmse,
        "mae": None if t.failed else t.mae,
        "train_loss_trace": t.train_loss_trace,
        "hyperparams": {
            "bdlstm_sizes": list(t.hyperparams.bdlstm_sizes),
            "fc_sizes": list(t.hyperparams.fc_sizes),
            "activation": t.hyperparams.activation,
            "optimizer": t.hyperparams.optimizer,
            "learning_rate": t.hyperparams.learning_rate,
            "decay": t.hyperparams.decay,
            "l2": t.hyperparams.l2,
        },
    } for t in trials]}
    return json.dumps(doc, indent=2, sort_keys=True)


def ranking_to_csv(trials: list[TrialResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "trial_index", "rmse", "mae", "bdlstm_sizes", "fc_sizes",
                     "activation", "optimizer", "learning_rate", "decay", "l2"])
    for rank, t in enumerate(rank_trials(trials), start=1):
        hp = t.hyperparams
        writer.writerow([
            rank, t.trial_index, repr(t.rmse), repr(t.mae),
            "x".join(map(str, hp.bdlstm_sizes)), "x".join(map(str, hp.fc_sizes)),
            hp.activation, hp.optimizer,
            repr(hp.learning_rate), repr(hp.decay), repr(hp.l2),
        ])
    return buf.getvalue()


@dataclass
class ForecastPoint:
    date: dt.date
    predicted_price: float


def _next_weekdays(after: dt.date, count: int) -> list[dt.date]:
    out = []
    day = after
    while len(out) < count:
        day += dt.timedelta(days=1)
        if day.weekday() < 5:
            out.append(day)
    return out


def forecast(model: network.BdLstmModel, frame: TimeSeriesFrame,
             config: PipelineConfig, scaler: ScalerParams,
             filters: swt.FilterPair | None = None) -> list[ForecastPoint]:
    """Predict the next ``horizon`` target prices from the last lookback rows,
    inverse-scaled to price units and dated on the following weekdays."""
    if frame.n_rows < config.lookback:
        raise WindowError(
            f"need at least {config.lookback} rows of history, got {frame.n_rows}"
        )
    scaled = apply_scaler(frame, scaler)
    feats, _ = _mode_features(scaled, config, filters)
    window = feats[-config.lookback:]
    scaled_pred = network.model_forward(model, window, training=False)
    prices = invert_scaler(scaled_pred, scaler, config.target)
    dates = _next_weekdays(frame.dates[-1], config.horizon)
    return [ForecastPoint(d, float(p)) for d, p in zip(dates, prices)]


def forecast_to_csv(points: list[ForecastPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["date", "predicted_price"])
    for p in points:
        writer.writerow([p.date.isoformat(), repr(p.predicted_price)])
    return buf.getvalue()


def compare_configurations(frame: TimeSeriesFrame, hyperparams: HyperParams,
                           config: PipelineConfig, seeds: list[int],
                           modes: tuple[str, ...] = MODES,
                           targets: list[str] | None = None,
                           filters: swt.FilterPair | None = None) -> dict:
    """Median and spread of test RMSE/MAE per mode and target across seeds."""
    if not seeds:
        raise DataError("need at least one seed")
    targets = [config.target] if targets is None else targets
    if filters is None and any(m != "RAW" for m in modes):
        filters = swt.meyer_filters()

    report: dict = {}
    for target in targets:
        report[target] = {}
        for mode in modes:
            per_seed = []
            for seed in seeds:
                run_cfg = replace(config, mode=mode, target=target, seed=seed)
                bundle = build_features(frame, run_cfg, filters)
                trial = train_and_evaluate(hyperparams, bundle.train, bundle.test,
                                           run_cfg, trial_index=0)
                per_seed.append({"seed": seed, "rmse": trial.rmse, "mae": trial.mae,
                                 "failed": trial.failed})
            ok = [e for e in per_seed if not e["failed"]]
            if not ok:
                report[target][mode] = {"per_seed": per_seed, "failed": True}
                continue
            rmses = np.array([e["rmse"] for e in ok])
            maes = np.array([e["mae"] for e in ok])
            report[target][mode] = {
                "rmse_median": float(np.median(rmses)),
                "mae_median": float(np.median(maes)),
                "rmse_range": [float(rmses.min()), float(rmses.max())],
                "mae_range": [float(maes.min()), float(maes.max())],
                "per_seed": per_seed,
            }
    return report
