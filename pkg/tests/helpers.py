"""Shared test utilities: synthetic data builders and independent oracles."""

from __future__ import annotations

import datetime as dt
import math

import numpy as np

from wavecast import network
from wavecast.ingest import TimeSeriesFrame

FRAME_COLUMNS = ["crude_oil", "dji", "sp500", "nasdaq", "covid_cases"]


def make_synthetic_frame(n: int = 2000, seed: int = 0, noise: float = 0.05,
                         trend: float = 0.15) -> TimeSeriesFrame:
    """Multivariate toy market: per column a mild trend plus two sinusoids and
    noise, and one cumulative cases-like column that starts partway through."""
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)
    cols = []
    for i in range(4):
        phase1, phase2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
        base = (0.30 * np.sin(2.0 * np.pi * t / 64.0 + phase1)
                + 0.15 * np.sin(2.0 * np.pi * t / 23.0 + phase2)
                + trend * t / n)
        level = 30.0 + 15.0 * i
        cols.append(level * (1.0 + 0.4 * base) + level * noise * rng.standard_normal(n))
    start = int(n * 0.55)
    increments = np.zeros(n)
    increments[start:] = rng.poisson(40.0, n - start).astype(float)
    cols.append(np.cumsum(increments))
    dates = [dt.date(2015, 1, 1) + dt.timedelta(days=i) for i in range(n)]
    return TimeSeriesFrame(dates, list(FRAME_COLUMNS), np.column_stack(cols))


def two_pass_stats_oracle(x: np.ndarray) -> dict[str, float]:
    """Plain-Python two-pass moment computation, independent of the module."""
    n = len(x)
    mean = sum(float(v) for v in x) / n
    m2 = sum((float(v) - mean) ** 2 for v in x) / n
    m3 = sum((float(v) - mean) ** 3 for v in x) / n
    m4 = sum((float(v) - mean) ** 4 for v in x) / n
    return {
        "mean": mean,
        "max": max(float(v) for v in x),
        "min": min(float(v) for v in x),
        "std_dev": math.sqrt(sum((float(v) - mean) ** 2 for v in x) / (n - 1)),
        "kurtosis": m4 / m2 ** 2,
        "skewness": m3 / m2 ** 1.5,
        "n": n,
    }


def finite_difference_gradients(model: network.BdLstmModel, inputs: np.ndarray,
                                targets: np.ndarray,
                                masks: list | None = None,
                                h: float = 1e-5) -> dict[str, np.ndarray]:
    """Central-difference loss gradients for every parameter (the oracle side
    of the gradient check; deliberately brute force)."""
    training = masks is not None
    grads: dict[str, np.ndarray] = {}
    for name, arr in model.parameters():
        fd = np.empty_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + h
            up = network.forward_pass(model, inputs, training=training, masks=masks)
            loss_up = network.loss(up.predictions, targets, model)
            arr[idx] = orig - h
            down = network.forward_pass(model, inputs, training=training, masks=masks)
            loss_down = network.loss(down.predictions, targets, model)
            arr[idx] = orig
            fd[idx] = (loss_up - loss_down) / (2.0 * h)
        grads[name] = fd
    return grads


def max_relative_gradient_error(model: network.BdLstmModel, inputs: np.ndarray,
                                targets: np.ndarray,
                                masks: list | None = None) -> float:
    cache = network.forward_pass(model, inputs, training=masks is not None, masks=masks)
    _, analytic = network.backward(model, cache, targets)
    numeric = finite_difference_gradients(model, inputs, targets, masks)
    worst = 0.0
    for name, fd in numeric.items():
        g = analytic[name]
        denom = np.maximum(np.maximum(np.abs(fd), np.abs(g)), 1e-8)
        worst = max(worst, float(np.max(np.abs(fd - g) / denom)))
    return worst


def random_toy_model(rng: np.random.Generator, maximal: bool = False):
    """A small random model plus a matching batch, sized for FD checks."""
    if maximal:
        features, hidden2, t_len = 6, (8, 8), 12
        fc = (4,)
        horizon = 2
    else:
        features = int(rng.integers(1, 4))
        layers = int(rng.integers(1, 3))
        hidden2 = tuple(int(rng.integers(2, 5)) for _ in range(layers))
        t_len = int(rng.integers(2, 7))
        fc = (int(rng.integers(2, 5)),) if rng.random() < 0.6 else ()
        horizon = int(rng.integers(1, 3))
    activation = ["relu", "elu", "tanh", "identity"][int(rng.integers(0, 4))]
    dropout = (float(rng.uniform(0.1, 0.4)),) if rng.random() < 0.4 else ()
    l2 = float(rng.choice([0.0, 1e-3, 1e-2]))
    model = network.init_model(features, hidden2, fc, horizon, rng,
                               activation=activation, dropout_rates=dropout, l2=l2)
    batch = int(rng.integers(1, 3))
    inputs = rng.standard_normal((batch, t_len, features))
    targets = rng.standard_normal((batch, horizon))
    masks = None
    if dropout:
        masks = []
        for layer in model.bdlstm_layers:
            if layer.dropout_rate > 0.0:
                keep = 1.0 - layer.dropout_rate
                masks.append((rng.random((batch, t_len, layer.output_size)) < keep) / keep)
            else:
                masks.append(None)
    return model, inputs, targets, masks
