"""Unit-root diagnostics: ADF with SIC lag selection and Phillips-Perron
with a Bartlett-kernel long-run variance correction.

Critical values are the asymptotic table for the intercept and
trend-and-intercept regressions; for short samples the result is flagged
but the same table is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SingularMatrixError

# Asymptotic critical values for the DF-family t-statistic.
CRITICAL_VALUES_INTERCEPT = {"1%": -3.431479, "5%": -2.861924, "10%": -2.567017}
CRITICAL_VALUES_TREND = {"1%": -3.959877, "5%": -3.410705, "10%": -3.127138}

DETERMINISTICS = ("intercept", "trend_and_intercept")
TRANSFORMS = ("level", "first_difference")
TESTS = ("ADF", "PP")

SMALL_SAMPLE_THRESHOLD = 500


@dataclass(frozen=True)
class UnitRootSpec:
    test: str = "ADF"
    deterministic: str = "intercept"
    transform: str = "level"
    max_lags: int = 31
    bandwidth: int | None = None  # None selects the automatic Newey-West rule

    def __post_init__(self):
        if self.test not in TESTS:
            raise DataError(f"unknown test {self.test!r}")
        if self.deterministic not in DETERMINISTICS:
            raise DataError(f"unknown deterministic spec {self.deterministic!r}")
        if self.transform not in TRANSFORMS:
            raise DataError(f"unknown transform {self.transform!r}")
        if self.max_lags < 0:
            raise DataError("max_lags must be >= 0")
        if self.bandwidth is not None and self.bandwidth < 0:
            raise DataError("bandwidth must be >= 0")


@dataclass
class UnitRootResult:
    statistic: float
    chosen_lags_or_bandwidth: int
    critical_values: dict[str, float]
    reject_at: dict[str, bool] = field(default_factory=dict)
    n_obs: int = 0
    small_sample: bool = False  # critical values are asymptotic regardless

    def __post_init__(self):
        if not self.reject_at:
            self.reject_at = {p: bool(self.statistic < cv)
                              for p, cv in self.critical_values.items()}


def difference(series: np.ndarray) -> np.ndarray:
    """First difference: out[t] = x[t+1] - x[t]."""
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        raise DataError("need at least 2 observations to difference")
    return np.diff(series)


@dataclass
class OlsResult:
    coefficients: np.ndarray
    residuals: np.ndarray
    std_errors: np.ndarray

    @property
    def ssr(self) -> float:
        return float(self.residuals @ self.residuals)


def ols(y: np.ndarray, X: np.ndarray) -> OlsResult:
    """Least squares fit with classical standard errors s^2 (X'X)^-1."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise DataError("ols expects y [n] and X [n, k] with matching n")
    n, k = X.shape
    if n <= k:
        raise DataError(f"need more rows than columns, got {n} x {k}")
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < k:
        raise SingularMatrixError(f"design matrix rank {rank} < {k} columns")
    resid = y - X @ beta
    s2 = (resid @ resid) / (n - k)
    cov = s2 * np.linalg.inv(X.T @ X)
    return OlsResult(beta, resid, np.sqrt(np.diag(cov)))


def _critical_values(deterministic: str) -> dict[str, float]:
    if deterministic == "intercept":
        return dict(CRITICAL_VALUES_INTERCEPT)
    return dict(CRITICAL_VALUES_TREND)


def _apply_transform(series: np.ndarray, transform: str) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    return difference(series) if transform == "first_difference" else series


def _df_design(y: np.ndarray, deterministic: str, p: int,
               start: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Build the ADF regression sample dy_t on [const, trend?, y_{t-1},
    dy_{t-1}..dy_{t-p}] for t = start..n-1. Returns (lhs, X, gamma column)."""
    n = y.size
    dy = np.diff(y)
    t_idx = np.arange(start, n)          # indices into y for the regressand dy[t-1]
    lhs = dy[t_idx - 1]
    cols = [np.ones(t_idx.size)]
    if deterministic == "trend_and_intercept":
        cols.append(t_idx.astype(float))
    gamma_col = len(cols)
    cols.append(y[t_idx - 1])
    for i in range(1, p + 1):
        cols.append(dy[t_idx - 1 - i])
    return lhs, np.column_stack(cols), gamma_col


def adf_test(series: np.ndarray, spec: UnitRootSpec) -> UnitRootResult:
    """Augmented Dickey-Fuller test with SIC lag selection.

    All candidate lag orders are fit on the common estimation sample defined
    by max_lags so their information criteria are comparable; the statistic is
    the t-ratio on the lagged level in the SIC-minimizing regression.
    """
    y = _apply_transform(series, spec.transform)
    n = y.size
    n_det = 1 if spec.deterministic == "intercept" else 2
    start = spec.max_lags + 1
    t_common = n - start
    if t_common <= n_det + spec.max_lags + 2:
        raise DataError(
            f"series too short ({n} obs) for ADF with max_lags={spec.max_lags}"
        )

    best = None  # (sic, p, fit, gamma_col)
    for p in range(spec.max_lags + 1):
        lhs, X, gamma_col = _df_design(y, spec.deterministic, p, start)
        fit = ols(lhs, X)
        t = lhs.size
        k = X.shape[1]
        sigma2 = fit.ssr / t
        sic = math.log(sigma2) + k * math.log(t) / t
        if best is None or sic < best[0]:
            best = (sic, p, fit, gamma_col)

    _, p, fit, gamma_col = best
    stat = float(fit.coefficients[gamma_col] / fit.std_errors[gamma_col])
    return UnitRootResult(
        statistic=stat,
        chosen_lags_or_bandwidth=p,
        critical_values=_critical_values(spec.deterministic),
        n_obs=t_common,
        small_sample=t_common < SMALL_SAMPLE_THRESHOLD,
    )


def bartlett_weights(q: int) -> np.ndarray:
    """Kernel weights 1 - j/(q+1) for j = 1..q."""
    if q < 0:
        raise DataError("bandwidth must be >= 0")
    j = np.arange(1, q + 1, dtype=float)
    return 1.0 - j / (q + 1.0)


def newey_west_bandwidth(t: int) -> int:
    """The deterministic automatic rule floor(4 (T/100)^(2/9))."""
    return int(math.floor(4.0 * (t / 100.0) ** (2.0 / 9.0)))


def long_run_variance(residuals: np.ndarray, q: int) -> float:
    """Bartlett-weighted long-run variance gamma_0 + 2 sum w_j gamma_j with
    autocovariances gamma_j = (1/T) sum_t u_t u_{t-j}."""
    u = np.asarray(residuals, dtype=float)
    t = u.size
    lam2 = float(u @ u) / t
    for j, w in enumerate(bartlett_weights(q), start=1):
        lam2 += 2.0 * w * float(u[j:] @ u[:-j]) / t
    return lam2


def pp_test(series: np.ndarray, spec: UnitRootSpec) -> UnitRootResult:
    """Phillips-Perron test (tau statistic).

    Fits the no-lag DF regression, then corrects the t-ratio using the
    Bartlett-kernel long-run variance of the residuals at the Newey-West
    automatic bandwidth unless a fixed one is supplied.
    """
    y = _apply_transform(series, spec.transform)
    if y.size < 20:
        raise DataError(f"series too short ({y.size} obs) for the PP test")

    lhs, X, gamma_col = _df_design(y, spec.deterministic, p=0, start=1)
    fit = ols(lhs, X)
    t = lhs.size
    k = X.shape[1]

    q = newey_west_bandwidth(t) if spec.bandwidth is None else spec.bandwidth
    gamma0 = fit.ssr / t
    lam2 = long_run_variance(fit.residuals, q)
    s = math.sqrt(fit.ssr / (t - k))
    se = float(fit.std_errors[gamma_col])
    t_gamma = float(fit.coefficients[gamma_col]) / se

    stat = (math.sqrt(gamma0 / lam2) * t_gamma
            - 0.5 * (lam2 - gamma0) / math.sqrt(lam2) * (t * se / s))
    return UnitRootResult(
        statistic=stat,
        chosen_lags_or_bandwidth=q,
        critical_values=_critical_values(spec.deterministic),
        n_obs=t,
        small_sample=t < SMALL_SAMPLE_THRESHOLD,
    )


def run_test(series: np.ndarray, spec: UnitRootSpec) -> UnitRootResult:
    return adf_test(series, spec) if spec.test == "ADF" else pp_test(series, spec)


def unit_root_report(columns: dict[str, np.ndarray], max_lags: int = 31,
                     bandwidth: int | None = None) -> dict:
    """Per-column grid of 8 cells: 2 tests x 2 deterministics x 2 transforms,
    each with the statistic and the chosen lag/bandwidth (the number the
    reference tables show in parentheses)."""
    report: dict[str, dict] = {}
    for name, values in columns.items():
        cells: dict[str, dict] = {}
        for test in TESTS:
            for det in DETERMINISTICS:
                for transform in TRANSFORMS:
                    spec = UnitRootSpec(test=test, deterministic=det,
                                        transform=transform, max_lags=max_lags,
                                        bandwidth=bandwidth)
                    res = run_test(values, spec)
                    key = f"{test}_{det}_{transform}"
                    cells[key] = {
                        "statistic": res.statistic,
                        "lag_or_bandwidth": res.chosen_lags_or_bandwidth,
                        "reject_at": res.reject_at,
                        "small_sample": res.small_sample,
                    }
        report[name] = cells
    report["critical_values"] = {
        "intercept": dict(CRITICAL_VALUES_INTERCEPT),
        "trend_and_intercept": dict(CRITICAL_VALUES_TREND),
    }
    return report
