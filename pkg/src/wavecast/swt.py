"""Discrete Meyer filter synthesis and the five-level stationary wavelet transform.

The transform uses the a-trous scheme under periodic boundaries: at level j the
running approximation is circularly convolved with the level-1 filters dilated
by 2^(j-1), so every coefficient vector keeps the length of the (padded) input
and the whole transform is exactly shift-equivariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError, ResolutionError
from .ingest import CASES_COLUMN, TimeSeriesFrame

SQRT2 = float(np.sqrt(2.0))

DEFAULT_LEVELS = 5
DECOMPOSE_MODES = ("AD", "ADA")


def meyer_auxiliary(a: np.ndarray | float) -> np.ndarray | float:
    """Smooth transition polynomial a^4 (35 - 84a + 70a^2 - 20a^3), clamped to [0, 1]."""
    a = np.clip(a, 0.0, 1.0)
    return a ** 4 * (35.0 - 84.0 * a + 70.0 * a ** 2 - 20.0 * a ** 3)


@dataclass(frozen=True)
class FilterPair:
    """Analysis low-pass/high-pass FIR taps of an orthonormal wavelet."""

    lowpass: np.ndarray
    highpass: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lowpass", np.asarray(self.lowpass, dtype=float))
        object.__setattr__(self, "highpass", np.asarray(self.highpass, dtype=float))

    @property
    def length(self) -> int:
        return self.lowpass.size

    def validate(self, tol: float = 1e-6) -> None:
        """Check the orthonormal-QMF invariants; raises DataError on violation."""
        h, g = self.lowpass, self.highpass
        if h.shape != g.shape or h.ndim != 1:
            raise DataError("filter taps must be 1-D vectors of equal length")
        if abs(h.sum() - SQRT2) > tol:
            raise DataError(f"lowpass taps sum to {h.sum()!r}, expected sqrt(2)")
        if abs(g.sum()) > tol:
            raise DataError(f"highpass taps sum to {g.sum()!r}, expected 0")
        if abs(np.linalg.norm(h) - 1.0) > tol:
            raise DataError(f"lowpass l2 norm is {np.linalg.norm(h)!r}, expected 1")
        signs = (-1.0) ** np.arange(h.size)
        if np.max(np.abs(g - signs * h[::-1])) > tol:
            raise DataError("highpass does not satisfy the quadrature mirror relation")


def quadrature_mirror(lowpass: np.ndarray) -> np.ndarray:
    """highpass[k] = (-1)^k * lowpass[L-1-k]."""
    lowpass = np.asarray(lowpass, dtype=float)
    return (-1.0) ** np.arange(lowpass.size) * lowpass[::-1]


def _meyer_scaling_response(omega: np.ndarray) -> np.ndarray:
    """Magnitude response of the Meyer scaling filter on [0, pi].

    Flat at 1 up to pi/3, rolls off through cos(pi/2 * v(3w/pi - 1)) on
    (pi/3, 2pi/3], zero beyond; the auxiliary polynomial guarantees the
    power-complementary property that makes the filter bank invertible.
    """
    response = np.zeros_like(omega)
    flat = omega <= np.pi / 3.0
    trans = (omega > np.pi / 3.0) & (omega <= 2.0 * np.pi / 3.0)
    response[flat] = 1.0
    response[trans] = np.cos(0.5 * np.pi * meyer_auxiliary(3.0 * omega[trans] / np.pi - 1.0))
    return response


def _lattice_generate(thetas: np.ndarray) -> np.ndarray:
    """Low-pass taps of the two-channel paraunitary lattice with the given
    rotation angles; the result is power complementary by construction."""
    c, s = np.cos(thetas[0]), np.sin(thetas[0])
    h = np.array([c, s])
    g = np.array([-s, c])
    for th in thetas[1:]:
        c, s = np.cos(th), np.sin(th)
        hz = np.concatenate([h, [0.0, 0.0]])
        gz = np.concatenate([[0.0, 0.0], g])
        h, g = c * hz + s * gz, -s * hz + c * gz
    return h


def _lattice_with_moment(free: np.ndarray) -> np.ndarray:
    # Pinning the angle sum to pi/4 forces H(pi) = 0 (zero-sum highpass) and
    # H(0) = sqrt(2) exactly.
    return _lattice_generate(np.concatenate([[0.25 * np.pi - free.sum()], free]))


def _fit_lattice(targets: list[np.ndarray]) -> np.ndarray:
    """Fit lattice angles to each progressively longer tap target.

    Coarse-to-fine continuation: the length-2N solution (plus one zero angle)
    warm-starts the length-2N+2 fit, then damped Gauss-Newton refines the free
    angles against the target taps.
    """
    free = np.zeros(0)
    for stage, target in enumerate(targets):
        if stage > 0:
            free = np.concatenate([free, [0.0]])
        if free.size == 0:
            continue
        x = free
        fx = _lattice_with_moment(x) - target
        lam = 1e-8
        max_iter = 60 if stage == len(targets) - 1 else 12
        for _ in range(max_iter):
            jac = np.empty((target.size, x.size))
            eps = 1e-7
            for j in range(x.size):
                xp = x.copy()
                xp[j] += eps
                jac[:, j] = (_lattice_with_moment(xp) - target - fx) / eps
            step = np.linalg.solve(jac.T @ jac + lam * np.eye(x.size), -jac.T @ fx)
            xn = x + step
            fn = _lattice_with_moment(xn) - target
            if fn @ fn < fx @ fx:
                x, fx = xn, fn
                lam = max(lam * 0.3, 1e-12)
            else:
                lam *= 10.0
            if np.linalg.norm(step) < 1e-13:
                break
        free = x
    return free


def _truncated_meyer_taps(num_taps: int, grid_size: int) -> np.ndarray:
    """Center truncation of the sampled Meyer scaling-filter impulse response.

    The half-sample phase centers the even-length window symmetrically, which
    is what makes the truncation a faithful linear-phase reference.
    """
    omega = 2.0 * np.pi * np.arange(grid_size // 2 + 1) / grid_size
    spectrum = SQRT2 * _meyer_scaling_response(omega) * np.exp(0.5j * omega)
    impulse = np.fft.irfft(spectrum, n=grid_size)
    half = num_taps // 2
    return np.concatenate([impulse[-half:], impulse[:half]])


@lru_cache(maxsize=8)
def _meyer_filters_cached(num_taps: int, grid_size: int) -> FilterPair:
    targets = [_truncated_meyer_taps(2 * n, grid_size)
               for n in range(1, num_taps // 2 + 1)]
    free = _fit_lattice(targets)
    taps = _lattice_with_moment(free)
    taps = taps * (SQRT2 / taps.sum())
    taps.flags.writeable = False
    pair = FilterPair(taps, quadrature_mirror(taps), name=f"meyer{num_taps}")
    pair.validate()
    return pair


def meyer_filters(num_taps: int = 62, grid_size: int = 8192) -> FilterPair:
    """Synthesize the discrete Meyer filter pair from its frequency response.

    The scaling-filter response is sampled on a dense grid, inverse-transformed
    and center-truncated; because no finite symmetric truncation is exactly
    orthonormal, the taps are then realized through the paraunitary lattice
    closest (Gauss-Newton fit) to that truncation, which restores exact power
    complementarity, a zero-sum highpass, and with it machine-precision
    reconstruction. The tap sum is renormalized to sqrt(2) and the high-pass
    taps follow from the quadrature mirror relation.
    """
    if num_taps < 2 or num_taps % 2 != 0:
        raise DataError(f"num_taps must be a positive even integer, got {num_taps}")
    if grid_size < 4096 or grid_size & (grid_size - 1) != 0:
        raise ResolutionError(
            f"grid_size must be a power of two >= 4096 to resolve the "
            f"transition bands, got {grid_size}"
        )
    if grid_size < 4 * num_taps:
        raise ResolutionError(f"grid_size {grid_size} too small for {num_taps} taps")
    return _meyer_filters_cached(num_taps, grid_size)


def haar_filters() -> FilterPair:
    """Two-tap orthonormal pair; exact arithmetic makes it handy in unit tests."""
    h = np.array([1.0, 1.0]) / SQRT2
    return FilterPair(h, quadrature_mirror(h), name="haar")


def pad_periodic(x: np.ndarray, levels: int = DEFAULT_LEVELS) -> tuple[np.ndarray, int]:
    """Append wrap-around samples until the length divides 2^levels."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise DataError("cannot pad an empty signal")
    block = 2 ** levels
    target = ((x.size + block - 1) // block) * block
    pad = target - x.size
    if pad == 0:
        return x.copy(), 0
    return np.resize(x, target), pad


def _circular_convolve(x: np.ndarray, taps: np.ndarray, step: int) -> np.ndarray:
    # (x * f)[n] = sum_k f[k] x[n - k 2^(j-1) mod N]; np.roll keeps the
    # accumulation order identical for every rotation of x, so shift
    # equivariance holds bit for bit.
    n = x.size
    out = np.zeros_like(x)
    for k, c in enumerate(taps):
        out += c * np.roll(x, (k * step) % n)
    return out


@dataclass
class SwtCoefficients:
    """Non-decimated coefficients: every vector is as long as the padded input."""

    levels: int
    approx_final: np.ndarray        # cA at the deepest level
    details: list[np.ndarray]       # cD_1 .. cD_levels
    original_length: int
    pad_length: int
    boundary: str = "periodic"

    def padded_length(self) -> int:
        return self.original_length + self.pad_length


def swt_decompose(x: np.ndarray, levels: int = DEFAULT_LEVELS,
                  filters: FilterPair | None = None,
                  pad_length: int = 0) -> SwtCoefficients:
    """A-trous stationary wavelet transform of an already padded signal.

    ``pad_length`` records how many trailing wrap-around samples the caller
    appended, so reconstruction can strip them again.
    """
    x = np.asarray(x, dtype=float)
    if levels < 1:
        raise DataError(f"levels must be >= 1, got {levels}")
    if x.size % (2 ** levels) != 0:
        raise DataError(
            f"signal length {x.size} is not divisible by 2^{levels}; "
            f"pad with pad_periodic first"
        )
    filters = meyer_filters() if filters is None else filters

    approx = x.copy()
    details = []
    for j in range(1, levels + 1):
        step = 2 ** (j - 1)
        details.append(_circular_convolve(approx, filters.highpass, step))
        approx = _circular_convolve(approx, filters.lowpass, step)
    return SwtCoefficients(levels, approx, details, x.size - pad_length, pad_length)


def iswt_reconstruct(coeffs: SwtCoefficients, filters: FilterPair | None = None) -> np.ndarray:
    """Invert the transform and strip the recorded padding.

    One synthesis step circularly convolves with the time-reversed analysis
    filters and undoes the (L-1) * 2^(j-1) group delay; for a power-
    complementary pair this reproduces the previous approximation exactly.
    """
    filters = meyer_filters() if filters is None else filters
    n = coeffs.approx_final.size
    if len(coeffs.details) != coeffs.levels:
        raise DataError(
            f"expected {coeffs.levels} detail vectors, got {len(coeffs.details)}"
        )
    for d in coeffs.details:
        if d.size != n:
            raise DataError("coefficient vectors must all share the padded length")

    rec_lo = filters.lowpass[::-1]
    rec_hi = filters.highpass[::-1]
    delay = filters.length - 1

    approx = coeffs.approx_final
    for j in range(coeffs.levels, 0, -1):
        step = 2 ** (j - 1)
        merged = 0.5 * (_circular_convolve(approx, rec_lo, step)
                        + _circular_convolve(coeffs.details[j - 1], rec_hi, step))
        approx = np.roll(merged, -((delay * step) % n))
    return approx[:coeffs.original_length]


def decompose_signal(x: np.ndarray, levels: int = DEFAULT_LEVELS,
                     filters: FilterPair | None = None) -> SwtCoefficients:
    """Pad a raw signal periodically and decompose it in one call."""
    padded, pad = pad_periodic(x, levels)
    return swt_decompose(padded, levels, filters, pad_length=pad)


def cascade_delay(filter_length: int, level: int) -> int:
    """Group delay accumulated by the dilated filter cascade down to ``level``.

    Each convolution with the (near linear-phase) length-L filter delays by
    (L-1)/2 samples times the dilation, so both cA_j and cD_j lag the signal
    by (L-1)(2^j - 1)/2 samples.
    """
    return int(np.floor((filter_length - 1) * (2 ** level - 1) / 2.0 + 0.5))


def coefficient_matrix(coeffs: SwtCoefficients, filters: FilterPair | None = None,
                       align: bool = True) -> np.ndarray:
    """[n_original, levels+1] matrix ordered [cA_J, cD_1, ..., cD_J].

    With ``align`` the per-level group delay is compensated (circularly), so
    row i of every column describes the signal around sample i; pass
    ``align=False`` for the raw cascade output.
    """
    n = coeffs.original_length
    total = coeffs.approx_final.size
    filter_length = (meyer_filters() if filters is None else filters).length

    def take(vec: np.ndarray, level: int) -> np.ndarray:
        if not align:
            return vec[:n]
        return np.roll(vec, -cascade_delay(filter_length, level) % total)[:n]

    cols = [take(coeffs.approx_final, coeffs.levels)]
    cols += [take(d, j) for j, d in enumerate(coeffs.details, start=1)]
    return np.column_stack(cols)


def decompose_frame(frame: TimeSeriesFrame, levels: int = DEFAULT_LEVELS,
                    mode: str = "AD", filters: FilterPair | None = None,
                    cases_column: str = CASES_COLUMN) -> tuple[np.ndarray, list[str]]:
    """Expand frame columns into wavelet feature columns.

    AD gives every column its [cA_J, cD_1..cD_J] block; ADA keeps only the
    approximation for the cases column. Returns the feature matrix and the
    deterministic feature names.
    """
    if mode not in DECOMPOSE_MODES:
        raise DataError(f"unknown decomposition mode {mode!r}; expected one of {DECOMPOSE_MODES}")
    filters = meyer_filters() if filters is None else filters

    blocks: list[np.ndarray] = []
    names: list[str] = []
    for name in frame.columns:
        coeffs = decompose_signal(frame.column(name), levels, filters)
        matrix = coefficient_matrix(coeffs, filters)
        if mode == "ADA" and name == cases_column:
            blocks.append(matrix[:, :1])
            names.append(f"{name}_cA{levels}")
        else:
            blocks.append(matrix)
            names.append(f"{name}_cA{levels}")
            names.extend(f"{name}_cD{j}" for j in range(1, levels + 1))
    return np.hstack(blocks), names
