"""Streaming signal statistics and model input features.

A StreamState consumes samples causally and maintains the running mean (by
trapezoidal integration), plus the multiset of local extrema of the
mean-shifted signal, each extremum shifted by the running mean at its own
sample. From these the percentile amplitude and the feature vector are
evaluated at any prediction instant. Spectral moments come from a Welch
estimate of the measured prefix and feed the extended feature vector when
signals from multiple spectral families are mixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import welch as _scipy_welch
from scipy.special import ndtr

from . import _kernels
from .errors import (
    ConfigError,
    DegenerateSpectrum,
    EmptyExtrema,
    RhoOutOfRange,
    TooShort,
)
from .fatigue import MaterialParams
from .signal_gen import Signal, Table1Ranges


class StreamState:
    """Incrementally maintained running statistics of a measured signal."""

    def __init__(self, sample_rate: float, eps: float = 0.0):
        if sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        self.sample_rate = float(sample_rate)
        self.dt = 1.0 / self.sample_rate
        self._state = _kernels.new_state(eps)
        self._chunks_shift = []
        self._chunks_idx = []
        self._chunks_kind = []
        self._cat_shift = None

    # --- feeding ---

    def extend(self, samples) -> "StreamState":
        """Consume a block of samples; arithmetic is identical to one-at-a-time feeding."""
        x = np.ascontiguousarray(samples, dtype=np.float64)
        if x.size == 0:
            return self
        out_idx = np.empty(x.size, dtype=np.float64)
        out_raw = np.empty(x.size, dtype=np.float64)
        out_shift = np.empty(x.size, dtype=np.float64)
        out_kind = np.empty(x.size, dtype=np.int64)
        m = _kernels.stream_scan(x, self.dt, self._state, out_idx, out_raw, out_shift, out_kind)
        if m:
            self._chunks_shift.append(out_shift[:m].copy())
            self._chunks_idx.append(out_idx[:m].astype(np.int64))
            self._chunks_kind.append(out_kind[:m].copy())
            self._cat_shift = None
        return self

    def update(self, sample: float) -> "StreamState":
        return self.extend(np.array([sample], dtype=np.float64))

    # --- state ---

    @property
    def n_samples(self) -> int:
        return int(self._state[_kernels.S_N])

    @property
    def t(self) -> float:
        """Seconds elapsed: (n-1)*dt for n samples starting at t = 0."""
        n = self.n_samples
        return 0.0 if n == 0 else (n - 1) * self.dt

    @property
    def x_bar(self) -> float:
        """Running time-average of the signal; equals the sample value while t = 0."""
        n = self.n_samples
        if n == 0:
            raise ConfigError("stream is empty")
        if n == 1:
            return float(self._state[_kernels.S_PREV])
        return float(self._state[_kernels.S_INTEGRAL] / self.t)

    @property
    def n_extrema(self) -> int:
        return sum(len(c) for c in self._chunks_shift)

    def extrema_shifted(self) -> np.ndarray:
        """The multiset of local extrema of x - x_bar, in detection order."""
        if self._cat_shift is None:
            if self._chunks_shift:
                self._cat_shift = np.concatenate(self._chunks_shift)
            else:
                self._cat_shift = np.empty(0)
        return self._cat_shift

    def extrema_kinds(self) -> np.ndarray:
        if self._chunks_kind:
            return np.concatenate(self._chunks_kind)
        return np.empty(0, dtype=np.int64)

    def extrema_times(self) -> np.ndarray:
        if self._chunks_idx:
            return np.concatenate(self._chunks_idx) * self.dt
        return np.empty(0)


def update_stream(state: StreamState, sample: float) -> StreamState:
    """Advance the stream by one sample (time step 1/sample_rate)."""
    return state.update(sample)


# --- spectral summary ---


@dataclass(frozen=True)
class WelchConfig:
    n_segments: int = 8
    overlap: float = 0.5
    window: str = "hann"
    detrend: str = "constant"
    min_nperseg: int = 16


@dataclass(frozen=True)
class SpectralSummary:
    m0: float
    m1: float
    m2: float
    m4: float
    gamma_bar: float  # m2 / sqrt(m0*m4); near 1 narrow-band, near 0 broad-band


def welch_moments(signal_prefix: Signal, config: WelchConfig = WelchConfig()) -> SpectralSummary:
    """Spectral moments m0, m1, m2, m4 of the Welch PSD estimate.

    The prefix is split into `n_segments` overlapping windowed segments whose
    periodograms are averaged; moments are trapezoidal integrals f**i * G(f)
    over the one-sided spectrum.
    """
    x = signal_prefix.samples
    nperseg = max(config.min_nperseg, (2 * x.size) // (config.n_segments + 1))
    if x.size < 2 * config.min_nperseg:
        raise TooShort(f"need at least {2 * config.min_nperseg} samples for a Welch estimate")
    nperseg = min(nperseg, x.size)
    freqs, psd = _scipy_welch(
        x,
        fs=signal_prefix.sample_rate,
        window=config.window,
        nperseg=nperseg,
        noverlap=int(config.overlap * nperseg),
        detrend=config.detrend,
    )
    m0 = float(np.trapezoid(psd, freqs))
    m1 = float(np.trapezoid(freqs * psd, freqs))
    m2 = float(np.trapezoid(freqs**2 * psd, freqs))
    m4 = float(np.trapezoid(freqs**4 * psd, freqs))
    if m0 <= 0.0 or m4 <= 0.0:
        raise DegenerateSpectrum("zero spectral mass: irregularity factor undefined")
    return SpectralSummary(m0=m0, m1=m1, m2=m2, m4=m4, gamma_bar=m2 / np.sqrt(m0 * m4))


# --- percentile amplitudes ---


def extrema_coverage(extrema, xi: float) -> float:
    """Fraction of extrema with |value| <= xi (the discrete coverage function)."""
    values = np.abs(np.asarray(extrema, dtype=float))
    if values.size == 0:
        raise EmptyExtrema("no extrema accumulated")
    return float(np.count_nonzero(values <= xi)) / values.size


def percentile_amplitude(extrema, rho: float) -> float:
    """Smallest amplitude among |extrema| covering at least fraction rho of them."""
    if not 0.0 <= rho <= 1.0:
        raise RhoOutOfRange(f"rho must be in [0, 1], got {rho}")
    values = np.abs(np.asarray(extrema, dtype=float))
    if values.size == 0:
        raise EmptyExtrema("no extrema accumulated")
    n = values.size
    # smallest m with m/n >= rho; the epsilon guards against 0.9*n landing at n*0.9+ulp
    m = int(np.ceil(rho * n - 1e-9))
    m = min(max(m, 1), n)
    return float(np.partition(values, m - 1)[m - 1])


def theoretical_percentile(rho: float, mu_t: float, sigma_t: float, band: str) -> float:
    """Percentile amplitude implied by the band-limited extrema distributions.

    band="NB": Rayleigh magnitudes, closed form sigma_t*sqrt(ln((1-rho)^-2)).
    band="BB": symmetric two-sided Gaussian magnitudes; the coverage
    Phi((xi+mu)/sigma) + Phi((xi-mu)/sigma) - 1 = rho is inverted by
    bisection to 1e-10 relative.
    """
    if not 0.0 <= rho < 1.0:
        raise RhoOutOfRange(f"rho must be in [0, 1), got {rho}")
    if sigma_t <= 0:
        raise ConfigError("sigma_t must be positive")
    if band == "NB":
        return float(sigma_t * np.sqrt(-2.0 * np.log1p(-rho)))
    if band != "BB":
        raise ConfigError(f"band must be 'NB' or 'BB', got {band!r}")
    if rho == 0.0:
        return 0.0

    def coverage(xi):
        return ndtr((xi + mu_t) / sigma_t) + ndtr((xi - mu_t) / sigma_t) - 1.0

    lo = 0.0
    hi = abs(mu_t) + 10.0 * sigma_t
    while coverage(hi) < rho:
        hi *= 2.0
    while hi - lo > 1e-10 * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if coverage(mid) < rho:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def local_maxima_stats(shifted: np.ndarray, kinds: np.ndarray):
    """Mean and standard deviation of the local-maxima subset of the extrema."""
    maxima = shifted[kinds == 1]
    if maxima.size == 0:
        raise EmptyExtrema("no local maxima accumulated")
    return float(np.mean(maxima)), float(np.std(maxima))


# --- feature vector assembly ---


@dataclass(frozen=True)
class FeatureVector:
    t: float
    A: float
    b: float
    sigma_uts: float
    x_bar: float
    xi: float
    m0: float | None = None
    m1: float | None = None
    m2: float | None = None
    m4: float | None = None

    @property
    def extended(self) -> bool:
        return self.m0 is not None

    def as_array(self) -> np.ndarray:
        base = [self.A, self.b, self.sigma_uts, self.x_bar, self.xi]
        if self.extended:
            base.extend([self.m0, self.m1, self.m2, self.m4])
        return np.asarray(base, dtype=float)


BASE_FEATURE_NAMES = ("A", "b", "sigma_uts", "x_bar", "xi")
MOMENT_FEATURE_NAMES = ("m0", "m1", "m2", "m4")


@dataclass(frozen=True)
class FeatureRanges:
    """Nominal feature ranges whose widths scale the additive measurement noise."""

    widths: tuple  # (A, b, sigma_uts, x_bar, xi)
    moment_widths: tuple = (0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_table1(cls, ranges: Table1Ranges) -> "FeatureRanges":
        # xi has no dedicated row; its reachable span is bounded by the
        # largest envelope k_s*sigma_uts
        xi_width = ranges.k_s[1] * ranges.sigma_uts[1]
        return cls(
            widths=(
                ranges.A[1] - ranges.A[0],
                ranges.b[1] - ranges.b[0],
                ranges.sigma_uts[1] - ranges.sigma_uts[0],
                ranges.x_m[1] - ranges.x_m[0],
                xi_width,
            )
        )


DEFAULT_FEATURE_RANGES = FeatureRanges.from_table1(Table1Ranges())


def build_features(
    state: StreamState,
    mat: MaterialParams,
    rho: float = 0.9,
    extended: bool = False,
    spectral: SpectralSummary | None = None,
    noise_frac: float = 0.0,
    rng: np.random.Generator | None = None,
    ranges: FeatureRanges = DEFAULT_FEATURE_RANGES,
) -> FeatureVector:
    """Assemble the model input vector at the stream's current instant.

    With noise_frac > 0 every feature receives independent zero-mean Gaussian
    noise of standard deviation noise_frac times its nominal range width
    (one draw per emitted vector).
    """
    if extended and spectral is None:
        raise ConfigError("extended feature vector requires a spectral summary")
    xi = percentile_amplitude(state.extrema_shifted(), rho)
    values = np.array([mat.A, mat.b, mat.sigma_uts, state.x_bar, xi], dtype=float)
    if extended:
        moments = np.array([spectral.m0, spectral.m1, spectral.m2, spectral.m4], dtype=float)
    if noise_frac > 0.0:
        if rng is None:
            raise ConfigError("noise_frac > 0 requires an rng")
        values = values + rng.normal(size=5) * (noise_frac * np.asarray(ranges.widths))
        if extended:
            moments = moments + rng.normal(size=4) * (
                noise_frac * np.asarray(ranges.moment_widths)
            )
    kwargs = {}
    if extended:
        kwargs = dict(m0=moments[0], m1=moments[1], m2=moments[2], m4=moments[3])
    return FeatureVector(
        t=state.t,
        A=values[0],
        b=values[1],
        sigma_uts=values[2],
        x_bar=values[3],
        xi=values[4],
        **kwargs,
    )


def write_features_csv(path, rows: list[FeatureVector]) -> None:
    """CSV trajectory export t,A,b,sigma_uts,x_bar,xi[,m0,m1,m2,m4]."""
    extended = bool(rows) and rows[0].extended
    names = ("t",) + BASE_FEATURE_NAMES + (MOMENT_FEATURE_NAMES if extended else ())
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for fv in rows:
            cells = [fv.t, fv.A, fv.b, fv.sigma_uts, fv.x_bar, fv.xi]
            if extended:
                cells.extend([fv.m0, fv.m1, fv.m2, fv.m4])
            fh.write(",".join(repr(float(c)) for c in cells) + "\n")
