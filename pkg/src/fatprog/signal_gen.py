"""Stochastic stress-signal synthesis and peak-valley ingestion.

Synthetic signals are bounded Fourier sums: a normalized carrier (peak
absolute value exactly 1 over the realized samples) is scaled to the
envelope ``k_s*sigma_uts - |x_m|`` around the true mean ``x_m``, with
component amplitudes drawn from a Gaussian-shaped spectral density.
External peak-valley load histories are re-timed at the nominal half-period
of their highest frequency and reconstructed with a natural cubic spline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    ConfigError,
    EmptyRecipe,
    NonAlternatingSequence,
    NyquistViolation,
    TooShort,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PsdSpec:
    """Gaussian-shaped one-sided spectral density, location mu_g / width sigma_g in Hz."""

    mu_g: float
    sigma_g: float

    def __post_init__(self):
        if self.sigma_g <= 0:
            raise ConfigError("sigma_g must be positive")
        if self.mu_g < 0:
            raise ConfigError("mu_g must be non-negative")


def gaussian_psd_value(f, spec: PsdSpec):
    """Spectral density at frequency f (Hz); carries no magnitude factor.

    Signal intensity is set entirely by the scaling factor of the recipe, so
    the density is the plain Gaussian bump 1/(sqrt(2 pi) sigma) * exp(...).
    Accepts scalars or arrays.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ConfigError("frequencies must be non-negative")
    z = (f - spec.mu_g) / spec.sigma_g
    out = np.exp(-0.5 * z * z) / (np.sqrt(2.0 * np.pi) * spec.sigma_g)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SignalRecipe:
    """Everything needed to regenerate one synthetic stress signal bit-exactly."""

    psd: PsdSpec
    n_components: int
    frequencies: np.ndarray
    phases: np.ndarray
    x_m: float  # true signal mean, MPa
    k_s: float  # dimensionless intensity scale
    sigma_uts: float  # MPa
    duration: float  # seconds
    sample_rate: float  # Hz
    rng_seed: int

    def __post_init__(self):
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=float))
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float))
        if len(self.frequencies) != self.n_components or len(self.phases) != self.n_components:
            raise ConfigError("frequencies/phases length must equal n_components")
        if self.k_s <= 0:
            raise ConfigError("k_s must be positive")
        if self.envelope <= 0:
            raise ConfigError("envelope k_s*sigma_uts - |x_m| must be positive")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ConfigError("duration and sample_rate must be positive")

    @property
    def envelope(self) -> float:
        return self.k_s * self.sigma_uts - abs(self.x_m)

    def with_duration(self, duration: float) -> "SignalRecipe":
        return SignalRecipe(
            psd=self.psd,
            n_components=self.n_components,
            frequencies=self.frequencies,
            phases=self.phases,
            x_m=self.x_m,
            k_s=self.k_s,
            sigma_uts=self.sigma_uts,
            duration=duration,
            sample_rate=self.sample_rate,
            rng_seed=self.rng_seed,
        )

    def to_dict(self) -> dict:
        return {
            "schema": "recipe/1",
            "mu_g": self.psd.mu_g,
            "sigma_g": self.psd.sigma_g,
            "n_components": self.n_components,
            "frequencies": self.frequencies.tolist(),
            "phases": self.phases.tolist(),
            "x_m": self.x_m,
            "k_s": self.k_s,
            "sigma_uts": self.sigma_uts,
            "duration": self.duration,
            "sample_rate": self.sample_rate,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalRecipe":
        if d.get("schema") != "recipe/1":
            raise ConfigError(f"unsupported recipe schema: {d.get('schema')!r}")
        return cls(
            psd=PsdSpec(d["mu_g"], d["sigma_g"]),
            n_components=int(d["n_components"]),
            frequencies=np.array(d["frequencies"], dtype=float),
            phases=np.array(d["phases"], dtype=float),
            x_m=float(d["x_m"]),
            k_s=float(d["k_s"]),
            sigma_uts=float(d["sigma_uts"]),
            duration=float(d["duration"]),
            sample_rate=float(d["sample_rate"]),
            rng_seed=int(d["rng_seed"]),
        )


@dataclass
class Signal:
    """Uniformly sampled stress time series starting at t = 0."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.size == 0:
            raise ConfigError("signal must be non-empty")
        if not np.all(np.isfinite(self.samples)):
            raise ConfigError("signal contains non-finite values")

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate


def synthesize_signal(recipe: SignalRecipe) -> Signal:
    """Render the recipe into samples over [0, duration].

    The Fourier sum is divided by its own maximum absolute sample, so the
    carrier touches +/-1 at one sample exactly and every sample respects the
    envelope bound around x_m.
    """
    if recipe.n_components == 0:
        raise EmptyRecipe("recipe has zero Fourier components")
    f_max = float(np.max(recipe.frequencies))
    if recipe.sample_rate <= 2.0 * f_max:
        raise NyquistViolation(
            f"sample_rate {recipe.sample_rate} Hz must exceed 2*max frequency {2 * f_max} Hz"
        )
    n = int(round(recipe.duration * recipe.sample_rate)) + 1
    t = np.arange(n) / recipe.sample_rate

    # component weights sqrt(2 G(f) df); df is the mean spacing of the sorted
    # frequencies (a common scalar, so it cancels in the normalization below)
    if recipe.n_components > 1:
        df = float(np.mean(np.diff(np.sort(recipe.frequencies))))
        if df <= 0:
            df = 1.0
    else:
        df = 1.0
    amps = np.sqrt(2.0 * gaussian_psd_value(recipe.frequencies, recipe.psd) * df)
    amps = np.atleast_1d(amps)

    raw = np.zeros(n)
    for a, f, phi in zip(amps, recipe.frequencies, recipe.phases):
        raw += a * np.cos(TWO_PI * f * t + phi)
    peak = np.max(np.abs(raw))
    if peak == 0.0:
        raise EmptyRecipe("degenerate recipe: carrier is identically zero")
    chi = raw / peak
    samples = recipe.x_m + recipe.envelope * chi
    return Signal(samples=samples, sample_rate=recipe.sample_rate)


@dataclass(frozen=True)
class Table1Ranges:
    """Uniform sampling ranges for material and loading parameters."""

    A: tuple = (1200.0, 1500.0)  # fatigue strength coefficient, MPa
    b: tuple = (-0.2, -0.15)  # fatigue strength exponent
    sigma_uts: tuple = (500.0, 1000.0)  # MPa
    x_m: tuple = (0.0, 250.0)  # MPa
    k_s: tuple = (0.05, 0.85)
    f: tuple = (0.0, 1000.0)  # Hz, open at 0
    phi: tuple = (0.0, TWO_PI)

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in ("A", "b", "sigma_uts", "x_m", "k_s", "f", "phi")}

    @classmethod
    def from_dict(cls, d: dict) -> "Table1Ranges":
        kwargs = {k: tuple(v) for k, v in d.items()}
        return cls(**kwargs)


# Material parameters travel with the recipe draw; they live in the fatigue
# module but the sampler produces them, so import lazily to avoid a cycle.


def sample_recipe(
    ranges: Table1Ranges,
    rng_seed: int,
    n_components: int = 20,
    duration: float = 30.0,
    sample_rate: float = 4000.0,
    psd: PsdSpec | None = None,
    max_tries: int = 1000,
):
    """Draw one (SignalRecipe, MaterialParams) pair i.i.d. from the ranges.

    The triple (x_m, k_s, sigma_uts) is redrawn together until the signal
    envelope k_s*sigma_uts - |x_m| is positive, which keeps the accepted
    marginals uniform inside the feasible region.
    """
    from .fatigue import MaterialParams

    rng = np.random.default_rng(rng_seed)
    if psd is None:
        psd = PsdSpec(mu_g=150.0, sigma_g=500.0)
    a_coef = rng.uniform(*ranges.A)
    b_exp = rng.uniform(*ranges.b)
    for _ in range(max_tries):
        sigma_uts = rng.uniform(*ranges.sigma_uts)
        x_m = rng.uniform(*ranges.x_m)
        k_s = rng.uniform(*ranges.k_s)
        if k_s * sigma_uts - abs(x_m) > 0:
            break
    else:
        raise ConfigError("could not draw a positive-envelope (x_m, k_s, sigma_uts) triple")
    lo, hi = ranges.f
    freqs = lo + (hi - lo) * (1.0 - rng.random(n_components))  # open at lo, closed at hi
    phases = rng.uniform(*ranges.phi, size=n_components)
    recipe = SignalRecipe(
        psd=psd,
        n_components=n_components,
        frequencies=freqs,
        phases=phases,
        x_m=float(x_m),
        k_s=float(k_s),
        sigma_uts=float(sigma_uts),
        duration=duration,
        sample_rate=sample_rate,
        rng_seed=int(rng_seed),
    )
    material = MaterialParams(A=float(a_coef), b=float(b_exp), sigma_uts=float(sigma_uts))
    return recipe, material


def import_peak_valley(
    extrema_sequence,
    f_max: float,
    oversample: float = 10.0,
    k_t: float = 1.0,
) -> Signal:
    """Rebuild a sampled stress signal from a peak-valley list.

    Knots sit at the nominal half period 1/(2 f_max); a natural cubic spline
    interpolates between them and the result is scaled by the stress
    concentration factor k_t. The continuous spline passes through every
    input extremum; with an even oversample factor the knots coincide with
    sample instants.
    """
    seq = np.asarray(extrema_sequence, dtype=float)
    if seq.size < 3:
        raise TooShort("need at least 3 extrema to reconstruct a signal")
    if f_max <= 0:
        raise ConfigError("f_max must be positive")
    if oversample < 2:
        raise ConfigError("oversample must be >= 2")
    if k_t < 1:
        raise ConfigError("k_t must be >= 1")
    d = np.diff(seq)
    if np.any(d == 0) or np.any(d[1:] * d[:-1] >= 0):
        raise NonAlternatingSequence("peak-valley sequence must strictly alternate")

    knot_t = np.arange(seq.size) / (2.0 * f_max)
    spline = CubicSpline(knot_t, seq, bc_type="natural")
    fs = oversample * f_max
    n = int(np.floor(knot_t[-1] * fs + 1e-9)) + 1
    t = np.arange(n) / fs
    samples = k_t * spline(t)
    return Signal(samples=samples, sample_rate=fs)


# --- on-disk formats ---


def write_signal_csv(path, signal: Signal) -> None:
    """CSV with header t,x: seconds and MPa, one row per sample."""
    data = np.column_stack([signal.times(), signal.samples])
    np.savetxt(path, data, delimiter=",", fmt="%.17g", header="t,x", comments="")


def read_signal_csv(path) -> Signal:
    with open(path) as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != "t,x":
            raise ConfigError(f"expected 't,x' header in {path}, got {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    t, x = data[:, 0], data[:, 1]
    if len(t) < 2:
        raise TooShort("signal file needs at least 2 rows")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-12):
        raise ConfigError("signal file must be uniformly sampled")
    return Signal(samples=x, sample_rate=1.0 / float(dt[0]))


def read_peak_valley_file(path, scale: float = 1.0) -> np.ndarray:
    """One extremum per line, plain text, MPa after applying `scale`."""
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            values.append(float(line))
    return np.asarray(values, dtype=float) * scale


def write_recipe_json(path, recipe: SignalRecipe) -> None:
    with open(path, "w") as fh:
        json.dump(recipe.to_dict(), fh, indent=2, sort_keys=True)


def read_recipe_json(path) -> SignalRecipe:
    with open(path) as fh:
        return SignalRecipe.from_dict(json.load(fh))
