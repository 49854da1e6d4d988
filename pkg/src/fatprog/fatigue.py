"""Ground-truth cumulative damage and failure time.

Rainflow counting (four-point rule, residue as half cycles) decomposes a
stress history into cycles; the linear damage rule with a mean-stress
correction on the allowable amplitude turns the count into a damage
fraction, and failure is declared at damage 1. Failure times beyond the
recorded signal are extrapolated from the stationary damage-accrual rate
and flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, MeanExceedsUts, NoDamage, NonAlternatingSequence
from .signal_gen import Signal


@dataclass(frozen=True)
class MaterialParams:
    """Fatigue strength coefficient A (MPa), exponent b (< 0), ultimate tensile strength (MPa)."""

    A: float
    b: float
    sigma_uts: float

    def __post_init__(self):
        if self.A <= 0:
            raise ConfigError("A must be positive")
        if self.b >= 0:
            raise ConfigError("b must be negative")
        if self.sigma_uts <= 0:
            raise ConfigError("sigma_uts must be positive")


@dataclass(frozen=True)
class CountedCycle:
    amplitude: float  # MPa, half of the peak-valley range
    mean: float  # MPa
    weight: float  # 1.0 full cycle, 0.5 half cycle


@dataclass(frozen=True)
class DamageState:
    D: float  # cumulative damage fraction
    t: float  # seconds of signal consumed


@dataclass(frozen=True)
class FailureTime:
    tau: float  # seconds
    extrapolated: bool  # True when damage 1 lies beyond the recorded signal
    damage_end: DamageState  # damage state at the end of the signal


def turning_points(samples, eps: float = 0.0):
    """Reduce a sample array to its strictly alternating turning points.

    Reversals of size <= eps are treated as noise and merged away. The first
    sample and the trailing unconfirmed extremum are included, so a monotone
    ramp reduces to its two endpoints. Returns (values, indices).
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.size == 0:
        return np.empty(0), np.empty(0, dtype=np.int64)
    state = _kernels.new_state(eps)
    out_idx = np.empty(x.size, dtype=np.float64)
    out_raw = np.empty(x.size, dtype=np.float64)
    out_shift = np.empty(x.size, dtype=np.float64)
    out_kind = np.empty(x.size, dtype=np.int64)
    m = _kernels.stream_scan(x, 1.0, state, out_idx, out_raw, out_shift, out_kind)
    values = [x[0]]
    indices = [0]
    values.extend(out_raw[:m])
    indices.extend(out_idx[:m].astype(np.int64))
    cand_idx = int(state[_kernels.S_CAND_IDX])
    if cand_idx != 0:
        values.append(state[_kernels.S_CAND_VAL])
        indices.append(cand_idx)
    return np.asarray(values), np.asarray(indices, dtype=np.int64)


def _check_alternating(ext: np.ndarray) -> None:
    d = np.diff(ext)
    if np.any(d == 0) or np.any(d[1:] * d[:-1] >= 0):
        raise NonAlternatingSequence("extrema sequence must strictly alternate")


def rainflow_count(extrema) -> list[CountedCycle]:
    """Four-point rainflow count of an alternating extrema sequence.

    Returns full cycles (weight 1.0) closed by the four-point rule plus the
    residue counted pairwise as half cycles (weight 0.5); amplitude is half
    the range, mean the midpoint. Fewer than 2 extrema count as nothing.
    """
    ext = np.ascontiguousarray(extrema, dtype=np.float64)
    if ext.size < 2:
        return []
    _check_alternating(ext)
    out_amp = np.empty(ext.size, dtype=np.float64)
    out_mean = np.empty(ext.size, dtype=np.float64)
    out_w = np.empty(ext.size, dtype=np.float64)
    m = _kernels.rainflow_fourpoint(ext, out_amp, out_mean, out_w)
    return [
        CountedCycle(float(out_amp[i]), float(out_mean[i]), float(out_w[i])) for i in range(m)
    ]


def goodman_factor(x_m: float, mat: MaterialParams) -> float:
    """Mean-stress correction 1 - x_m/sigma_uts on the allowable amplitude."""
    if x_m >= mat.sigma_uts:
        raise MeanExceedsUts(f"mean stress {x_m} >= sigma_uts {mat.sigma_uts}")
    return 1.0 - x_m / mat.sigma_uts


def cycles_to_failure(s_a: float, x_m: float, mat: MaterialParams) -> float:
    """Cycles to failure at stress amplitude s_a under mean stress x_m.

    Power law (s_a / (A*alpha_bar))**(1/b) with b < 0; a zero amplitude
    never fails and returns +inf.
    """
    if s_a < 0:
        raise ConfigError("amplitude must be non-negative")
    alpha_bar = goodman_factor(x_m, mat)
    if s_a == 0.0:
        return float("inf")
    return float((s_a / (mat.A * alpha_bar)) ** (1.0 / mat.b))


def cumulative_damage(cycles, mat: MaterialParams, x_m: float) -> float:
    """Linear damage sum of weighted counted cycles.

    The mean-stress correction uses the signal-level x_m; per-cycle means in
    the cycle records are informational only.
    """
    if len(cycles) == 0:
        return 0.0
    alpha_bar = goodman_factor(x_m, mat)
    amps = np.array([c.amplitude for c in cycles])
    weights = np.array([c.weight for c in cycles])
    per_cycle = (amps / (mat.A * alpha_bar)) ** (-1.0 / mat.b)
    return float(np.sum(weights * per_cycle))


EXCURSION_FILTER_FRACTION = 1e-9  # of sigma_uts; drops synthesis/spline micro-extrema


def failure_time(signal: Signal, mat: MaterialParams, x_m: float) -> FailureTime:
    """Time at which cumulative damage first reaches 1.

    Damage is re-evaluated at every turning point (counting the open residue
    as half cycles), so the crossing is located to within one half period.
    When the full signal accumulates D < 1 the failure time is extrapolated
    as T/D(T), valid for stationary loading, and flagged.
    """
    eps = EXCURSION_FILTER_FRACTION * mat.sigma_uts
    values, indices = turning_points(signal.samples, eps)
    duration = signal.duration
    if values.size < 2:
        raise NoDamage("signal has fewer than 2 turning points")
    alpha_bar = goodman_factor(x_m, mat)
    scale = 1.0 / (mat.A * alpha_bar)
    expo = -1.0 / mat.b
    cross, d_total = _kernels.damage_prefix_scan(values, scale, expo, 1.0)
    if d_total <= 0.0:
        raise NoDamage("signal accumulates zero damage")
    if cross >= 0:
        tau = float(indices[cross]) / signal.sample_rate
        return FailureTime(tau=tau, extrapolated=False, damage_end=DamageState(d_total, duration))
    tau = duration / d_total
    return FailureTime(tau=tau, extrapolated=True, damage_end=DamageState(d_total, duration))


def write_cycles_csv(path, cycles) -> None:
    """CSV export `amplitude,mean,weight` for cross-checks against external tools."""
    with open(path, "w") as fh:
        fh.write("amplitude,mean,weight\n")
        for c in cycles:
            fh.write(f"{c.amplitude!r},{c.mean!r},{c.weight!r}\n")
