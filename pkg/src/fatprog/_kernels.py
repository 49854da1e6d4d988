"""Sequential hot loops: turning-point scans and rainflow counting.

These are the only parts of the package that iterate sample-by-sample in
Python, so they carry numba ``@njit`` compilation by default. Setting the
environment variable ``FATPROG_DISABLE_NUMBA=1`` (before import) selects the
uncompiled fallback path instead; both paths execute the identical statement
sequence, so results are bit-for-bit equal. ``benchmarks/bench_kernels.py``
compares the two.
"""

import os

import numpy as np

_DISABLE = os.environ.get("FATPROG_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# stream_scan state vector layout
S_N = 0  # samples consumed
S_INTEGRAL = 1  # trapezoidal integral of x dt over [0, t]
S_PREV = 2  # last sample value
S_DIR = 3  # current slope sign: 0 unknown, +1 rising, -1 falling
S_CAND_VAL = 4  # candidate extremum value
S_CAND_IDX = 5  # candidate extremum sample index
S_CAND_XBAR = 6  # running mean at the candidate's sample
S_EPS = 7  # hysteresis threshold: reversals <= eps are ignored
STATE_SIZE = 8


def new_state(eps: float = 0.0) -> np.ndarray:
    state = np.zeros(STATE_SIZE, dtype=np.float64)
    state[S_EPS] = float(eps)
    return state


def _stream_scan(samples, dt, state, out_idx, out_raw, out_shift, out_kind):
    """Consume a block of samples, updating running statistics in `state`.

    Emits each confirmed interior extremum: its sample index, raw value, value
    shifted by the running mean at the extremum's own sample, and kind
    (+1 peak / -1 valley). A reversal must exceed `eps` to confirm the
    pending candidate; the candidate itself is not emitted until then.
    Returns the number of extrema written to the output arrays.
    """
    n = int(state[S_N])
    integral = state[S_INTEGRAL]
    prev = state[S_PREV]
    direction = int(state[S_DIR])
    cand_val = state[S_CAND_VAL]
    cand_idx = int(state[S_CAND_IDX])
    cand_xbar = state[S_CAND_XBAR]
    eps = state[S_EPS]
    m = 0
    for j in range(samples.shape[0]):
        s = samples[j]
        if n == 0:
            prev = s
            cand_val = s
            cand_idx = 0
            cand_xbar = s
            n = 1
            continue
        integral += 0.5 * (prev + s) * dt
        xbar = integral / (n * dt)
        if direction == 0:
            if s - cand_val > eps:
                direction = 1
                cand_val = s
                cand_idx = n
                cand_xbar = xbar
            elif cand_val - s > eps:
                direction = -1
                cand_val = s
                cand_idx = n
                cand_xbar = xbar
        elif direction == 1:
            if s >= cand_val:
                cand_val = s
                cand_idx = n
                cand_xbar = xbar
            elif cand_val - s > eps:
                out_idx[m] = cand_idx
                out_raw[m] = cand_val
                out_shift[m] = cand_val - cand_xbar
                out_kind[m] = 1
                m += 1
                direction = -1
                cand_val = s
                cand_idx = n
                cand_xbar = xbar
        else:
            if s <= cand_val:
                cand_val = s
                cand_idx = n
                cand_xbar = xbar
            elif s - cand_val > eps:
                out_idx[m] = cand_idx
                out_raw[m] = cand_val
                out_shift[m] = cand_val - cand_xbar
                out_kind[m] = -1
                m += 1
                direction = 1
                cand_val = s
                cand_idx = n
                cand_xbar = xbar
        prev = s
        n += 1
    state[S_N] = n
    state[S_INTEGRAL] = integral
    state[S_PREV] = prev
    state[S_DIR] = direction
    state[S_CAND_VAL] = cand_val
    state[S_CAND_IDX] = cand_idx
    state[S_CAND_XBAR] = cand_xbar
    return m


def _rainflow_fourpoint(ext, out_amp, out_mean, out_weight):
    """Four-point rainflow count of a strictly alternating extrema sequence.

    Full cycles (weight 1.0) close whenever the inner range of the last four
    stack points is bounded by both neighbours; the unclosed residue is
    counted pairwise as half cycles (weight 0.5). Output arrays must hold at
    least len(ext) entries. Returns the number of counted cycles.
    """
    n = ext.shape[0]
    stack = np.empty(n, dtype=np.float64)
    top = -1
    m = 0
    for k in range(n):
        top += 1
        stack[top] = ext[k]
        while top >= 3:
            r_left = abs(stack[top - 2] - stack[top - 3])
            r_inner = abs(stack[top - 1] - stack[top - 2])
            r_right = abs(stack[top] - stack[top - 1])
            if r_inner <= r_left and r_inner <= r_right:
                out_amp[m] = 0.5 * r_inner
                out_mean[m] = 0.5 * (stack[top - 1] + stack[top - 2])
                out_weight[m] = 1.0
                m += 1
                stack[top - 2] = stack[top]
                top -= 2
            else:
                break
    for k in range(top):
        out_amp[m] = 0.5 * abs(stack[k + 1] - stack[k])
        out_mean[m] = 0.5 * (stack[k + 1] + stack[k])
        out_weight[m] = 0.5
        m += 1
    return m


def _damage_prefix_scan(ext, scale, expo, target):
    """Incremental rainflow damage over an extrema sequence.

    Damage of a full cycle with range R is (0.5*R*scale)**expo, i.e. the
    reciprocal of the cycles-to-failure power law; half cycles count half.
    Tracks closed-cycle damage plus the residue-as-halves damage of the
    current stack after every extremum, and returns (k, total) where k is
    the first extremum index at which the running total reaches `target`
    (-1 if never) and total is the exact damage of the whole sequence.
    """
    n = ext.shape[0]
    stack = np.empty(n, dtype=np.float64)
    top = -1
    d_closed = 0.0
    d_res = 0.0
    cross = -1
    for k in range(n):
        top += 1
        stack[top] = ext[k]
        if top >= 1:
            r_new = abs(stack[top] - stack[top - 1])
            d_res += 0.5 * (0.5 * r_new * scale) ** expo
        while top >= 3:
            r_left = abs(stack[top - 2] - stack[top - 3])
            r_inner = abs(stack[top - 1] - stack[top - 2])
            r_right = abs(stack[top] - stack[top - 1])
            if r_inner <= r_left and r_inner <= r_right:
                d_left = (0.5 * r_left * scale) ** expo
                d_inner = (0.5 * r_inner * scale) ** expo
                d_right = (0.5 * r_right * scale) ** expo
                stack[top - 2] = stack[top]
                top -= 2
                r_merged = abs(stack[top] - stack[top - 1])
                d_merged = (0.5 * r_merged * scale) ** expo
                d_closed += d_inner
                d_res += 0.5 * (d_merged - d_left - d_inner - d_right)
            else:
                break
        if cross < 0 and d_closed + d_res >= target:
            # incremental d_res can drift; re-sum the residue before confirming
            d_exact = 0.0
            for j in range(top):
                rr = abs(stack[j + 1] - stack[j])
                d_exact += 0.5 * (0.5 * rr * scale) ** expo
            d_res = d_exact
            if d_closed + d_res >= target:
                cross = k
    d_exact = 0.0
    for j in range(top):
        rr = abs(stack[j + 1] - stack[j])
        d_exact += 0.5 * (0.5 * rr * scale) ** expo
    return cross, d_closed + d_exact


# Uncompiled references are kept for the benchmark and the backend
# equivalence tests.
stream_scan_py = _stream_scan
rainflow_fourpoint_py = _rainflow_fourpoint
damage_prefix_scan_py = _damage_prefix_scan

if NUMBA_ENABLED:
    stream_scan = njit(cache=True)(_stream_scan)
    rainflow_fourpoint = njit(cache=True)(_rainflow_fourpoint)
    damage_prefix_scan = njit(cache=True)(_damage_prefix_scan)
else:
    stream_scan = _stream_scan
    rainflow_fourpoint = _rainflow_fourpoint
    damage_prefix_scan = _damage_prefix_scan
