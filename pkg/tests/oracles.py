"""Independent reference implementations used only to check the package.

These deliberately share no code with fatprog: the rainflow reference works
by repeated whole-list scanning instead of a stack, and the gradient checks
use central finite differences.
"""

import numpy as np


def rainflow_reference(extrema):
    """Four-point rainflow by scan-and-restart over the whole residue list.

    Any quadruple whose inner range is bounded by both neighbouring ranges
    closes the inner pair as a full cycle; the scan restarts from the left
    after every closure. What remains is counted pairwise as half cycles.
    Returns a sorted list of (amplitude, mean, weight) tuples.
    """
    pts = [float(v) for v in extrema]
    full = []
    while True:
        closed = False
        for i in range(len(pts) - 3):
            r_left = abs(pts[i] - pts[i + 1])
            r_inner = abs(pts[i + 1] - pts[i + 2])
            r_right = abs(pts[i + 2] - pts[i + 3])
            if r_inner <= r_left and r_inner <= r_right:
                full.append(
                    (0.5 * r_inner, 0.5 * (pts[i + 1] + pts[i + 2]), 1.0)
                )
                del pts[i + 1 : i + 3]
                closed = True
                break
        if not closed:
            break
    halves = [
        (0.5 * abs(pts[i + 1] - pts[i]), 0.5 * (pts[i + 1] + pts[i]), 0.5)
        for i in range(len(pts) - 1)
    ]
    return sorted(full + halves)


def alternating_sequences(max_len, levels):
    """Every strictly alternating sequence up to max_len over the given values."""
    levels = list(levels)
    out = [[v] for v in levels]
    frontier = [[v] for v in levels]
    for _ in range(max_len - 1):
        nxt = []
        for seq in frontier:
            if len(seq) == 1:
                candidates = [v for v in levels if v != seq[-1]]
            elif seq[-1] > seq[-2]:
                candidates = [v for v in levels if v < seq[-1]]
            else:
                candidates = [v for v in levels if v > seq[-1]]
            for v in candidates:
                nxt.append(seq + [v])
        out.extend(nxt)
        frontier = nxt
    return out


def central_difference_gradient(fun, x0, step=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    for i in range(x0.size):
        hi = x0.copy()
        lo = x0.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (fun(hi) - fun(lo)) / (2.0 * step)
    return grad
