"""Backend equivalence: the numba-compiled kernels must match the pure loops bit for bit."""

import numpy as np
import pytest

from fatprog import _kernels


def _random_signal(n=20_000, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / 2000.0
    x = np.zeros(n)
    for f, phi, a in zip(rng.uniform(1, 400, 10), rng.uniform(0, 6.28, 10), rng.uniform(0.1, 1, 10)):
        x += a * np.cos(2 * np.pi * f * t + phi)
    return x


def _run_stream(fn, x, dt, eps, block):
    state = _kernels.new_state(eps)
    idx, raw, shift, kind = [], [], [], []
    for start in range(0, x.size, block):
        chunk = x[start : start + block]
        oi = np.empty(chunk.size)
        orw = np.empty(chunk.size)
        osh = np.empty(chunk.size)
        okd = np.empty(chunk.size, np.int64)
        m = fn(chunk, dt, state, oi, orw, osh, okd)
        idx.append(oi[:m].copy())
        raw.append(orw[:m].copy())
        shift.append(osh[:m].copy())
        kind.append(okd[:m].copy())
    return state, [np.concatenate(a) if a else np.empty(0) for a in (idx, raw, shift, kind)]


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="fallback already active")
def test_stream_scan_backends_identical():
    x = _random_signal()
    s1, out1 = _run_stream(_kernels.stream_scan, x, 5e-4, 1e-7, block=977)
    s2, out2 = _run_stream(_kernels.stream_scan_py, x, 5e-4, 1e-7, block=977)
    assert np.array_equal(s1, s2)
    for a, b in zip(out1, out2):
        assert np.array_equal(a, b)


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="fallback already active")
def test_rainflow_backends_identical():
    x = _random_signal(seed=3)
    state, (idx, raw, shift, kind) = _run_stream(_kernels.stream_scan, x, 5e-4, 0.0, block=x.size)
    ext = raw
    outs = lambda: (np.empty(ext.size), np.empty(ext.size), np.empty(ext.size))
    a1, m1, w1 = outs()
    a2, m2, w2 = outs()
    n1 = _kernels.rainflow_fourpoint(ext, a1, m1, w1)
    n2 = _kernels.rainflow_fourpoint_py(ext, a2, m2, w2)
    assert n1 == n2
    assert np.array_equal(a1[:n1], a2[:n2])
    assert np.array_equal(m1[:n1], m2[:n2])
    assert np.array_equal(w1[:n1], w2[:n2])


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="fallback already active")
def test_damage_prefix_backends_identical():
    x = _random_signal(seed=5)
    _, (idx, raw, shift, kind) = _run_stream(_kernels.stream_scan, x, 5e-4, 0.0, block=x.size)
    c1, d1 = _kernels.damage_prefix_scan(raw, 0.3, 6.0, 1.0)
    c2, d2 = _kernels.damage_prefix_scan_py(raw, 0.3, 6.0, 1.0)
    assert c1 == c2
    assert d1 == d2


def test_stream_scan_blocking_invariance():
    x = _random_signal(seed=8, n=5000)
    s1, out1 = _run_stream(_kernels.stream_scan, x, 5e-4, 1e-9, block=1)
    s2, out2 = _run_stream(_kernels.stream_scan, x, 5e-4, 1e-9, block=x.size)
    assert np.array_equal(s1, s2)
    for a, b in zip(out1, out2):
        assert np.array_equal(a, b)


def test_stream_scan_reports_alternating_kinds():
    x = _random_signal(seed=13, n=5000)
    _, (idx, raw, shift, kind) = _run_stream(_kernels.stream_scan, x, 5e-4, 0.0, block=x.size)
    assert kind.size > 10
    assert np.all(kind[1:] != kind[:-1])  # peaks and valleys alternate
    assert np.all(np.diff(idx) > 0)
