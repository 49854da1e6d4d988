"""Benchmark the sequential kernels: numba backend vs pure-Python fallback.

Run directly to time the current backend and then re-launch itself with
FATPROG_DISABLE_NUMBA=1 for the comparison table:

    python benchmarks/bench_kernels.py

Pass --inner to time only the current process's backend (used by the
re-launch; also handy under a profiler).
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def build_inputs(n_samples=2_000_000, seed=42):
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / 4000.0
    x = np.zeros(n_samples)
    for f, phi, a in zip(
        rng.uniform(5, 900, 20), rng.uniform(0, 2 * np.pi, 20), rng.uniform(0.2, 1.0, 20)
    ):
        x += a * np.cos(2 * np.pi * f * t + phi)
    return x


def time_call(fn, *args, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_backend(n_samples):
    from fatprog import _kernels
    from fatprog.fatigue import turning_points

    x = build_inputs(n_samples)
    results = {"backend": _kernels.backend(), "n_samples": n_samples}

    # warm-up triggers JIT compilation so it is not timed
    turning_points(x[:1000], 1e-6)

    dt_scan, _ = time_call(lambda: turning_points(x, 1e-6))
    results["turning_points_s"] = dt_scan

    ext, _ = turning_points(x, 1e-6)
    results["n_extrema"] = int(ext.size)

    out = [np.empty(ext.size) for _ in range(3)]
    _kernels.rainflow_fourpoint(ext[:100], *[o[:100] for o in out])
    dt_rf, _ = time_call(lambda: _kernels.rainflow_fourpoint(ext, *out))
    results["rainflow_s"] = dt_rf

    _kernels.damage_prefix_scan(ext[:100], 1e-3, 6.0, 1.0)
    dt_dmg, _ = time_call(lambda: _kernels.damage_prefix_scan(ext, 1e-3, 6.0, np.inf))
    results["damage_prefix_s"] = dt_dmg

    state = _kernels.new_state(1e-6)
    buf = [np.empty(x.size), np.empty(x.size), np.empty(x.size), np.empty(x.size, np.int64)]
    _kernels.stream_scan(x[:1000], 1 / 4000.0, _kernels.new_state(1e-6), *buf)
    dt_stream, _ = time_call(
        lambda: _kernels.stream_scan(x, 1 / 4000.0, _kernels.new_state(1e-6), *buf)
    )
    results["stream_scan_s"] = dt_stream
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--inner", action="store_true", help="time this process only, emit JSON")
    parser.add_argument("--n-samples", type=int, default=2_000_000)
    args = parser.parse_args()

    if args.inner:
        print(json.dumps(run_backend(args.n_samples)))
        return

    here = run_backend(args.n_samples)
    # fallback numbers come from a fresh interpreter so the env flag is seen at import
    env = dict(os.environ, FATPROG_DISABLE_NUMBA="1")
    fallback_n = min(args.n_samples, 200_000)  # the pure loops are ~100x slower
    proc = subprocess.run(
        [sys.executable, __file__, "--inner", "--n-samples", str(fallback_n)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    there = json.loads(proc.stdout.strip().splitlines()[-1])

    scale = args.n_samples / fallback_n
    print(f"\n{'kernel':<20} {'numba':>12} {'fallback*':>12} {'speedup':>9}")
    for key in ("turning_points_s", "rainflow_s", "damage_prefix_s", "stream_scan_s"):
        a = here[key]
        b = there[key] * scale  # extrapolated to the same input size
        print(f"{key[:-2]:<20} {a:>11.4f}s {b:>11.4f}s {b / a:>8.1f}x")
    print(
        f"\n* fallback timed on {fallback_n:,} samples and scaled linearly to "
        f"{args.n_samples:,} ({here['n_extrema']:,} extrema at full size)."
    )


if __name__ == "__main__":
    main()
