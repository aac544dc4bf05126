"""Compare the numba kernels with the pure-numpy path.

    python3 benchmarks/bench_kernels.py [--repeat N]

Kernel timings run in-process (the numpy forms stay importable as
``kernels.*_py``).  The end-to-end timing runs a trajectory comparison in two
subprocesses, one with ``UAVLOC_DISABLE_NUMBA=1``.  Compile time is excluded
from the in-process numbers by a warm-up call.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from uavloc import kernels
from uavloc._accel import HAVE_NUMBA

PIPELINE = """
import json, time
from uavloc import ScenarioConfig, run_trajectory_comparison
from uavloc._accel import backend
run_trajectory_comparison(ScenarioConfig(num_trials=1, num_frames=2))
t0 = time.perf_counter()
run_trajectory_comparison(ScenarioConfig(num_trials=50, num_frames=10))
print(json.dumps({"backend": backend(), "seconds": time.perf_counter() - t0}))
"""


def best_of(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(repeat):
    rng = np.random.default_rng(0)
    b = rng.normal(size=(11, 3))
    p = rng.normal(size=11)
    xs = np.linspace(-150, 150, 601)
    pos = rng.normal(0, 50, (200_000, 3))
    vel = rng.normal(0, 10, (200_000, 3))
    em = np.array([35.0, 15.0, 0.0])
    cases = [
        ("grid_cost 601x601", lambda: kernels.grid_cost(b, p, xs, xs), lambda: kernels.grid_cost_py(b, p, xs, xs)),
        ("doppler_toa 2e5", lambda: kernels.doppler_toa(pos, vel, em, 1.0, 3e8), lambda: kernels.doppler_toa_py(pos, vel, em, 1.0, 3e8)),
    ]
    rows = []
    for name, fast, slow in cases:
        rows.append((name, best_of(fast, repeat), best_of(slow, repeat)))
    return rows


def pipeline(flag):
    env = dict(os.environ, UAVLOC_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable or disabled: both columns time the numpy path")
    print(f"{'kernel':24s} {'numba s':>10s} {'numpy s':>10s} {'ratio':>7s}")
    for name, fast, slow in kernel_rows(args.repeat):
        print(f"{name:24s} {fast:10.5f} {slow:10.5f} {slow / fast:7.2f}")
    jit_run, plain_run = pipeline("0"), pipeline("1")
    print(
        f"{'trajectory-compare 50x10':24s} {jit_run['seconds']:10.5f} {plain_run['seconds']:10.5f} "
        f"{plain_run['seconds'] / jit_run['seconds']:7.2f}  ({jit_run['backend']} vs {plain_run['backend']})"
    )


if __name__ == "__main__":
    main()
