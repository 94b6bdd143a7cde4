"""Time the numba kernels against the plain-Python fallback.

Each variant runs in its own interpreter because the switch is read at import.

    python3 benchmarks/bench_kernels.py [--points 2000] [--h-max 60]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
import dioflow
from dioflow import _kernels
from dioflow.flow import orbit_delta_samples

points, h_max = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
x, y = rng.uniform(-1, 1, (points, 2)), rng.uniform(-1, 1, (points, 2))

def clock(fn):
    fn()  # compile / warm caches
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start

out = {
    "jit": dioflow.JIT_ENABLED,
    "orbit_delta_samples": clock(lambda: orbit_delta_samples(x, y, (2.0, 3.0), "euclidean")),
    "shell_minima": clock(lambda: _kernels.shell_minima(x[0], y[0], h_max)),
    "shell_minima_numpy": clock(lambda: _kernels.shell_minima_numpy(x[0], y[0], h_max)),
}
json.dump(out, sys.stdout)
"""


def run(disable, points, h_max):
    env = dict(os.environ)
    env.pop("DIOFLOW_DISABLE_JIT", None)
    if disable:
        env["DIOFLOW_DISABLE_JIT"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(points), str(h_max)],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000, help="orbit samples (n = 2)")
    ap.add_argument("--h-max", type=int, default=60, help="box height for the shell scan")
    args = ap.parse_args()
    jit = run(False, args.points, args.h_max)
    plain = run(True, args.points, args.h_max)
    if not jit["jit"]:
        print("numba is unavailable; both columns use the fallback")
    print(f"{'kernel':<22}{'jit [s]':>12}{'fallback [s]':>14}{'speedup':>10}")
    for key in ("orbit_delta_samples", "shell_minima", "shell_minima_numpy"):
        a, b = jit[key], plain[key]
        print(f"{key:<22}{a:>12.4f}{b:>14.4f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
