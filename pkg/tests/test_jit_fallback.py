"""The numba kernels and their plain-Python fallback must agree."""

import json
import os
import subprocess
import sys

import numpy as np

SCRIPT = r"""
import json, sys
import numpy as np
import dioflow
from dioflow import _kernels
from dioflow.flow import orbit_delta_samples
from dioflow.lattice import LatticeBasis, delta

rng = np.random.default_rng(42)
x, y = rng.uniform(-1, 1, (40, 2)), rng.uniform(-1, 1, (40, 2))
out = {"jit": dioflow.JIT_ENABLED}
out["sup"] = [v.hex() for v in orbit_delta_samples(x, y, (2.0, 3.5), "sup")]
out["euc"] = [v.hex() for v in orbit_delta_samples(x, y, (1.0, 4.0), "euclidean")]
err, q = _kernels.shell_minima(x[0], y[0], 60)
out["shell_err"] = [float(v).hex() for v in err[1:]]
out["shell_q"] = q[1:].tolist()
rows = rng.normal(size=(4, 4))
out["lattice"] = [delta(LatticeBasis(tuple(map(tuple, rows))), n).hex() for n in ("sup", "euclidean")]
json.dump(out, sys.stdout)
"""


def run(disable):
    env = dict(os.environ)
    env.pop("DIOFLOW_DISABLE_JIT", None)
    if disable:
        env["DIOFLOW_DISABLE_JIT"] = "1"
    res = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True, env=env, check=True)
    return json.loads(res.stdout)


def floats(hexes):
    return np.array([float.fromhex(h) for h in hexes])


def test_fallback_matches_jit():
    fast, slow = run(False), run(True)
    assert fast["jit"] and not slow["jit"]
    for key in ("sup", "euc", "shell_err", "lattice"):
        np.testing.assert_allclose(floats(fast[key]), floats(slow[key]), rtol=1e-12, atol=0)
    assert fast["shell_q"] == slow["shell_q"]


def test_numpy_shell_minima_matches_kernel():
    from dioflow import _kernels

    rng = np.random.default_rng(1)
    x, y = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    e1, q1 = _kernels.shell_minima_jit(x, y, 12)
    e2, q2 = _kernels.shell_minima_numpy(x, y, 12)
    np.testing.assert_allclose(e1[1:], e2[1:], rtol=1e-12)
    assert np.array_equal(q1[1:], q2[1:])
