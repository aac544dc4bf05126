import importlib.util
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from uavloc import kernels


def test_solve_sym3_matches_numpy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.normal(size=(3, 3))
        m = a @ a.T + 0.1 * np.eye(3)
        rhs = rng.normal(size=3)
        x, det = kernels.solve_sym3(m, rhs)
        np.testing.assert_allclose(x, np.linalg.solve(m, rhs), rtol=1e-9, atol=1e-12)
        assert det == pytest.approx(np.linalg.det(m), rel=1e-9)


def test_solve_sym3_singular_gives_nan():
    x, det = kernels.solve_sym3(np.zeros((3, 3)), np.ones(3))
    assert det == 0.0 and np.all(np.isnan(x))


def test_grid_cost_paths_agree():
    rng = np.random.default_rng(2)
    b = rng.normal(size=(6, 3))
    p = rng.normal(size=6)
    xs = np.linspace(-3, 3, 17)
    ys = np.linspace(-2, 4, 11)
    ref = kernels._grid_cost_loops(b, p, xs, ys)
    np.testing.assert_allclose(kernels.grid_cost(b, p, xs, ys), ref, rtol=1e-12)
    np.testing.assert_allclose(kernels.grid_cost_py(b, p, xs, ys), ref, rtol=1e-12)


def test_doppler_toa_paths_agree():
    rng = np.random.default_rng(3)
    pos = rng.normal(0, 50, (40, 3))
    vel = rng.normal(0, 10, (40, 3))
    em = np.array([3.0, -7.0, 0.0])
    ref = kernels._doppler_toa_loops(pos, vel, em, 2.0, 3e8)
    for fn in (kernels.doppler_toa, kernels.doppler_toa_py):
        dop, toa = fn(pos, vel, em, 2.0, 3e8)
        np.testing.assert_allclose(dop, ref[0], rtol=1e-12)
        np.testing.assert_allclose(toa, ref[1], rtol=1e-12)


def test_bisect_finds_sign_change():
    normal = np.diag([2.0, 3.0, 1.0])
    q = np.array([2.0, -3.0, 0.5])  # phi(0) = 1.5 > 0, phi -> -inf
    lam, r, phi = kernels.secular_bisect(normal, q, 0.0, 50.0, 1e-14, 400)
    assert abs(phi) < 1e-10
    phi_py, r_py, _ = kernels._secular_eval(normal, q, lam)
    np.testing.assert_allclose(r, r_py, rtol=1e-12)


_PROBE = """
import json
from uavloc import SignalParams, UavState, EmitterPosition, synthesize_frame, estimate_emitter
from uavloc._accel import backend
sig = SignalParams()
frame = synthesize_frame(UavState([0, 0, 50], [10, 0, 0]), EmitterPosition(35, 15), sig, 4)
print(json.dumps({"backend": backend(), "r": estimate_emitter(frame, sig).r.tolist()}))
"""


def _probe(flag):
    env = dict(os.environ, UAVLOC_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_env_flag_selects_numpy_and_matches():
    plain = _probe("1")
    assert plain["backend"] == "numpy"
    default = _probe("0")
    assert default["backend"] == ("numba" if importlib.util.find_spec("numba") else "numpy")
    np.testing.assert_allclose(plain["r"], default["r"], rtol=1e-9)
