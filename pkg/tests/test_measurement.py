import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavloc import EmitterPosition, SignalParams, UavState, ZeroRange, doppler_true, synthesize_frame, toa_true
from uavloc.measurement import observe

# independent scalar evaluation: sqrt(35^2 + 15^2 + 50^2) and -350 / that
RANGE_SEC5 = 62.849025449882674
DOPPLER_SEC5 = -5.5689009892301105
TOA_SEC5 = 2.0949675149960892e-07


def test_doppler_default_geometry(quiet, default_uav, default_emitter):
    assert doppler_true(default_uav, default_emitter, quiet) == pytest.approx(DOPPLER_SEC5, rel=1e-14)


def test_doppler_orthogonal_velocity_is_zero(quiet):
    uav = UavState([20.0, 5.0, 50.0], [0.0, 7.0, 0.0])
    assert doppler_true(uav, EmitterPosition(-3.0, 5.0), quiet) == 0.0


def test_doppler_zero_carrier(default_uav, default_emitter):
    params = SignalParams(f0=0.0)
    assert doppler_true(default_uav, default_emitter, params) == 0.0


def test_toa_default_geometry(quiet, default_uav, default_emitter):
    assert toa_true(default_uav, default_emitter, SignalParams()) == pytest.approx(TOA_SEC5, rel=1e-14)


def test_toa_vertical_range():
    uav = UavState([0.0, 0.0, 42.0], [1.0, 0.0, 0.0])
    assert toa_true(uav, EmitterPosition(0.0, 0.0), SignalParams()) == 42.0 / 3e8


def test_toa_halves_when_c_doubles(default_uav, default_emitter):
    base = toa_true(default_uav, default_emitter, SignalParams())
    fast = toa_true(default_uav, default_emitter, SignalParams(c=6e8))
    assert fast == pytest.approx(base / 2, rel=1e-15)


def test_zero_range_raises(quiet):
    uav = UavState([1.0, 2.0, 0.0], [1.0, 0.0, 0.0])
    with pytest.raises(ZeroRange):
        doppler_true(uav, EmitterPosition(1.0, 2.0), quiet)
    with pytest.raises(ZeroRange):
        toa_true(uav, EmitterPosition(1.0, 2.0), quiet)


def test_params_validation():
    with pytest.raises(ValueError):
        SignalParams(K=2)
    with pytest.raises(ValueError):
        SignalParams(delta=0.0)
    with pytest.raises(ValueError):
        SignalParams(sigma_w2=-1.0)
    assert SignalParams(f0=6e8, c=3e8).gamma == 2.0


def test_nonplanar_velocity_rejected():
    with pytest.raises(ValueError):
        UavState([0, 0, 50], [1, 0, 1])


def test_frame_positions_follow_straight_track(default_uav, default_emitter):
    frame = synthesize_frame(default_uav, default_emitter, SignalParams(), 3)
    k = np.arange(10)
    np.testing.assert_allclose(frame.positions[:, 0], k * 0.5, rtol=0, atol=1e-12)
    assert np.all(frame.positions[:, 1] == 0.0)
    assert np.all(frame.positions[:, 2] == 50.0)
    assert len(frame.uav_states) == 10
    assert frame.uav_states[4].k == 5


def test_zero_noise_frame_matches_scalar_model(quiet, quiet_frame, default_emitter):
    for state, f, tau in zip(quiet_frame.uav_states, quiet_frame.doppler, quiet_frame.toa):
        assert f == pytest.approx(doppler_true(state, default_emitter, quiet), rel=1e-14, abs=1e-15)
        assert tau == pytest.approx(toa_true(state, default_emitter, quiet), rel=1e-14)


def test_same_seed_same_frame(default_uav, default_emitter):
    a = synthesize_frame(default_uav, default_emitter, SignalParams(), 11)
    b = synthesize_frame(default_uav, default_emitter, SignalParams(), 11)
    c = synthesize_frame(default_uav, default_emitter, SignalParams(), 12)
    assert a == b
    assert a.doppler.tobytes() == b.doppler.tobytes()
    assert a != c


@pytest.mark.parametrize("units", ["s2", "m2"])
def test_empirical_noise_variance(units):
    params = SignalParams(sigma_w2=0.04, sigma_tau2=2.5e-3, toa_noise_units=units)
    emitter = EmitterPosition(35.0, 15.0)
    n = 200_000
    pos = np.tile([0.0, 0.0, 50.0], (n, 1))
    vel = np.tile([10.0, 0.0, 0.0], (n, 1))
    clean_f, clean_t = observe(pos, vel, emitter, params)
    noisy_f, noisy_t = observe(pos, vel, emitter, params, np.random.default_rng(5))
    assert np.var(noisy_f - clean_f) == pytest.approx(0.04, rel=0.05)
    err_t = noisy_t - clean_t
    if units == "m2":
        err_t = err_t * params.c
    assert np.var(err_t) == pytest.approx(2.5e-3, rel=0.05)


coords = st.floats(-500, 500, allow_nan=False)
speeds = st.floats(-30, 30, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(coords, coords, st.floats(1, 200), speeds, speeds, coords, coords, st.floats(0.1, 10))
def test_doppler_symmetries(x, y, h, vx, vy, ex, ey, s):
    params = SignalParams()
    emitter = EmitterPosition(ex, ey)
    fwd = doppler_true(UavState([x, y, h], [vx, vy, 0]), emitter, params)
    back = doppler_true(UavState([x, y, h], [-vx, -vy, 0]), emitter, params)
    scaled = doppler_true(UavState([x, y, h], [s * vx, s * vy, 0]), emitter, params)
    assert fwd == -back
    assert scaled == pytest.approx(s * fwd, rel=1e-12, abs=1e-12)
    # range never drops below the flight height
    tau = toa_true(UavState([x, y, h], [vx, vy, 0]), emitter, params)
    assert tau * params.c >= h * (1 - 1e-15)
    assert math.isfinite(fwd)
