import numpy as np
import pytest

from uavloc import EmitterPosition, SignalParams, UavState, synthesize_frame


@pytest.fixture
def quiet():
    """Default-scenario signal settings with the noise switched off (gamma = 1)."""
    return SignalParams(f0=3e8, c=3e8, delta=0.05, K=10, sigma_w2=0.0, sigma_tau2=0.0)


@pytest.fixture
def default_uav():
    return UavState([0.0, 0.0, 50.0], [10.0, 0.0, 0.0])


@pytest.fixture
def default_emitter():
    return EmitterPosition(35.0, 15.0)


@pytest.fixture
def quiet_frame(quiet, default_uav, default_emitter):
    return synthesize_frame(default_uav, default_emitter, quiet, 0)


def random_track_frame(rng, params, emitter=None, height=50.0):
    """Noisy or clean frame along a random straight track near the origin."""
    if emitter is None:
        emitter = EmitterPosition(*rng.uniform(10, 90, 2))
    heading = rng.uniform(0, 2 * np.pi)
    speed = rng.uniform(5, 20)
    start = np.array([*rng.uniform(-20, 20, 2), height])
    uav = UavState(start, [speed * np.cos(heading), speed * np.sin(heading), 0.0])
    return synthesize_frame(uav, emitter, params, rng.integers(2**31)), emitter
