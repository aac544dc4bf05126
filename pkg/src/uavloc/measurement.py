"""Doppler and ToA observation model for a ground emitter seen from a UAV."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ZeroRange

SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class EmitterPosition:
    """Ground-plane emitter location in metres (z is always 0)."""

    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("emitter coordinates must be finite")

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x, self.y, 0.0], dtype=float)


@dataclass(frozen=True, eq=False)
class UavState:
    position: np.ndarray
    velocity: np.ndarray
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))
        if self.velocity[2] != 0.0:
            raise ValueError("UAV velocity must be planar (v_z = 0)")

    def __eq__(self, other):
        if not isinstance(other, UavState):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
        )


@dataclass(frozen=True)
class SignalParams:
    """Carrier, timing and noise settings shared by synthesis and estimation.

    ``sigma_w2`` is the Doppler noise variance in Hz^2.  ``sigma_tau2`` is the
    ToA noise variance, read as the variance of the ToA-implied range
    ``c*tau`` in m^2 when ``toa_noise_units == "m2"`` (default) and as a
    variance of ``tau`` itself in s^2 when it is ``"s2"``.
    """

    f0: float = 3.0e8
    c: float = SPEED_OF_LIGHT
    delta: float = 0.05
    K: int = 10
    sigma_w2: float = 0.01
    sigma_tau2: float = 1e-6
    toa_noise_units: str = "m2"

    def __post_init__(self):
        if self.toa_noise_units not in ("m2", "s2"):
            raise ValueError("toa_noise_units must be 'm2' or 's2'")
        if self.K < 3:
            raise ValueError(f"K must be >= 3, got {self.K}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.sigma_w2 < 0 or self.sigma_tau2 < 0:
            raise ValueError("noise variances must be non-negative")

    @property
    def gamma(self) -> float:
        return self.f0 / self.c

    @property
    def toa_sigma(self) -> float:
        """ToA noise standard deviation in seconds."""
        sigma = float(np.sqrt(self.sigma_tau2))
        return sigma / self.c if self.toa_noise_units == "m2" else sigma


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """K paired Doppler/ToA samples and the UAV states that produced them."""

    positions: np.ndarray  # (K, 3)
    velocities: np.ndarray  # (K, 3)
    doppler: np.ndarray  # (K,) Hz
    toa: np.ndarray  # (K,) s
    frame_index: int = 1
    first_k: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.doppler)
        if not (len(self.toa) == n and self.positions.shape == (n, 3) and self.velocities.shape == (n, 3)):
            raise ValueError("frame arrays must all have length K")

    def __len__(self):
        return len(self.doppler)

    @property
    def uav_states(self) -> list[UavState]:
        return [
            UavState(p, v, self.first_k + i)
            for i, (p, v) in enumerate(zip(self.positions, self.velocities))
        ]

    @property
    def velocity(self) -> np.ndarray:
        """Frame velocity (the first sample's; constant within a frame)."""
        return self.velocities[0]

    def __eq__(self, other):
        if not isinstance(other, MeasurementFrame):
            return NotImplemented
        return (
            self.frame_index == other.frame_index
            and self.first_k == other.first_k
            and all(
                np.array_equal(a, b)
                for a, b in [
                    (self.positions, other.positions),
                    (self.velocities, other.velocities),
                    (self.doppler, other.doppler),
                    (self.toa, other.toa),
                ]
            )
        )


def _range_vector(uav: UavState, emitter: EmitterPosition) -> tuple[np.ndarray, float]:
    los = uav.position - emitter.xyz
    rng = float(np.linalg.norm(los))
    if rng == 0.0:
        raise ZeroRange("UAV position coincides with the emitter")
    return los, rng


def doppler_true(uav: UavState, emitter: EmitterPosition, params: SignalParams) -> float:
    """Noiseless Doppler ``gamma * v . (p_u - p_s) / |p_u - p_s|`` in Hz."""
    los, rng = _range_vector(uav, emitter)
    return params.gamma * float(uav.velocity @ los) / rng


def toa_true(uav: UavState, emitter: EmitterPosition, params: SignalParams) -> float:
    _, rng = _range_vector(uav, emitter)
    return rng / params.c


def straight_track(start: np.ndarray, velocity: np.ndarray, n: int, delta: float) -> np.ndarray:
    """Positions ``start + i*delta*velocity`` for i = 0..n-1."""
    steps = np.arange(n, dtype=float)[:, None]
    return np.asarray(start, dtype=float)[None, :] + steps * delta * np.asarray(velocity, dtype=float)[None, :]


def observe(positions, velocities, emitter: EmitterPosition, params: SignalParams, rng=None):
    """Doppler and ToA at each row of ``positions``; noisy if ``rng`` is given."""
    positions = np.ascontiguousarray(positions, dtype=float)
    velocities = np.ascontiguousarray(velocities, dtype=float)
    ranges = np.linalg.norm(positions - emitter.xyz, axis=1)
    if np.any(ranges == 0.0):
        raise ZeroRange("UAV position coincides with the emitter")
    dop, toa = kernels.doppler_toa(positions, velocities, emitter.xyz, params.gamma, params.c)
    dop = np.asarray(dop)
    toa = np.asarray(toa)
    if rng is not None:
        n = len(dop)
        dop = dop + rng.normal(0.0, np.sqrt(params.sigma_w2), n)
        toa = toa + rng.normal(0.0, params.toa_sigma, n)
    return dop, toa


def synthesize_frame(
    initial_uav: UavState,
    emitter: EmitterPosition,
    params: SignalParams,
    rng_seed=None,
    frame_index: int = 1,
) -> MeasurementFrame:
    """Fly K constant-velocity steps from ``initial_uav`` and record noisy samples.

    ``rng_seed`` is anything ``numpy.random.default_rng`` accepts.  The same
    seed always yields the same frame.
    """
    rng = np.random.default_rng(rng_seed)
    positions = straight_track(initial_uav.position, initial_uav.velocity, params.K, params.delta)
    velocities = np.repeat(initial_uav.velocity[None, :], params.K, axis=0)
    dop, toa = observe(positions, velocities, emitter, params, rng)
    return MeasurementFrame(positions, velocities, dop, toa, frame_index, initial_uav.k)
