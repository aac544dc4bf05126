"""Frame loop and Monte Carlo experiments.

Random streams are keyed by ``(root seed, trial)`` and then by
``(frame, stream)``, so any trial can be replayed alone and the two arms of
the trajectory comparison see identical first-frame noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DegenerateGeometry, SingularSystem, ZeroRange
from .localization import Branch, EmitterEstimate, estimate_emitter, toa_only_estimate
from .measurement import (
    EmitterPosition,
    SignalParams,
    UavState,
    observe,
    synthesize_frame,
)
from .trajectory import TrajectoryInputs, VelocityBranch, VelocityCommand, solve_velocity

FRAME_STREAM = 0
PROBE_STREAM = 1

DEFAULT_SNR_DB = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)


@dataclass(frozen=True)
class ScenarioConfig:
    emitter: EmitterPosition = field(default_factory=lambda: EmitterPosition(35.0, 15.0))
    uav_init: UavState = field(default_factory=lambda: UavState([0.0, 0.0, 50.0], [10.0, 0.0, 0.0]))
    signal: SignalParams = field(default_factory=SignalParams)
    num_frames: int = 10
    trajectory_enabled: bool = True
    num_trials: int = 50
    snr_sweep: Optional[tuple] = None
    v_max: float = 30.0
    seed: int = 0
    normalize_line_row: bool = False

    def __post_init__(self):
        if self.num_frames < 1:
            raise ValueError("num_frames must be >= 1")
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        if self.uav_init.position[2] <= 0:
            raise ValueError("UAV height must be positive")
        speed = float(np.linalg.norm(self.uav_init.velocity))
        if not 0 < speed <= self.v_max:
            raise ValueError("initial speed must be in (0, v_max]")

    @property
    def nominal_speed(self) -> float:
        return float(np.linalg.norm(self.uav_init.velocity))


@dataclass
class TrialResult:
    estimates: list
    accuracy: np.ndarray  # per frame, metres
    commands: list  # VelocityCommand or None, one per frame
    flags: list  # per frame: estimator branch or "FAILED"
    positions: np.ndarray  # every epoch, including steering samples
    velocities: np.ndarray
    frame_end_positions: np.ndarray  # (L, 3)

    @property
    def final_distance(self) -> float:
        """Planar UAV-emitter distance at the end of the last frame."""
        return float(self._emitter_dist[-1])

    _emitter_dist: np.ndarray = field(default=None, repr=False)


def trial_seed(root: int, trial: int) -> tuple:
    return (int(root), int(trial))


def stream(seed, frame: int, kind: int) -> np.random.Generator:
    entropy = list(seed) if isinstance(seed, (tuple, list)) else int(seed)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(frame, kind)))


def accuracy(truth: EmitterPosition, estimate_xy) -> float:
    """Planar Euclidean distance between truth and estimate."""
    diff = np.asarray(estimate_xy, dtype=float)[:2] - truth.xy
    return float(math.hypot(diff[0], diff[1]))


def _nan_estimate():
    return EmitterEstimate(np.full(3, np.nan), math.nan, math.nan, math.nan, Branch.CLS)


def run_trial(config: ScenarioConfig, seed) -> TrialResult:
    """Algorithm loop over ``config.num_frames`` frames for one trial.

    Each frame period is K localisation samples followed by one steering
    sample taken at the current velocity.  With trajectory design on, that
    sample feeds the velocity update; otherwise it is flown but unused, so
    both arms keep the same timeline.
    """
    sig = config.signal
    pos = config.uav_init.position.copy()
    vel = config.uav_init.velocity.copy()
    k = 1
    prior = None
    last = None
    estimates, acc, commands, flags = [], [], [], []
    track_p, track_v, ends = [], [], []

    for frame_idx in range(1, config.num_frames + 1):
        frame = synthesize_frame(
            UavState(pos, vel, k), config.emitter, sig, stream(seed, frame_idx, FRAME_STREAM), frame_idx
        )
        track_p.append(frame.positions)
        track_v.append(frame.velocities)
        try:
            est = estimate_emitter(frame, sig, prior, config.normalize_line_row)
            flags.append(est.branch.value)
            last = est
            prior = est.position
        except (SingularSystem, ZeroRange):
            est = last if last is not None else _nan_estimate()
            flags.append("FAILED")
        estimates.append(est)
        acc.append(accuracy(config.emitter, est.position))

        p_end = frame.positions[-1]
        ends.append(p_end)
        probe_pos = p_end + sig.delta * vel
        track_p.append(probe_pos[None, :])
        track_v.append(vel[None, :])
        cmd = None
        if config.trajectory_enabled and frame_idx < config.num_frames and np.all(np.isfinite(est.position)):
            dop, toa = observe(
                probe_pos[None, :], vel[None, :], config.emitter, sig, stream(seed, frame_idx, PROBE_STREAM)
            )
            f_bar = sig.c * float(toa[0]) * float(dop[0])
            inputs = TrajectoryInputs(
                p_end, est.position, f_bar, config.nominal_speed, config.v_max, sig.gamma, sig.delta, vel[:2]
            )
            try:
                cmd = solve_velocity(inputs)
            except DegenerateGeometry:
                cmd = VelocityCommand(vel[:2].copy(), float(np.linalg.norm(vel)), VelocityBranch.NO_SOLUTION_KEEP_PREVIOUS)
            if cmd.branch is not VelocityBranch.NO_SOLUTION_KEEP_PREVIOUS:
                vel = cmd.velocity3
        commands.append(cmd)
        pos = probe_pos + sig.delta * vel
        k += sig.K + 1

    ends = np.array(ends)
    result = TrialResult(
        estimates=estimates,
        accuracy=np.array(acc),
        commands=commands,
        flags=flags,
        positions=np.vstack(track_p),
        velocities=np.vstack(track_v),
        frame_end_positions=ends,
    )
    result._emitter_dist = np.hypot(ends[:, 0] - config.emitter.x, ends[:, 1] - config.emitter.y)
    return result


def signal_powers(config: ScenarioConfig):
    """Mean squared noiseless Doppler and ToA over the first frame.

    The ToA power is in the units ``sigma_tau2`` is read in (m^2 or s^2).
    """
    sig = config.signal
    frame = synthesize_frame(config.uav_init, config.emitter, sig, None)
    dop, toa = observe(frame.positions, frame.velocities, config.emitter, sig)
    if sig.toa_noise_units == "m2":
        toa = sig.c * toa
    return float(np.mean(dop**2)), float(np.mean(toa**2))


def snr_to_variances(config: ScenarioConfig, snr_db: float):
    p_dop, p_toa = signal_powers(config)
    scale = 10.0 ** (-snr_db / 10.0)
    return p_dop * scale, p_toa * scale


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    method: str
    mean_accuracy_m: float
    std_accuracy_m: float
    trials: int
    failures: int

    @property
    def stderr(self) -> float:
        return self.std_accuracy_m / math.sqrt(self.trials) if self.trials > 1 else math.nan


METHODS = ("doppler_toa", "toa_only")


def run_snr_sweep(config: ScenarioConfig) -> list:
    """Single-frame accuracy of both estimators at each SNR point.

    Each SNR point sets both noise variances to ``P / 10^(snr/10)`` with
    ``P`` the mean squared noiseless measurement of that type.  Trial ``i``
    reuses one noise stream across SNR points (common random numbers).
    """
    snrs = tuple(config.snr_sweep) if config.snr_sweep else DEFAULT_SNR_DB
    rows = []
    for snr in snrs:
        w2, t2 = snr_to_variances(config, snr)
        sig = replace(config.signal, sigma_w2=w2, sigma_tau2=t2)
        errs = {m: np.empty(config.num_trials) for m in METHODS}
        fails = {m: 0 for m in METHODS}
        for i in range(config.num_trials):
            seed = trial_seed(config.seed, i)
            frame = synthesize_frame(config.uav_init, config.emitter, sig, stream(seed, 1, FRAME_STREAM))
            for method in METHODS:
                try:
                    if method == "doppler_toa":
                        est = estimate_emitter(frame, sig, None, config.normalize_line_row)
                    else:
                        est = toa_only_estimate(frame, sig)
                    if est.branch is not Branch.CLS:
                        fails[method] += 1
                    errs[method][i] = accuracy(config.emitter, est.position)
                except (SingularSystem, ZeroRange):
                    fails[method] += 1
                    errs[method][i] = math.nan
        for method in METHODS:
            e = errs[method]
            ok = e[np.isfinite(e)]
            rows.append(
                SweepRow(
                    float(snr),
                    method,
                    float(np.mean(ok)) if ok.size else math.nan,
                    float(np.std(ok, ddof=1)) if ok.size > 1 else math.nan,
                    config.num_trials,
                    fails[method],
                )
            )
    return rows


@dataclass
class ComparisonResult:
    optimized: list  # TrialResult per trial
    fixed: list

    def mean_accuracy(self, arm: str) -> np.ndarray:
        return np.mean([t.accuracy for t in getattr(self, arm)], axis=0)

    def std_accuracy(self, arm: str) -> np.ndarray:
        return np.std([t.accuracy for t in getattr(self, arm)], axis=0, ddof=1)

    def mean_final_distance(self, arm: str) -> float:
        return float(np.mean([t.final_distance for t in getattr(self, arm)]))

    def mean_distance(self, arm: str) -> np.ndarray:
        return np.mean([t._emitter_dist for t in getattr(self, arm)], axis=0)


def run_trajectory_comparison(config: ScenarioConfig) -> ComparisonResult:
    on = replace(config, trajectory_enabled=True)
    off = replace(config, trajectory_enabled=False)
    optimized, fixed = [], []
    for i in range(config.num_trials):
        seed = trial_seed(config.seed, i)
        optimized.append(run_trial(on, seed))
        fixed.append(run_trial(off, seed))
    return ComparisonResult(optimized, fixed)
