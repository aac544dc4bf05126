"""Closed-form choice of the next frame's planar velocity.

The next-frame velocity ``u`` is picked so the newest augmented-LS Doppler
residual vanishes, i.e. ``u . b = d`` with ``b = p_K - p_hat`` and
``d = f_bar/gamma - delta*|u|^2``, together with ``|u| = A_v``.  That is a
line/circle intersection.  When the line misses the circle the speed is
re-chosen so the line becomes tangent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateGeometry

TIE_RTOL = 1e-9


class VelocityBranch(str, enum.Enum):
    TWO_ROOT = "TWO_ROOT"
    RECHOSEN_SPEED = "RECHOSEN_SPEED"
    NO_SOLUTION_KEEP_PREVIOUS = "NO_SOLUTION_KEEP_PREVIOUS"


@dataclass(frozen=True, eq=False)
class TrajectoryInputs:
    p_K: np.ndarray
    p_hat: np.ndarray
    f_bar_next: float
    A_v: float
    V_max: float
    gamma: float
    delta: float
    v_prev: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "p_K", np.asarray(self.p_K, dtype=float).reshape(-1))
        object.__setattr__(self, "p_hat", np.asarray(self.p_hat, dtype=float).reshape(-1)[:2])
        if self.v_prev is not None:
            object.__setattr__(self, "v_prev", np.asarray(self.v_prev, dtype=float).reshape(-1)[:2])
        if not 0 < self.A_v <= self.V_max:
            raise ValueError(f"need 0 < A_v <= V_max, got A_v={self.A_v}, V_max={self.V_max}")
        if self.gamma == 0:
            raise ValueError("gamma must be non-zero")

    @property
    def b(self) -> np.ndarray:
        return self.p_K[:2] - self.p_hat

    def d(self, speed: float) -> float:
        return self.f_bar_next / self.gamma - self.delta * speed * speed


@dataclass(frozen=True, eq=False)
class VelocityCommand:
    u: np.ndarray
    speed_used: float
    branch: VelocityBranch
    delta2: float = math.nan
    delta4: float = math.nan
    clamped: bool = False

    @property
    def velocity3(self) -> np.ndarray:
        return np.array([self.u[0], self.u[1], 0.0])


def velocity_constraint(inputs: TrajectoryInputs, u) -> float:
    """``u . b - d(|u|)``; zero exactly when ``u`` zeroes the augmented residual."""
    u = np.asarray(u, dtype=float)
    return float(u @ inputs.b - inputs.d(float(np.hypot(u[0], u[1]))))


def line_circle_roots(b, d: float, speed: float):
    """Intersections of ``u . b = d`` with ``|u| = speed``.

    Returns ``(roots, disc)``; ``disc`` is the discriminant of the quadratic
    in the free coordinate.  The coordinate paired with the larger ``|b_i|``
    is eliminated so the division is well conditioned.
    """
    b = np.asarray(b, dtype=float)
    e = 1 if abs(b[1]) >= abs(b[0]) else 0
    o = 1 - e
    be, bo = b[e], b[o]
    ratio = bo / be
    a1 = 1.0 + ratio * ratio
    b1 = d * bo / (be * be)
    c1 = (d / be) ** 2 - speed * speed
    disc = b1 * b1 - a1 * c1
    if disc < 0.0:
        # round-off band around tangency
        if -disc <= 1e-12 * (b1 * b1 + abs(a1 * c1)):
            disc = 0.0
        else:
            return [], disc
    s = math.sqrt(disc)
    qq = b1 + math.copysign(s, b1) if b1 != 0.0 else s
    if qq == 0.0:
        free = [0.0, 0.0]
    else:
        free = [qq / a1, c1 / qq]
    roots = []
    for uo in free:
        u = np.empty(2)
        u[o] = uo
        u[e] = (d - bo * uo) / be
        roots.append(u)
    return roots, disc


def _pick_nearer(roots, inputs: TrajectoryInputs):
    b = inputs.b
    # distance from the emitter estimate after one step at each candidate
    dist = [float(np.linalg.norm(b + inputs.delta * u)) for u in roots]
    if abs(dist[0] - dist[1]) > TIE_RTOL * max(dist):
        return roots[int(np.argmin(dist))]
    # the two roots mirror each other about b, so the step from p_K always
    # ties; measure from where the UAV really is after its steering sample
    if inputs.v_prev is not None:
        start = b + inputs.delta * inputs.v_prev
        dist = [float(np.linalg.norm(start + inputs.delta * u)) for u in roots]
        if abs(dist[0] - dist[1]) > TIE_RTOL * max(dist):
            return roots[int(np.argmin(dist))]
    # counter-clockwise of b wins the last tie
    cross = [b[0] * u[1] - b[1] * u[0] for u in roots]
    return roots[int(np.argmax(cross))]


def _keep_previous(inputs, delta2, delta4=math.nan):
    u = np.zeros(2) if inputs.v_prev is None else inputs.v_prev.copy()
    return VelocityCommand(u, float(np.hypot(*u)), VelocityBranch.NO_SOLUTION_KEEP_PREVIOUS, delta2, delta4)


def rechosen_speed_roots(inputs: TrajectoryInputs):
    """Squared speeds making the line tangent to the circle.

    Tangency means ``d(A)^2 = A^2 |b|^2``.  With ``F = f_bar/gamma`` and
    ``s = A^2`` this is ``delta^2 s^2 - (2 delta F + |b|^2) s + F^2 = 0``.
    Returns ``(roots, disc)``.
    """
    fb = inputs.f_bar_next / inputs.gamma
    bb = float(inputs.b @ inputs.b)
    a2 = inputs.delta**2
    a1 = -(2.0 * inputs.delta * fb + bb)
    a0 = fb * fb
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        return [], disc
    s = math.sqrt(disc)
    qq = -0.5 * (a1 + math.copysign(s, a1)) if a1 != 0.0 else 0.5 * s
    roots = [qq / a2]
    if qq != 0.0:
        roots.append(a0 / qq)
    return sorted(roots), disc


def solve_velocity(inputs: TrajectoryInputs) -> VelocityCommand:
    b = inputs.b
    nb = float(np.hypot(b[0], b[1]))
    if nb == 0.0:
        raise DegenerateGeometry("UAV is directly above the emitter estimate")

    speed = inputs.A_v
    roots, delta2 = line_circle_roots(b, inputs.d(speed), speed)
    if roots:
        u = _pick_nearer(roots, inputs)
        return VelocityCommand(u, speed, VelocityBranch.TWO_ROOT, delta2)

    s_roots, delta4 = rechosen_speed_roots(inputs)
    positive = [s for s in s_roots if s > 0.0]
    if not positive:
        return _keep_previous(inputs, delta2, delta4)
    a_new = math.sqrt(min(positive))
    clamped = a_new > inputs.V_max
    speed = min(a_new, inputs.V_max)
    d_new = inputs.d(speed)
    if clamped:
        # tangency is out of reach; take the circle point nearest the line
        u = math.copysign(speed, d_new) * b / nb
    else:
        u = d_new * b / (nb * nb)
    return VelocityCommand(u, speed, VelocityBranch.RECHOSEN_SPEED, delta2, delta4, clamped)
