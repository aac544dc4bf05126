"""Closed-form emitter localisation from one frame of Doppler + ToA data.

The ToA-implied range turns the Doppler least-squares cost into a quadratic
whose minimisers form a line.  That line, stacked under the linearised ToA
equations, gives an overdetermined system in ``r = [x, y, x^2 + y^2]`` which
is solved subject to the quadratic coupling of its entries.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .errors import DegenerateVelocity, NoConstraintRoot, SingularSystem
from .measurement import MeasurementFrame, SignalParams

D_MAT = np.diag([1.0, 1.0, 0.0])
G_VEC = np.array([0.0, 0.0, -0.5])

# relative tolerance for treating two candidate residuals as equal
TIE_RTOL = 1e-9
# eigenvalue ratio below which B'B is treated as exactly rank deficient
RANK_RTOL = 1e-12


class Branch(str, enum.Enum):
    CLS = "CLS"
    TOA_ONLY_FALLBACK = "TOA_ONLY_FALLBACK"
    UNCONSTRAINED_FALLBACK = "UNCONSTRAINED_FALLBACK"


@dataclass(frozen=True)
class LineCondition:
    """The line ``k1*x + k2*y = c11`` holding every minimiser of the Doppler cost."""

    k1: float
    k2: float
    c11: float
    row: int = 0


@dataclass(frozen=True, eq=False)
class ClsSystem:
    b_plus: np.ndarray
    p_plus: np.ndarray
    d_mat: np.ndarray = D_MAT
    g_vec: np.ndarray = G_VEC

    @property
    def shape(self):
        return self.b_plus.shape


@dataclass(frozen=True, eq=False)
class EmitterEstimate:
    r: np.ndarray
    lam: float
    residual: float
    constraint_violation: float
    branch: Branch = Branch.CLS
    # reflected candidate with (near) equal residual, when the geometry is ambiguous
    mirror: Optional[np.ndarray] = None
    mirror_residual: Optional[float] = None

    @property
    def position(self) -> np.ndarray:
        return self.r[:2].copy()

    @property
    def ambiguous(self) -> bool:
        if self.mirror is None:
            return False
        scale = max(1.0, abs(self.residual), abs(self.mirror_residual))
        return abs(self.residual - self.mirror_residual) <= TIE_RTOL * scale

    def resolve_mirror(self, prior) -> "EmitterEstimate":
        """Swap in the mirror candidate if it is tied and closer to ``prior``."""
        if prior is None or not self.ambiguous:
            return self
        prior = np.asarray(prior, dtype=float)[:2]
        if np.linalg.norm(self.mirror[:2] - prior) < np.linalg.norm(self.r[:2] - prior):
            return replace(
                self,
                r=self.mirror,
                mirror=self.r,
                residual=self.mirror_residual,
                mirror_residual=self.residual,
                constraint_violation=_violation(self.mirror),
            )
        return self


def _violation(r) -> float:
    return float(abs(r[2] - r[0] ** 2 - r[1] ** 2))


def range_scaled_doppler(frame: MeasurementFrame, params: SignalParams) -> np.ndarray:
    """``c * tau_k * f_k``: Doppler times the ToA-implied range."""
    return params.c * frame.toa * frame.doppler


def modified_ls_cost(candidate, frame: MeasurementFrame, params: SignalParams) -> float:
    """Doppler LS cost with the range replaced by its ToA measurement.

    Quadratic (hence convex) in the candidate ground position.
    """
    p_s = np.array([candidate[0], candidate[1], 0.0])
    f_bar = range_scaled_doppler(frame, params)
    pred = params.gamma * np.einsum("ij,ij->i", frame.velocities, frame.positions - p_s)
    res = f_bar - pred
    return float(res @ res)


def doppler_normal_equations(frame: MeasurementFrame, params: SignalParams):
    """Return ``(A, c1)`` with ``A p_s = c1`` the stationarity condition of the cost.

    ``A`` is singular whenever the velocity is constant over the frame.
    """
    if params.gamma == 0.0:
        raise DegenerateVelocity("gamma is zero; Doppler carries no information")
    v = frame.velocities[:, :2]
    f_bar = range_scaled_doppler(frame, params)
    c_vec = f_bar @ v
    proj = np.einsum("ij,ij->i", frame.velocities, frame.positions)
    c1 = -c_vec / params.gamma + proj @ v
    a_mat = v.T @ v
    return a_mat, c1


def line_condition(frame: MeasurementFrame, params: SignalParams) -> LineCondition:
    v0 = frame.velocity[:2]
    if not np.any(v0 != 0.0):
        raise DegenerateVelocity("frame velocity is zero")
    a_mat, c1 = doppler_normal_equations(frame, params)
    # rows of A are parallel for constant velocity; keep the better-scaled one
    row = int(np.argmax(np.abs(v0)))
    return LineCondition(float(a_mat[row, 0]), float(a_mat[row, 1]), float(c1[row]), row)


def toa_rows(frame: MeasurementFrame, params: SignalParams):
    """Linearised ToA equations ``B r = p`` with ``r = [x, y, x^2 + y^2]``."""
    pos = frame.positions
    d = params.c * frame.toa
    b = np.column_stack([-2.0 * pos[:, 0], -2.0 * pos[:, 1], np.ones(len(pos))])
    # the UAV height enters the squared range, so it is moved to the right-hand side
    p = d**2 - pos[:, 0] ** 2 - pos[:, 1] ** 2 - pos[:, 2] ** 2
    return b, p


def assemble_cls(
    frame: MeasurementFrame,
    line: LineCondition,
    params: SignalParams,
    normalize_line_row: bool = False,
) -> ClsSystem:
    if len(frame) < 3:
        raise ValueError("need at least 3 samples per frame")
    b, p = toa_rows(frame, params)
    extra = np.array([line.k1, line.k2, 0.0])
    rhs = line.c11
    if normalize_line_row:
        norm = np.hypot(line.k1, line.k2)
        if norm > 0:
            target = np.mean(np.linalg.norm(b, axis=1))
            extra = extra * (target / norm)
            rhs = rhs * (target / norm)
    return ClsSystem(np.vstack([b, extra]), np.append(p, rhs))


def _largest_pencil_root(normal) -> float:
    # det(M + lam D) = f lam^2 + (f (a + d) - e^2 - c^2) lam + det(M)
    a, c, d, e, f = normal[0, 0], normal[0, 2], normal[1, 1], normal[1, 2], normal[2, 2]
    q2 = f
    q1 = f * (a + d) - e * e - c * c
    q0 = float(np.linalg.det(normal))
    s = np.sqrt(max(q1 * q1 - 4.0 * q2 * q0, 0.0))
    t = -0.5 * (q1 + s) if q1 >= 0 else -0.5 * (q1 - s)
    if t == 0.0:
        return 0.0
    return max(t / q2, q0 / t)


def _orient(n):
    # orientation is fixed by the dominant planar component
    lead = 0 if abs(n[0]) >= abs(n[1]) else 1
    return -n if n[lead] < 0 else n


def _null_direction(mat):
    _, vecs = np.linalg.eigh(mat)
    return _orient(vecs[:, 0])


def _hard_case(normal, q, lam_low, null=None):
    """Constraint-satisfying points on the minimiser set at the pole ``lam_low``."""
    f = normal + lam_low * D_MAT
    rhs = q - lam_low * G_VEC
    r_p = np.linalg.pinv(f, rcond=1e-10, hermitian=True) @ rhs
    n = _null_direction(f) if null is None else _orient(null)
    qa = n @ D_MAT @ n
    qb = 2.0 * (r_p @ D_MAT @ n + G_VEC @ n)
    qc = r_p @ D_MAT @ r_p + 2.0 * G_VEC @ r_p
    if qa <= 0:
        return []
    disc = qb * qb - 4.0 * qa * qc
    s = np.sqrt(max(disc, 0.0))
    ts = sorted({(-qb + s) / (2.0 * qa), (-qb - s) / (2.0 * qa)}, reverse=True)
    return [r_p + t * n for t in ts]


def solve_cls(system: ClsSystem, rtol: float = 1e-13, maxiter: int = 400) -> EmitterEstimate:
    """Minimise ``|B+ r - p+|^2`` subject to ``r_z = r_x^2 + r_y^2``.

    The stationary point for multiplier ``lam`` is
    ``r(lam) = (B'B + lam D)^-1 (B'p - lam g)``.  ``lam`` is the root of the
    constraint residual on the interval where ``B'B + lam D`` is positive
    definite; there the residual is monotone so bisection finds it.  When
    the residual stays negative up to the interval's pole (always the case
    for noiseless data from a straight track, which leaves ``B`` rank
    deficient), the solution sits on the pole and two candidates mirrored
    across the track are returned.
    """
    b, p = system.b_plus, system.p_plus
    normal = b.T @ b
    q = b.T @ p
    if not (np.all(np.isfinite(normal)) and np.all(np.isfinite(q))):
        raise SingularSystem("non-finite normal equations")
    if normal[2, 2] <= 0.0 or np.linalg.matrix_rank(b) < 2:
        raise SingularSystem("B+ has rank < 2")

    eig, vecs = np.linalg.eigh(normal)
    scale = float(eig[-1])
    null = None
    if eig[0] <= RANK_RTOL * scale:
        # straight track: deflate the round-off eigenvalue so the pole sits at 0
        null = vecs[:, 0]
        normal = normal - eig[0] * np.outer(null, null)
        q = q - (null @ q) * null
        lam_low = 0.0
    else:
        lam_low = _largest_pencil_root(normal)
    normal = np.ascontiguousarray(normal)
    q = np.ascontiguousarray(q)

    def phi(lam):
        val, r, _ = kernels.secular_eval(normal, q, lam)
        return val, r

    beta = max(float(eig[0]), 1e-9 * scale)
    floor = 1e-9 * max(scale, abs(lam_low))

    hi = None
    offset = beta
    for _ in range(400):
        val, _ = phi(lam_low + offset)
        if np.isfinite(val) and val < 0.0:
            hi = lam_low + offset
            break
        offset *= 2.0
    if hi is None:
        raise NoConstraintRoot("constraint residual never turns negative")

    lo = None
    offset = 0.5 * (hi - lam_low)
    while offset >= floor and lam_low + offset > lam_low:
        val, _ = phi(lam_low + offset)
        if np.isfinite(val) and val > 0.0:
            lo = lam_low + offset
            break
        offset *= 0.25

    candidates = []
    if lo is not None:
        lam, r, _ = kernels.secular_bisect(normal, q, lo, hi, rtol, maxiter)
        candidates.append((float(lam), np.asarray(r, dtype=float)))
    else:
        for r in _hard_case(normal, q, lam_low, null):
            candidates.append((float(lam_low), r))
    candidates = [(lam, r) for lam, r in candidates if np.all(np.isfinite(r))]
    if not candidates:
        raise SingularSystem("no finite stationary point")

    scored = []
    for lam, r in candidates:
        res = b @ r - p
        scored.append((float(res @ res), lam, r))
    # stable sort keeps the orientation-based order between tied mirrors
    order = sorted(range(len(scored)), key=lambda i: scored[i][0])
    best = scored[order[0]]
    mirror = scored[order[1]] if len(order) > 1 else None
    if mirror is not None:
        tie_scale = max(1.0, abs(best[0]), abs(mirror[0]))
        if abs(best[0] - mirror[0]) <= TIE_RTOL * tie_scale:
            best, mirror = scored[0], scored[1]
    return EmitterEstimate(
        r=best[2],
        lam=best[1],
        residual=best[0],
        constraint_violation=_violation(best[2]),
        branch=Branch.CLS,
        mirror=None if mirror is None else mirror[2],
        mirror_residual=None if mirror is None else mirror[0],
    )


def unconstrained_estimate(system: ClsSystem) -> EmitterEstimate:
    r, *_ = np.linalg.lstsq(system.b_plus, system.p_plus, rcond=None)
    res = system.b_plus @ r - system.p_plus
    return EmitterEstimate(
        r=r,
        lam=0.0,
        residual=float(res @ res),
        constraint_violation=_violation(r),
        branch=Branch.UNCONSTRAINED_FALLBACK,
    )


def toa_only_estimate(frame: MeasurementFrame, params: SignalParams) -> EmitterEstimate:
    """Conventional ToA estimate: the same constrained solve without the Doppler row."""
    if len(frame) < 3:
        raise ValueError("ToA-only estimation needs at least 3 samples")
    b, p = toa_rows(frame, params)
    system = ClsSystem(b, p)
    try:
        return solve_cls(system)
    except NoConstraintRoot:
        return unconstrained_estimate(system)


def estimate_emitter(
    frame: MeasurementFrame,
    params: SignalParams,
    prior=None,
    normalize_line_row: bool = False,
) -> EmitterEstimate:
    """Doppler + ToA estimate with the documented fallbacks.

    Zero frame velocity falls back to ToA only; a missing constraint root
    falls back to the unconstrained LS solution.  ``prior`` (a previous
    position estimate) picks between mirror-symmetric tied candidates.
    """
    try:
        line = line_condition(frame, params)
    except DegenerateVelocity:
        est = toa_only_estimate(frame, params)
        return replace(est, branch=Branch.TOA_ONLY_FALLBACK).resolve_mirror(prior)
    system = assemble_cls(frame, line, params, normalize_line_row)
    try:
        est = solve_cls(system)
    except NoConstraintRoot:
        est = unconstrained_estimate(system)
    return est.resolve_mirror(prior)
