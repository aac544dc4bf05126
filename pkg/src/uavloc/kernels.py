"""Hot numeric kernels.

Each kernel has a loop form (compiled by numba when available) and the
module-level name is bound to whichever path ``_accel`` selects.  The
vectorised numpy forms of the batch kernels stay importable under ``*_py``
names so both paths can be benchmarked in one process.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, jit


def _solve_sym3(m, rhs):
    # adjugate solve for a symmetric 3x3; returns (x, det)
    a, b, c = m[0, 0], m[0, 1], m[0, 2]
    d, e = m[1, 1], m[1, 2]
    f = m[2, 2]
    c00 = d * f - e * e
    c01 = c * e - b * f
    c02 = b * e - c * d
    c11 = a * f - c * c
    c12 = b * c - a * e
    c22 = a * d - b * b
    det = a * c00 + b * c01 + c * c02
    x = np.empty(3)
    if det == 0.0:
        x[:] = np.nan
        return x, det
    x[0] = (c00 * rhs[0] + c01 * rhs[1] + c02 * rhs[2]) / det
    x[1] = (c01 * rhs[0] + c11 * rhs[1] + c12 * rhs[2]) / det
    x[2] = (c02 * rhs[0] + c12 * rhs[1] + c22 * rhs[2]) / det
    return x, det


def _secular_eval(normal, q, lam):
    # r(lam) = (M + lam D)^-1 (q - lam g),  D = diag(1,1,0), g = [0,0,-1/2]
    f = normal.copy()
    f[0, 0] += lam
    f[1, 1] += lam
    rhs = q.copy()
    rhs[2] += 0.5 * lam
    r, det = solve_sym3(f, rhs)
    phi = r[0] * r[0] + r[1] * r[1] - r[2]
    return phi, r, det


def _secular_bisect(normal, q, lo, hi, rtol, maxiter):
    """Bisect phi on [lo, hi] given phi(lo) > 0 > phi(hi).

    phi is strictly decreasing on the interval where M + lam D is positive
    definite, so the root is unique there.
    """
    phi_lo, r_lo, _ = secular_eval(normal, q, lo)
    phi_hi, r_hi, _ = secular_eval(normal, q, hi)
    lam = hi
    r = r_hi
    phi = phi_hi
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        phi_mid, r_mid, _ = secular_eval(normal, q, mid)
        if not math.isfinite(phi_mid):
            break
        lam = mid
        r = r_mid
        phi = phi_mid
        scale = 1.0 + r_mid[0] * r_mid[0] + r_mid[1] * r_mid[1] + abs(r_mid[2])
        if abs(phi_mid) <= rtol * scale:
            break
        if phi_mid > 0.0:
            lo = mid
            phi_lo = phi_mid
            r_lo = r_mid
        else:
            hi = mid
            phi_hi = phi_mid
            r_hi = r_mid
    if abs(phi_lo) < abs(phi):
        lam, r, phi = lo, r_lo, phi_lo
    if abs(phi_hi) < abs(phi):
        lam, r, phi = hi, r_hi, phi_hi
    return lam, r, phi


def _grid_cost_loops(b, p, xs, ys):
    nx = xs.shape[0]
    ny = ys.shape[0]
    m = b.shape[0]
    out = np.empty((nx, ny))
    for i in range(nx):
        x = xs[i]
        for j in range(ny):
            y = ys[j]
            rz = x * x + y * y
            acc = 0.0
            for k in range(m):
                res = b[k, 0] * x + b[k, 1] * y + b[k, 2] * rz - p[k]
                acc += res * res
            out[i, j] = acc
    return out


def _grid_cost_numpy(b, p, xs, ys):
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    rz = gx * gx + gy * gy
    res = (
        b[:, 0, None, None] * gx
        + b[:, 1, None, None] * gy
        + b[:, 2, None, None] * rz
        - p[:, None, None]
    )
    return np.einsum("kij,kij->ij", res, res)


def _doppler_toa_loops(positions, velocities, emitter, gamma, c):
    n = positions.shape[0]
    dop = np.empty(n)
    toa = np.empty(n)
    for k in range(n):
        dx = positions[k, 0] - emitter[0]
        dy = positions[k, 1] - emitter[1]
        dz = positions[k, 2] - emitter[2]
        rng = math.sqrt(dx * dx + dy * dy + dz * dz)
        radial = velocities[k, 0] * dx + velocities[k, 1] * dy + velocities[k, 2] * dz
        dop[k] = gamma * radial / rng
        toa[k] = rng / c
    return dop, toa


def _doppler_toa_numpy(positions, velocities, emitter, gamma, c):
    los = positions - emitter
    rng = np.sqrt(np.einsum("ij,ij->i", los, los))
    radial = np.einsum("ij,ij->i", velocities, los)
    return gamma * radial / rng, rng / c


solve_sym3 = jit(_solve_sym3)
secular_eval = jit(_secular_eval)
# _secular_bisect resolves ``secular_eval`` at call/compile time, so it picks
# up whichever path is active
secular_bisect = jit(_secular_bisect)
if HAVE_NUMBA:
    grid_cost = jit(_grid_cost_loops)
    doppler_toa = jit(_doppler_toa_loops)
else:
    grid_cost = _grid_cost_numpy
    doppler_toa = _doppler_toa_numpy

grid_cost_py = _grid_cost_numpy
doppler_toa_py = _doppler_toa_numpy
