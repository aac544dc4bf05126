"""Independent reference solvers used by the self-test and the test suite.

Neither routine shares code with the closed-form paths they check: the
constrained LS oracle is a multi-start coarse-to-fine grid search over
the ground plane, and the velocity oracle parametrises the speed circle by
heading and brackets sign changes with Brent's method.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from . import kernels


def _cost_at(b, p, pts):
    rz = np.einsum("ij,ij->i", pts, pts)
    res = pts @ b[:, :2].T + rz[:, None] * b[:, 2] - p
    return np.einsum("ij,ij->i", res, res)


def _refine(b, p, centre, axes, step, resolution, refine, max_walk=400):
    # pattern search on a 5x5 window in the rotated frame; the window walks
    # until its minimum is interior, then the step shrinks
    offs = np.arange(-2, 3, dtype=float)
    si, ti = np.meshgrid(offs, offs, indexing="ij")
    grid = np.column_stack([si.ravel(), ti.ravel()])
    while True:
        for _ in range(max_walk):
            pts = centre + (step * grid) @ axes.T
            cost = _cost_at(b, p, pts)
            k = int(np.argmin(cost))
            centre, best = pts[k], float(cost[k])
            if abs(grid[k, 0]) < 2 and abs(grid[k, 1]) < 2:
                break
        if step <= resolution:
            return centre, best
        step = step / refine


def grid_search_cls(b_plus, p_plus, lo=0.0, hi=100.0, coarse=0.5, resolution=1e-6, refine=5, starts=8):
    """Minimise ``|B+ [x, y, x^2+y^2] - p+|^2`` over the square ``[lo, hi]^2``.

    A coarse axis-aligned grid seeds ``starts`` local refinements from its
    lowest cells (one per 5x5 neighbourhood).  Refinement runs in the
    eigenbasis of the linear block ``B_xy^T B_xy``: a heavily weighted row
    makes the cost a thin straight valley, and compass moves only track it
    when one axis runs along it.
    """
    b = np.ascontiguousarray(b_plus, dtype=float)
    p = np.ascontiguousarray(p_plus, dtype=float)
    _, axes = np.linalg.eigh(b[:, :2].T @ b[:, :2])
    xs = np.arange(lo, hi + 0.5 * coarse, coarse)
    ys = xs.copy()
    cost = kernels.grid_cost(b, p, xs, ys)
    taken = np.zeros(cost.shape, dtype=bool)
    best = (np.inf, None)
    for flat in np.argsort(cost, axis=None):
        i, j = np.unravel_index(flat, cost.shape)
        if taken[i, j]:
            continue
        taken[max(i - 2, 0) : i + 3, max(j - 2, 0) : j + 3] = True
        xy, c = _refine(b, p, np.array([xs[i], ys[j]]), axes, coarse / refine, resolution, refine)
        if c < best[0]:
            best = (c, xy)
        starts -= 1
        if starts == 0:
            break
    return best[1], best[0]


def velocity_roots_numeric(b, d, speed, xtol=1e-14):
    """Headings on the circle ``|u| = speed`` where ``u . b = d``, via brentq.

    ``h(theta) = speed * (b . [cos, sin]) - d`` peaks at the direction of
    ``b`` and bottoms out opposite it, so each half-turn holds at most one
    sign change.
    """
    b = np.asarray(b, dtype=float)
    theta0 = math.atan2(b[1], b[0])

    def h(theta):
        return speed * (b[0] * math.cos(theta) + b[1] * math.sin(theta)) - d

    roots = []
    for a, c in ((theta0, theta0 + math.pi), (theta0 - math.pi, theta0)):
        ha, hc = h(a), h(c)
        if ha == 0.0:
            t = a
        elif hc == 0.0:
            t = c
        elif ha * hc < 0:
            t = brentq(h, a, c, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
        else:
            continue
        roots.append(np.array([speed * math.cos(t), speed * math.sin(t)]))
    return roots
