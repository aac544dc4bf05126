import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavloc import DegenerateGeometry, TrajectoryInputs, VelocityBranch, solve_velocity, velocity_constraint
from uavloc.oracles import velocity_roots_numeric
from uavloc.trajectory import _pick_nearer, line_circle_roots, rechosen_speed_roots

DELTA = 0.05


def make_inputs(b, d, speed, v_max=30.0, gamma=1.0, v_prev=None, p_hat=(10.0, -4.0)):
    """Inputs whose geometry gives ``p_K - p_hat = b`` and scalar ``d`` at ``speed``."""
    p_hat = np.asarray(p_hat, dtype=float)
    p_k = np.array([p_hat[0] + b[0], p_hat[1] + b[1], 50.0])
    f_bar = gamma * (d + DELTA * speed * speed)
    return TrajectoryInputs(p_k, p_hat, f_bar, speed, v_max, gamma, DELTA, v_prev)


def test_constraint_hand_example():
    inputs = make_inputs([1.0, 0.0], 3.0, 5.0)
    assert velocity_constraint(inputs, [3.0, 4.0]) == pytest.approx(0.0, abs=1e-12)
    assert velocity_constraint(inputs, [3.0, -4.0]) == pytest.approx(0.0, abs=1e-12)


def test_constraint_zero_velocity():
    inputs = make_inputs([1.0, 0.0], 3.0, 5.0)
    # with |u| = 0 the scalar is f_bar / gamma
    assert velocity_constraint(inputs, [0.0, 0.0]) == pytest.approx(-inputs.f_bar_next, rel=1e-15)


def test_two_roots_for_hand_example():
    roots, disc = line_circle_roots(np.array([1.0, 0.0]), 3.0, 5.0)
    assert disc > 0
    got = sorted(tuple(np.round(r, 12)) for r in roots)
    assert got == [(3.0, -4.0), (3.0, 4.0)]


def test_selection_unique_and_label_free():
    inputs = make_inputs([1.0, 0.0], 3.0, 5.0, v_prev=[3.0, 4.0])
    cmd = solve_velocity(inputs)
    assert cmd.branch is VelocityBranch.TWO_ROOT
    assert abs(velocity_constraint(inputs, cmd.u)) < 1e-12
    roots, _ = line_circle_roots(inputs.b, inputs.d(5.0), 5.0)
    a = _pick_nearer(roots, inputs)
    b = _pick_nearer(roots[::-1], inputs)
    np.testing.assert_array_equal(a, b)
    # the steering sample was flown at (3, 4); the reflected heading ends nearer
    np.testing.assert_allclose(cmd.u, [3.0, -4.0], atol=1e-12)


def test_selection_prefers_strictly_nearer_root():
    inputs = make_inputs([1.0, 0.0], 3.0, 5.0)
    roots = [np.array([3.0, 4.0]), np.array([-1.0, 0.0])]  # not mirror images
    np.testing.assert_array_equal(_pick_nearer(roots, inputs), [-1.0, 0.0])


def test_tangent_case():
    inputs = make_inputs([0.0, 1.0], 7.0, 7.0)
    cmd = solve_velocity(inputs)
    assert cmd.branch is VelocityBranch.TWO_ROOT
    # f_bar round trip leaves an O(eps) discriminant, i.e. O(sqrt eps) in u
    assert abs(cmd.delta2) <= 1e-12 * 49.0
    np.testing.assert_allclose(cmd.u, [0.0, 7.0], atol=1e-6)


def test_no_intersection_uses_rechosen_speed():
    inputs = make_inputs([3.0, 4.0], 80.0, 10.0)
    cmd = solve_velocity(inputs)
    assert cmd.branch is VelocityBranch.RECHOSEN_SPEED
    assert cmd.delta2 < 0
    assert not cmd.clamped
    d_new = inputs.d(cmd.speed_used)
    # the new speed makes the line tangent to the circle
    assert abs(d_new) == pytest.approx(cmd.speed_used * 5.0, rel=1e-8)
    assert np.hypot(*cmd.u) == pytest.approx(cmd.speed_used, rel=1e-9)
    assert cmd.u @ inputs.b == pytest.approx(d_new, rel=1e-9)
    roots, _ = line_circle_roots(inputs.b, d_new, cmd.speed_used)
    assert roots and np.allclose(roots[0], roots[1], atol=1e-6 * cmd.speed_used)


def test_rechosen_speed_clamped():
    # tangency needs a speed above v_max
    inputs = make_inputs([1.0, 0.0], 60.0, 10.0, v_max=12.0)
    cmd = solve_velocity(inputs)
    assert cmd.branch is VelocityBranch.RECHOSEN_SPEED
    s_roots, _ = rechosen_speed_roots(inputs)
    assert math.sqrt(min(s for s in s_roots if s > 0)) > 12.0
    assert cmd.clamped and cmd.speed_used == 12.0
    assert np.hypot(*cmd.u) == pytest.approx(12.0, rel=1e-12)
    # d > 0, so the command points along b
    assert cmd.u @ inputs.b > 0


def test_no_solution_keeps_previous():
    inputs = make_inputs([1.0, 0.0], -101.25, 5.0, v_prev=[4.0, 3.0])
    s_roots, disc = rechosen_speed_roots(inputs)
    assert disc < 0 and not s_roots
    cmd = solve_velocity(inputs)
    assert cmd.branch is VelocityBranch.NO_SOLUTION_KEEP_PREVIOUS
    np.testing.assert_array_equal(cmd.u, [4.0, 3.0])


def test_uav_over_estimate():
    with pytest.raises(DegenerateGeometry):
        solve_velocity(make_inputs([0.0, 0.0], 1.0, 5.0))


def test_speed_above_vmax_rejected():
    with pytest.raises(ValueError):
        make_inputs([1.0, 0.0], 1.0, 40.0, v_max=30.0)


def test_small_b2_needs_no_special_casing():
    inputs = make_inputs([2.0, 1e-14], 1.0, 3.0)
    cmd = solve_velocity(inputs)
    assert cmd.branch is VelocityBranch.TWO_ROOT
    assert abs(velocity_constraint(inputs, cmd.u)) < 1e-12


def test_discriminant_sign_matches_geometry():
    rng = np.random.default_rng(8)
    for _ in range(100):
        b = rng.normal(0, 20, 2)
        speed = rng.uniform(1, 30)
        d = rng.normal(0, 1.2 * speed * np.linalg.norm(b))
        _, disc = line_circle_roots(b, d, speed)
        assert (disc >= 0) == (abs(d) <= speed * np.linalg.norm(b))


def test_roots_match_numeric_oracle():
    rng = np.random.default_rng(21)
    for _ in range(200):
        b = rng.normal(0, 20, 2)
        speed = rng.uniform(1, 30)
        d = rng.uniform(-0.95, 0.95) * speed * np.linalg.norm(b)
        closed, _ = line_circle_roots(b, d, speed)
        numeric = velocity_roots_numeric(b, d, speed)
        assert len(closed) == len(numeric) == 2
        for u in numeric:
            assert min(np.linalg.norm(u - c) for c in closed) <= 1e-10 * max(1.0, speed)


finite = st.floats(-200, 200, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(finite, finite, st.floats(-5000, 5000), st.floats(0.5, 30), st.floats(0.0, 40), finite, finite)
def test_command_invariants(bx, by, f_bar, speed, extra, vx, vy):
    if math.hypot(bx, by) < 1e-6:
        return
    v_max = speed + extra
    inputs = TrajectoryInputs([bx, by, 50.0], [0.0, 0.0], f_bar, speed, v_max, 1.0, DELTA, [vx, vy])
    cmd = solve_velocity(inputs)
    if cmd.branch is VelocityBranch.NO_SOLUTION_KEEP_PREVIOUS:
        np.testing.assert_array_equal(cmd.u, [vx, vy])
        return
    assert cmd.speed_used <= v_max
    assert np.hypot(*cmd.u) == pytest.approx(cmd.speed_used, rel=1e-9, abs=1e-12)
    if cmd.branch is VelocityBranch.TWO_ROOT:
        scale = max(1.0, abs(inputs.d(speed)), speed * math.hypot(bx, by))
        assert abs(velocity_constraint(inputs, cmd.u)) <= 1e-9 * scale
