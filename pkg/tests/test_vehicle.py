import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from overtake_rl.vehicle import (MAX_SPEED, MAX_STEER, Action, VehicleParams, VehicleState, apply_action,
                                 footprint, spawn_state, step_dynamics)

NO_DELAY = VehicleParams(actuation_delay_steps=0)


def fit_circle(xy):
    """Algebraic least-squares circle fit (Kasa); returns the radius."""
    x, y = xy[:, 0], xy[:, 1]
    A = np.column_stack([x, y, np.ones_like(x)])
    b = x * x + y * y
    cx2, cy2, c = np.linalg.lstsq(A, b, rcond=None)[0]
    cx, cy = cx2 / 2, cy2 / 2
    return math.sqrt(c + cx * cx + cy * cy)


# -- actions and delay -------------------------------------------------------

def test_action_clamps():
    a = Action(3.0, 0.6)
    assert a.target_speed == 2.0 and a.target_steering == MAX_STEER
    b = Action(-1.0, -0.9)
    assert b.target_speed == 0.0 and b.target_steering == -MAX_STEER


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_normalized_roundtrip(a0, a1):
    act = Action.from_normalized([a0, a1])
    np.testing.assert_allclose(act.normalized(), [a0, a1], atol=1e-12)


def test_no_delay_command_is_immediate():
    s = apply_action(spawn_state((0, 0), 0.0, NO_DELAY), Action(2.0, 0.1), NO_DELAY)
    assert s.commanded_speed == 2.0 and s.commanded_steering == 0.1


def test_delay_two_steps():
    p = VehicleParams(actuation_delay_steps=2)
    s = spawn_state((0, 0), 0.0, p)
    issued = [Action(0.5, 0.1), Action(1.0, 0.2), Action(1.5, 0.3), Action(2.0, 0.4)]
    active = []
    for a in issued:
        s = apply_action(s, a, p)
        active.append(s.commanded_speed)
    # command issued at step t is active from step t + 2
    assert active == [0.0, 0.0, 0.5, 1.0]


def test_default_delay_is_one_step():
    p = VehicleParams()
    s = apply_action(spawn_state((0, 0), 0.0, p), Action(1.0, 0.0), p)
    assert s.commanded_speed == 0.0
    s = apply_action(s, Action(0.2, 0.0), p)
    assert s.commanded_speed == 1.0


def test_params_validation():
    with pytest.raises(ValueError):
        VehicleParams(wheelbase=0.0)
    with pytest.raises(ValueError):
        VehicleParams(actuation_delay_steps=-1)


# -- dynamics ----------------------------------------------------------------

def test_straight_line():
    s = VehicleState(0.0, 0.0, 0.3, speed=1.0, commanded_speed=1.0)
    out = step_dynamics(s, NO_DELAY, 1.0, 10)
    assert out.x == pytest.approx(math.cos(0.3), abs=1e-12)
    assert out.y == pytest.approx(math.sin(0.3), abs=1e-12)
    assert out.heading == 0.3


def test_acceleration_limit():
    p = VehicleParams(max_accel=2.0, actuation_delay_steps=0)
    s = apply_action(VehicleState(0.0, 0.0, 0.0), Action(2.0, 0.0), p)
    out = step_dynamics(s, p, 0.5, 10)
    assert out.speed == pytest.approx(1.0, abs=1e-12)
    # distance under constant acceleration: a t^2 / 2
    assert out.x == pytest.approx(0.25, abs=1e-12)


def test_steering_rate_limit():
    s = apply_action(VehicleState(0.0, 0.0, 0.0), Action(0.0, 0.434), NO_DELAY)
    out = step_dynamics(s, NO_DELAY, 0.1, 10)
    assert out.steering_angle == pytest.approx(0.32, abs=1e-12)


@pytest.mark.parametrize("delta", np.linspace(0.05, 0.434, 10))
def test_turning_radius(delta):
    s = apply_action(VehicleState(0.0, 0.0, 0.0), Action(1.0, delta), NO_DELAY)
    for _ in range(20):  # settle speed and steering
        s = step_dynamics(s, NO_DELAY, 0.1, 10)
    pts = []
    for _ in range(200):
        s = step_dynamics(s, NO_DELAY, 0.05, 5)
        pts.append((s.x, s.y))
    expected = NO_DELAY.wheelbase / math.tan(delta)
    assert fit_circle(np.array(pts)) == pytest.approx(expected, rel=0.01)


def test_turning_radius_example():
    assert 0.325 / math.tan(0.2) == pytest.approx(1.603, abs=1e-3)


def test_zero_speed_stays_put():
    p = VehicleParams()
    s = spawn_state((1.0, 2.0), 0.7, p)
    for k in range(50):
        s = apply_action(s, Action(0.0, 0.3 * (-1) ** k), p)
        s = step_dynamics(s, p, 0.1, 10)
    assert (s.x, s.y) == (1.0, 2.0)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-3, 3)), min_size=1, max_size=40))
def test_bounds_hold(actions):
    p = VehicleParams()
    s = spawn_state((0, 0), 0.0, p)
    for v, d in actions:
        s = step_dynamics(apply_action(s, Action(v, d), p), p, 0.1, 10)
        assert 0.0 <= s.speed <= MAX_SPEED
        assert abs(s.steering_angle) <= MAX_STEER
        assert -math.pi < s.heading <= math.pi


def test_substep_convergence():
    p = VehicleParams()
    rng = np.random.default_rng(7)
    cmds = [Action(*rng.uniform([0, -0.434], [2, 0.434])) for _ in range(100)]
    finals = []
    for sub in (10, 20):
        s = spawn_state((0, 0), 0.0, p)
        for a in cmds:
            s = step_dynamics(apply_action(s, a, p), p, 0.1, sub)
        finals.append(np.array([s.x, s.y]))
    assert np.linalg.norm(finals[0] - finals[1]) < 1e-3


def test_invalid_step_arguments():
    with pytest.raises(ValueError):
        step_dynamics(VehicleState(0, 0, 0), NO_DELAY, 0.0, 10)
    with pytest.raises(ValueError):
        step_dynamics(VehicleState(0, 0, 0), NO_DELAY, 0.1, 0)


def test_state_dict_roundtrip():
    p = VehicleParams()
    s = apply_action(spawn_state((1, 2), 0.5, p), Action(1.2, -0.1), p)
    assert VehicleState.from_dict(s.to_dict()) == s


# -- footprint ---------------------------------------------------------------

def test_footprint_axis_aligned():
    fp = footprint(VehicleState(0.0, 0.0, 0.0), VehicleParams())
    assert {tuple(c) for c in fp} == {(0.25, -0.15), (0.25, 0.15), (-0.25, 0.15), (-0.25, -0.15)}


def test_footprint_quarter_turn():
    fp = footprint(VehicleState(0.0, 0.0, math.pi / 2), VehicleParams())
    got = sorted(tuple(np.round(c, 12)) for c in fp)
    assert got == sorted([(0.15, 0.25), (-0.15, 0.25), (-0.15, -0.25), (0.15, -0.25)])


def test_footprint_rotation_oracle():
    st_ = VehicleState(1.0, -2.0, math.pi / 4)
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    for (lx, ly), got in zip([(0.25, -0.15), (0.25, 0.15), (-0.25, 0.15), (-0.25, -0.15)],
                             footprint(st_, VehicleParams())):
        assert got[0] == pytest.approx(1.0 + c * lx - s * ly, abs=1e-12)
        assert got[1] == pytest.approx(-2.0 + s * lx + c * ly, abs=1e-12)
