"""Kinematic bicycle model with acceleration limiting and actuation delay."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import wrap_angle

MAX_SPEED = 2.0
MAX_STEER = 0.434


def _clip(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 0.325
    length: float = 0.5
    width: float = 0.3
    max_accel: float = 3.0
    steering_rate_limit: float = 3.2
    actuation_delay_steps: int = 1

    def __post_init__(self):
        for name in ("wheelbase", "length", "width", "max_accel", "steering_rate_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.actuation_delay_steps < 0:
            raise ValueError("actuation_delay_steps must be >= 0")


@dataclass(frozen=True)
class Action:
    """Speed/steering set-point, clamped to the action box on construction."""

    target_speed: float
    target_steering: float

    def __post_init__(self):
        object.__setattr__(self, "target_speed", _clip(float(self.target_speed), 0.0, MAX_SPEED))
        object.__setattr__(self, "target_steering", _clip(float(self.target_steering), -MAX_STEER, MAX_STEER))

    @classmethod
    def from_normalized(cls, a):
        """Map a [-1, 1]^2 vector onto the (speed, steering) box."""
        return cls((float(a[0]) + 1.0) * 0.5 * MAX_SPEED, float(a[1]) * MAX_STEER)

    def normalized(self):
        return np.array([self.target_speed / (0.5 * MAX_SPEED) - 1.0, self.target_steering / MAX_STEER])


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    speed: float = 0.0
    steering_angle: float = 0.0
    commanded_speed: float = 0.0
    commanded_steering: float = 0.0
    # commands waiting in the actuation delay line, oldest first
    pending: tuple = field(default=())

    @property
    def position(self):
        return np.array([self.x, self.y])

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("x", "y", "heading", "speed", "steering_angle",
                                           "commanded_speed", "commanded_steering")}
        d["pending"] = [list(p) for p in self.pending]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["pending"] = tuple(tuple(p) for p in d.get("pending", ()))
        return cls(**d)


def spawn_state(position, heading, params):
    """Stationary car with an idle (zero) delay line."""
    idle = tuple((0.0, 0.0) for _ in range(params.actuation_delay_steps))
    return VehicleState(float(position[0]), float(position[1]), wrap_angle(float(heading)), pending=idle)


def apply_action(state, action, params):
    """Push ``action`` into the delay line; the command leaving the line becomes active."""
    if not isinstance(action, Action):
        action = Action(*action)
    queue = state.pending + ((action.target_speed, action.target_steering),)
    # a state built without a delay line is padded with idle commands
    while len(queue) < params.actuation_delay_steps + 1:
        queue = ((0.0, 0.0),) + queue
    active, rest = queue[0], queue[1:]
    while len(rest) > params.actuation_delay_steps:
        active, rest = rest[0], rest[1:]
    return replace(state, commanded_speed=active[0], commanded_steering=active[1], pending=rest)


def _approach(value, target, max_delta):
    if value < target:
        return min(value + max_delta, target)
    return max(value - max_delta, target)


def _arc(x, y, psi, v, delta, wheelbase, h):
    """Exact pose update for constant speed and steering over ``h`` seconds."""
    omega = v * math.tan(delta) / wheelbase
    if abs(omega * h) < 1e-9:
        # second-order series avoids 0/0 on straights
        c = math.cos(psi + 0.5 * omega * h)
        s = math.sin(psi + 0.5 * omega * h)
        return x + v * h * c, y + v * h * s, psi + omega * h
    psi1 = psi + omega * h
    r = v / omega
    return x + r * (math.sin(psi1) - math.sin(psi)), y - r * (math.cos(psi1) - math.cos(psi)), psi1


def _rk4_ramp(x, y, psi, v0, dv, d0, dd, wheelbase, h):
    """RK4 over ``h`` with speed and steering varying linearly at rates dv, dd."""

    def f(t, psi_):
        v = v0 + dv * t
        d = d0 + dd * t
        return v * math.cos(psi_), v * math.sin(psi_), v * math.tan(d) / wheelbase

    k1 = f(0.0, psi)
    k2 = f(0.5 * h, psi + 0.5 * h * k1[2])
    k3 = f(0.5 * h, psi + 0.5 * h * k2[2])
    k4 = f(h, psi + h * k3[2])
    x += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    psi += h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return x, y, psi


def step_dynamics(state, params, dt, substeps=10):
    """Integrate one control period.

    Speed and steering slew toward the active commands at their rate limits.
    Each substep is split at the instant a ramp reaches its target: pieces with
    constant inputs use the closed-form circular arc, ramping pieces use RK4.
    """
    if dt <= 0 or substeps < 1:
        raise ValueError("dt must be positive and substeps >= 1")
    h = dt / substeps
    x, y, psi = state.x, state.y, state.heading
    v, delta = state.speed, state.steering_angle
    v_cmd = _clip(state.commanded_speed, 0.0, MAX_SPEED)
    d_cmd = _clip(state.commanded_steering, -MAX_STEER, MAX_STEER)
    L = params.wheelbase
    for _ in range(substeps):
        t = 0.0
        while t < h:
            rem = h - t
            dv = 0.0 if v == v_cmd else math.copysign(params.max_accel, v_cmd - v)
            dd = 0.0 if delta == d_cmd else math.copysign(params.steering_rate_limit, d_cmd - delta)
            if dv == 0.0 and dd == 0.0:
                x, y, psi = _arc(x, y, psi, v, delta, L, rem)
                break
            t_v = abs(v_cmd - v) / params.max_accel if dv else math.inf
            t_d = abs(d_cmd - delta) / params.steering_rate_limit if dd else math.inf
            piece = min(rem, t_v, t_d)
            x, y, psi = _rk4_ramp(x, y, psi, v, dv, delta, dd, L, piece)
            # snap onto targets reached in this piece so rounding cannot stall the loop
            v = v_cmd if piece == t_v else _approach(v, v_cmd, abs(dv) * piece)
            delta = d_cmd if piece == t_d else _approach(delta, d_cmd, abs(dd) * piece)
            if piece == rem:
                break
            t += piece
    return replace(state, x=x, y=y, heading=wrap_angle(psi),
                   speed=_clip(v, 0.0, MAX_SPEED), steering_angle=_clip(delta, -MAX_STEER, MAX_STEER))


def footprint(state, params):
    """Counter-clockwise (4, 2) corners of the chassis rectangle, front-right first."""
    hl, hw = 0.5 * params.length, 0.5 * params.width
    local = np.array([[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]])
    c, s = math.cos(state.heading), math.sin(state.heading)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([state.x, state.y])
