"""Multi-car racing episodes: spawning, synchronous stepping, collisions,
termination and reward emission."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import SpawnConflict, SteppedDoneEpisode
from .ftg import FtgConfig, ftg_control
from .geometry import rect_hits_segments, rects_overlap, segments_near
from .lidar import LidarConfig, average_filter, build_observation, raycast
from .reward import RewardConfig, obstacle_penalty, step_reward, steering_penalty
from .tracks import TrackProjection, progress_delta
from .vehicle import MAX_SPEED, Action, VehicleParams, VehicleState, apply_action, footprint, spawn_state, step_dynamics


class Termination(str, Enum):
    COLLISION = "Collision"
    STALL = "Stall"
    MAX_STEPS = "MaxSteps"
    OVERTAKE_SUCCESS = "OvertakeSuccess"
    LAP_COMPLETE = "LapComplete"


@dataclass(frozen=True)
class EpisodeConfig:
    n_competitors: int = 4
    competitor_offsets: tuple = (2, 30)  # inclusive waypoint range ahead of the ego car
    min_separation: int = 3  # waypoints between any two spawned cars
    max_steps: int = 3000
    stall_steps: int = 5
    stall_epsilon: float = 0.01
    ego_max_speed: float = 2.0
    competitor_max_speed: float = 1.5
    dt: float = 0.1
    substeps: int = 10
    overtake_margin: float = 0.5
    terminate_on_overtake: bool = False
    lap_limit: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "competitor_offsets", tuple(int(o) for o in self.competitor_offsets))
        lo, hi = self.competitor_offsets
        if lo < 2 or hi < lo:
            raise ValueError(f"competitor offsets {self.competitor_offsets} must satisfy 2 <= lo <= hi")
        if self.max_steps <= 0 or self.stall_steps <= 0:
            raise ValueError("max_steps and stall_steps must be positive")
        for v in (self.ego_max_speed, self.competitor_max_speed):
            if not 0 < v <= MAX_SPEED:
                raise ValueError(f"speed cap {v} outside (0, {MAX_SPEED}]")


def training_episode_config(**overrides):
    return replace(EpisodeConfig(), **overrides)


def eval_overtake_episode_config(**overrides):
    """Single competitor exactly eight waypoints ahead, 150 steps, ends on overtake."""
    base = EpisodeConfig(n_competitors=1, competitor_offsets=(8, 8), max_steps=150,
                         terminate_on_overtake=True)
    return replace(base, **overrides)


def slowed_competitor_episode_config(**overrides):
    """One lap to pass a 0.75 m/s competitor starting 2-3 m ahead (4-6 waypoints)."""
    base = EpisodeConfig(n_competitors=1, competitor_offsets=(4, 6), max_steps=3000,
                         competitor_max_speed=0.75, terminate_on_overtake=True, lap_limit=1)
    return replace(base, **overrides)


def timetrial_episode_config(**overrides):
    base = EpisodeConfig(n_competitors=0, max_steps=6000, lap_limit=3)
    return replace(base, **overrides)


@dataclass
class EpisodeOutcome:
    termination: str
    steps: int
    ego_progress: float
    overtaken_count: int
    lap_times: list
    seed: int | None = None


class FtgDriver:
    def __init__(self, config=FtgConfig()):
        self.config = config

    def act(self, scan, state):
        return ftg_control(scan, self.config)


def detect_overtake(ego_progress, competitor_progress, margin=0.5):
    """Cumulative (unwrapped since spawn) progress comparison, so a lap wrap cannot fake a pass."""
    return ego_progress - competitor_progress >= margin


def sample_offsets(rng, n, lo, hi, min_sep):
    """n sorted offsets in [lo, hi], pairwise at least ``min_sep`` apart, uniform over valid sets."""
    if n == 0:
        return []
    if (n - 1) * min_sep > hi - lo:
        raise SpawnConflict(f"cannot place {n} cars {min_sep} waypoints apart within [{lo}, {hi}]")
    # shrink the range so separation becomes plain distinctness, then expand back
    picks = np.sort(rng.choice(np.arange(lo, hi - (n - 1) * (min_sep - 1) + 1), size=n, replace=False))
    return [int(p) + k * (min_sep - 1) for k, p in enumerate(picks)]


@dataclass
class Car:
    state: VehicleState
    proj: TrackProjection
    progress: float  # cumulative arc length, measured from the ego spawn point
    crashed: bool = False
    overtaken: bool = False

    def to_dict(self):
        return {"state": self.state.to_dict(), "proj": asdict(self.proj), "progress": self.progress,
                "crashed": self.crashed, "overtaken": self.overtaken}

    @classmethod
    def from_dict(cls, d):
        return cls(VehicleState.from_dict(d["state"]), TrackProjection(**d["proj"]), d["progress"],
                   d["crashed"], d["overtaken"])


class RaceEnv:
    """Ego car plus FTG (or policy-driven) competitors on one track at a time.

    Single-owner: one caller steps an instance. Construct several instances with
    independent seeds for parallel rollouts.
    """

    def __init__(self, track, config=EpisodeConfig(), vehicle_params=VehicleParams(),
                 lidar=LidarConfig(), reward=RewardConfig(), competitor_drivers=None,
                 record_trace=False):
        self.track = track
        self.config = config
        self.params = vehicle_params
        self.lidar = lidar
        self.reward_config = reward
        self.competitor_drivers = competitor_drivers
        self.record_trace = record_trace
        self.rng = np.random.default_rng(config.seed)
        self.trace = []
        self.ego = None
        self.competitors = []
        self.last_scan = None
        self.done = True

    # -- episode lifecycle ---------------------------------------------------

    def _drivers(self):
        drivers = self.competitor_drivers
        if drivers is None:
            drivers = [FtgDriver(FtgConfig(max_speed=self.config.competitor_max_speed))]
        if callable(drivers) and not isinstance(drivers, (list, tuple)):
            drivers = drivers()
        if len(drivers) == 1 and self.config.n_competitors > 1:
            drivers = list(drivers) * self.config.n_competitors
        return list(drivers)[: self.config.n_competitors]

    def reset(self, seed=None, track=None, ego_waypoint=None):
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        if track is not None:
            self.track = track
        cfg, tr = self.config, self.track
        n_wp = tr.n_waypoints
        lo, hi = cfg.competitor_offsets
        if hi >= n_wp:
            raise SpawnConflict(f"offset range [{lo}, {hi}] exceeds the {n_wp} waypoints of {tr.id}")
        ego_wp = int(self.rng.integers(n_wp)) if ego_waypoint is None else int(ego_waypoint)
        offsets = sample_offsets(self.rng, cfg.n_competitors, lo, hi, cfg.min_separation)

        self.ego_waypoint = ego_wp
        self.offsets = offsets
        self.ego = self._spawn(ego_wp, 0.0)
        base_arc = tr.waypoint_arc(ego_wp)
        self.competitors = []
        for off in offsets:
            ahead = (tr.waypoint_arc(ego_wp + off) - base_arc) % tr.total_length
            self.competitors.append(self._spawn(ego_wp + off, ahead))
        self.drivers = self._drivers()
        self.steps = 0
        self.stall_count = 0
        self.prev_steer = 0.0
        self.lap_times = []
        self.last_lap_time = 0.0
        self.termination = None
        self.done = False
        self.trace = []
        obs, _ = self._observe()
        return obs

    def _spawn(self, waypoint, progress):
        pos, heading = self.track.waypoint_pose(waypoint)
        state = spawn_state(pos, heading, self.params)
        return Car(state, self.track.project(pos), progress)

    # -- sensing -------------------------------------------------------------

    def _scan(self, car, others):
        fps = [footprint(o.state, self.params) for o in others]
        return raycast(self.track.wall_segments, fps, car.state, self.lidar.ray_count,
                       self.lidar.max_range, rng=self.rng, noise_sigma=self.lidar.noise_sigma)

    def _observe(self):
        scan = self._scan(self.ego, self.competitors)
        self.last_scan = scan  # lets a classical controller drive the ego car
        averaged = average_filter(scan)
        obs = build_observation(self.ego.state.speed, self.ego.state.steering_angle, averaged,
                                self.lidar.max_range)
        return obs, averaged

    # -- stepping ------------------------------------------------------------

    def _advance(self, car, action, cap):
        action = Action(min(action.target_speed, cap), action.target_steering)
        state = apply_action(car.state, action, self.params)
        car.state = step_dynamics(state, self.params, self.config.dt, self.config.substeps)

    def _hits_wall(self, corners, center):
        reach = 0.5 * math.hypot(self.params.length, self.params.width) + 0.2
        near = self.track.wall_segments[segments_near(self.track.wall_segments, center, reach)]
        return rect_hits_segments(corners, near)

    def step(self, ego_action):
        if self.done:
            raise SteppedDoneEpisode("episode already terminated; call reset()")
        cfg = self.config
        if not isinstance(ego_action, Action):
            ego_action = Action(*ego_action)

        # competitor decisions all come from the pre-step snapshot
        everyone = [self.ego] + self.competitors
        comp_actions = []
        for k, (car, driver) in enumerate(zip(self.competitors, self.drivers)):
            if car.crashed:
                comp_actions.append(None)
                continue
            others = [c for c in everyone if c is not car]
            comp_actions.append(driver.act(self._scan(car, others), car.state))

        self._advance(self.ego, ego_action, cfg.ego_max_speed)
        for car, act in zip(self.competitors, comp_actions):
            if act is not None:
                self._advance(car, act, cfg.competitor_max_speed)

        ego_fp = footprint(self.ego.state, self.params)
        collided = self._hits_wall(ego_fp, self.ego.state.position)
        comp_fps = [footprint(c.state, self.params) for c in self.competitors]
        for fp in comp_fps:
            if rects_overlap(ego_fp, fp):
                collided = True
        for i, car in enumerate(self.competitors):
            if car.crashed:
                continue
            hit = self._hits_wall(comp_fps[i], car.state.position)
            for j, other in enumerate(self.competitors):
                if j != i and rects_overlap(comp_fps[i], comp_fps[j]):
                    hit = True
                    other.crashed = True
            if hit:
                car.crashed = True
        for car in self.competitors:
            if car.crashed:
                car.state = replace(car.state, speed=0.0, commanded_speed=0.0,
                                    pending=tuple((0.0, 0.0) for _ in car.state.pending))

        prev_progress = self.ego.progress
        delta = self._update_progress(self.ego)
        for car in self.competitors:
            self._update_progress(car)
        self.steps += 1
        self.stall_count = self.stall_count + 1 if delta < cfg.stall_epsilon else 0

        for car in self.competitors:
            if not car.overtaken and detect_overtake(self.ego.progress, car.progress, cfg.overtake_margin):
                car.overtaken = True
        self._record_laps(prev_progress)

        obs, averaged = self._observe()
        d_steer = abs(ego_action.target_steering - self.prev_steer)
        self.prev_steer = ego_action.target_steering
        min_d = float(averaged.min())
        rc = self.reward_config
        breakdown = step_reward(delta, obstacle_penalty(min_d, rc), steering_penalty(d_steer, rc), collided, rc)

        term = None
        if collided:
            term = Termination.COLLISION
        elif self.stall_count >= cfg.stall_steps:
            term = Termination.STALL
        elif cfg.terminate_on_overtake and self.competitors and all(c.overtaken for c in self.competitors):
            term = Termination.OVERTAKE_SUCCESS
        elif cfg.lap_limit is not None and len(self.lap_times) >= cfg.lap_limit:
            term = Termination.LAP_COMPLETE
        elif self.steps >= cfg.max_steps:
            term = Termination.MAX_STEPS
        if term is not None:
            self.termination = term
            self.done = True

        info = {
            "step": self.steps,
            "termination": term.value if term else None,
            "truncated": term is Termination.MAX_STEPS,
            "progress": delta,
            "ego_progress": self.ego.progress,
            "overtaken_count": self.overtaken_count,
            "lap_times": list(self.lap_times),
            "min_distance": min_d,
            "delta_steer": d_steer,
        }
        if self.record_trace:
            self.trace.append({
                "step": self.steps,
                "poses": [[c.state.x, c.state.y, c.state.heading] for c in [self.ego] + self.competitors],
                "actions": [[ego_action.target_speed, ego_action.target_steering]]
                + [None if a is None else [a.target_speed, a.target_steering] for a in comp_actions],
                "progress": delta,
                "min_distance": min_d,
                "delta_steer": d_steer,
                "reward": breakdown.to_dict(),
                "termination": info["termination"],
            })
        return obs, breakdown, self.done, info

    def _update_progress(self, car):
        proj = self.track.project(car.state.position, max_radius=np.inf)
        delta = progress_delta(self.track, car.proj, proj)
        car.proj = proj
        car.progress += delta
        return delta

    def _record_laps(self, prev_progress):
        length = self.track.total_length
        laps_done = len(self.lap_times)
        target = (laps_done + 1) * length
        cur = self.ego.progress
        if cur >= target > prev_progress:
            frac = (target - prev_progress) / (cur - prev_progress)
            t_cross = (self.steps - 1 + frac) * self.config.dt
            self.lap_times.append(t_cross - self.last_lap_time)
            self.last_lap_time = t_cross

    # -- bookkeeping ---------------------------------------------------------

    @property
    def overtaken_count(self):
        return sum(c.overtaken for c in self.competitors)

    def outcome(self):
        return EpisodeOutcome(
            termination=self.termination.value if self.termination else None,
            steps=self.steps,
            ego_progress=self.ego.progress,
            overtaken_count=self.overtaken_count,
            lap_times=list(self.lap_times),
            seed=self.config.seed,
        )

    def get_state(self):
        """JSON-serialisable snapshot of the whole episode, including the RNG."""
        return {
            "track": self.track.id,
            "ego": self.ego.to_dict() if self.ego else None,
            "competitors": [c.to_dict() for c in self.competitors],
            "offsets": getattr(self, "offsets", []),
            "ego_waypoint": getattr(self, "ego_waypoint", 0),
            "steps": getattr(self, "steps", 0),
            "stall_count": getattr(self, "stall_count", 0),
            "prev_steer": getattr(self, "prev_steer", 0.0),
            "lap_times": list(getattr(self, "lap_times", [])),
            "last_lap_time": getattr(self, "last_lap_time", 0.0),
            "termination": self.termination.value if getattr(self, "termination", None) else None,
            "done": self.done,
            "rng": self.rng.bit_generator.state,
        }

    def set_state(self, snap, track=None):
        if track is not None:
            self.track = track
        self.ego = Car.from_dict(snap["ego"]) if snap["ego"] else None
        self.competitors = [Car.from_dict(c) for c in snap["competitors"]]
        self.offsets = snap["offsets"]
        self.ego_waypoint = snap["ego_waypoint"]
        self.steps = snap["steps"]
        self.stall_count = snap["stall_count"]
        self.prev_steer = snap["prev_steer"]
        self.lap_times = list(snap["lap_times"])
        self.last_lap_time = snap["last_lap_time"]
        self.termination = Termination(snap["termination"]) if snap["termination"] else None
        self.done = snap["done"]
        self.rng.bit_generator.state = snap["rng"]
        self.drivers = self._drivers()
        self.trace = []
        self.last_scan = None

    def write_trace(self, path, header=None):
        with open(path, "w") as fh:
            if header is not None:
                fh.write(json.dumps({"header": header}) + "\n")
            for rec in self.trace:
                fh.write(json.dumps(rec) + "\n")
