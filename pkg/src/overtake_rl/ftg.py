"""Follow the Gap reactive controller driving the competitor cars."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoGapFound
from .vehicle import MAX_SPEED, MAX_STEER, Action

STRAIGHT_TOLERANCE = 0.2  # rad of steering before the speed taper starts
MIN_SPEED_FRACTION = 0.5  # speed fraction kept at full steering lock


@dataclass(frozen=True)
class FtgConfig:
    bubble_radius: float = 0.4
    gap_threshold: float = 1.2
    max_speed: float = 1.5
    steering_gain: float = 1.0
    field_of_view: float = np.pi  # rays outside +-fov/2 never count as free

    def __post_init__(self):
        for name in ("bubble_radius", "gap_threshold", "max_speed", "steering_gain", "field_of_view"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_speed > MAX_SPEED:
            raise ValueError(f"max_speed must not exceed {MAX_SPEED}")


def safety_bubble(ranges, angles, bubble_radius, max_range=np.inf):
    """Copy of ``ranges`` with every ray passing within ``bubble_radius`` of the
    nearest hit point set to zero. Rays that saw nothing (at max_range) hit no point."""
    r = ranges.min()
    if r >= max_range:
        return ranges.copy()
    # every ray attaining the minimum gets a bubble, keeping mirrored scans symmetric
    hits = np.flatnonzero(ranges == r)
    rel = angles[None, :] - angles[hits, None]
    # perpendicular distance from the hit point to each forward-facing ray
    near = ((np.abs(rel) < 0.5 * np.pi) & (r * np.abs(np.sin(rel)) <= bubble_radius)).any(axis=0)
    near[hits] = True
    masked = ranges.copy()
    masked[near] = 0.0
    return masked


def free_runs(free):
    """(start, end) inclusive index pairs of each contiguous True run."""
    padded = np.concatenate([[False], free, [False]]).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def _gap_key(run, ranges, angles):
    s, e = run
    return (e - s + 1, float(ranges[s:e + 1].max()), -abs(0.5 * (angles[s] + angles[e])))


def select_gap(masked, angles, gap_threshold):
    """Widest run of rays beyond ``gap_threshold``.

    Ties go to the deeper gap (larger maximum range), then to the gap whose
    centre is closer to straight ahead. Returns a list of the fully tied
    winners (normally one); raises NoGapFound if no ray is free.
    """
    runs = free_runs(masked > gap_threshold)
    if not runs:
        raise NoGapFound("every ray is at or below the gap threshold")
    keys = [_gap_key(r, masked, angles) for r in runs]
    best = max(keys)
    return [r for r, k in zip(runs, keys) if k == best]


def gap_center_angle(gaps, angles):
    # mirror-image ties (equally wide, deep and centred) average out to straight ahead
    return float(np.mean([0.5 * (angles[s] + angles[e]) for s, e in gaps]))


def ftg_control(scan, config=FtgConfig()):
    """Follow the Gap on a raw scan. A fully blocked scan yields Action(0, 0)."""
    ranges = np.asarray(scan.ranges, dtype=np.float64)
    if ranges.size == 0:
        raise ValueError("empty scan")
    masked = safety_bubble(ranges, scan.angles, config.bubble_radius, scan.max_range)
    masked[np.abs(scan.angles) > 0.5 * config.field_of_view] = 0.0
    try:
        gaps = select_gap(masked, scan.angles, config.gap_threshold)
    except NoGapFound:
        return Action(0.0, 0.0)
    heading = config.steering_gain * gap_center_angle(gaps, scan.angles)
    steer = min(max(heading, -MAX_STEER), MAX_STEER)
    excess = abs(steer) - STRAIGHT_TOLERANCE
    if excess > 0:
        frac = 1.0 - (1.0 - MIN_SPEED_FRACTION) * excess / (MAX_STEER - STRAIGHT_TOLERANCE)
    else:
        frac = 1.0
    return Action(config.max_speed * frac, steer)
