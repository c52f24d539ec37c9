"""Planar LiDAR: 270 degree raycast against walls and other cars, sector averaging,
and assembly of the 12-element agent observation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import IndivisibleRayCount
from .geometry import rect_edges, segments_near
from .vehicle import MAX_SPEED, MAX_STEER

FOV = 1.5 * math.pi
DEFAULT_RAY_COUNT = 1080
DEFAULT_MAX_RANGE = 10.0
N_SECTORS = 10
OBS_DIM = 2 + N_SECTORS
MIN_NORM_DISTANCE = 1e-3


@dataclass(frozen=True)
class LidarConfig:
    ray_count: int = DEFAULT_RAY_COUNT
    max_range: float = DEFAULT_MAX_RANGE
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.ray_count < N_SECTORS or self.ray_count % N_SECTORS:
            raise IndivisibleRayCount(f"ray_count {self.ray_count} must be a positive multiple of {N_SECTORS}")


@dataclass(frozen=True, eq=False)
class LidarScan:
    ranges: np.ndarray
    angles: np.ndarray  # relative to heading, ascending from -135 deg
    max_range: float
    fov: float = FOV


_angle_cache = {}


def ray_angles(ray_count):
    """Bin-centred ray angles over the 270 degree fan.

    Built as an exact mirror image (``angles[::-1] == -angles`` bitwise) so that
    reflecting a scene reverses the scan without rounding asymmetry.
    """
    angles = _angle_cache.get(ray_count)
    if angles is None:
        step = FOV / ray_count
        half = -0.5 * FOV + (np.arange(ray_count // 2) + 0.5) * step
        if ray_count % 2:
            angles = np.concatenate([half, [0.0], -half[::-1]])
        else:
            angles = np.concatenate([half, -half[::-1]])
        angles.flags.writeable = False
        _angle_cache[ray_count] = angles
    return angles


@numba.njit(cache=True)
def _ray_hit(ox, oy, dx, dy, sx0, sy0, sx1, sy1):
    ex = sx1 - sx0
    ey = sy1 - sy0
    denom = dx * ey - dy * ex
    if denom == 0.0:
        return np.inf
    wx = sx0 - ox
    wy = sy0 - oy
    t = (wx * ey - wy * ex) / denom
    u = (wx * dy - wy * dx) / denom
    if t > 0.0 and 0.0 <= u <= 1.0:
        return t
    return np.inf


@numba.njit(cache=True)
def _cast_binned(ox, oy, heading, angles, seg, max_range, out):
    """Visit only the rays whose angle falls inside each segment's angular span."""
    n = angles.shape[0]
    a0 = angles[0]
    step = (angles[n - 1] - angles[0]) / (n - 1) if n > 1 else 1.0
    two_pi = 2.0 * np.pi
    cos_t = np.cos(angles + heading)
    sin_t = np.sin(angles + heading)
    for i in range(n):
        out[i] = max_range
    for j in range(seg.shape[0]):
        b0 = np.arctan2(seg[j, 1] - oy, seg[j, 0] - ox) - heading
        b1 = np.arctan2(seg[j, 3] - oy, seg[j, 2] - ox) - heading
        b0 = (b0 + np.pi) % two_pi - np.pi
        span = (b1 - b0 + np.pi) % two_pi - np.pi
        lo = b0 if span >= 0 else b0 + span
        hi = lo + abs(span)
        for shift in (0.0, -two_pi, two_pi):
            i0 = int(np.floor((lo + shift - a0) / step)) - 1
            i1 = int(np.ceil((hi + shift - a0) / step)) + 1
            if i1 < 0 or i0 > n - 1:
                continue
            if i0 < 0:
                i0 = 0
            if i1 > n - 1:
                i1 = n - 1
            for i in range(i0, i1 + 1):
                t = _ray_hit(ox, oy, cos_t[i], sin_t[i], seg[j, 0], seg[j, 1], seg[j, 2], seg[j, 3])
                if t < out[i]:
                    out[i] = t


def cast_rays(origin, heading, angles, segments, max_range):
    """Nearest hit distance along each ray (angles relative to ``heading``), capped at max_range."""
    out = np.empty(len(angles))
    segments = np.ascontiguousarray(segments, dtype=np.float64).reshape(-1, 4)
    _cast_binned(float(origin[0]), float(origin[1]), float(heading),
                 np.ascontiguousarray(angles, dtype=np.float64), segments, float(max_range), out)
    return out


def cast_rays_bruteforce(origin, heading, angles, segments, max_range):
    """Every ray against every segment; reference implementation for tests."""
    theta = np.asarray(angles)[:, None] + heading
    d = np.stack([np.cos(theta), np.sin(theta)], axis=-1)  # (R, 1, 2)
    s0 = segments[None, :, 0:2]
    e = segments[None, :, 2:4] - s0
    w = s0 - np.asarray(origin)
    denom = d[..., 0] * e[..., 1] - d[..., 1] * e[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[..., 0] * e[..., 1] - w[..., 1] * e[..., 0]) / denom
        u = (w[..., 0] * d[..., 1] - w[..., 1] * d[..., 0]) / denom
    ok = (denom != 0) & (t > 0) & (u >= 0) & (u <= 1)
    t = np.where(ok, t, np.inf)
    return np.minimum(t.min(axis=1), max_range) if segments.size else np.full(len(angles), float(max_range))


def scene_segments(wall_segments, other_footprints=()):
    """Stack wall segments with the edges of every other car's footprint."""
    parts = [np.asarray(wall_segments, dtype=np.float64).reshape(-1, 4)]
    parts.extend(rect_edges(fp) for fp in other_footprints)
    return np.vstack(parts)


def raycast(wall_segments, other_footprints, origin_state, ray_count=DEFAULT_RAY_COUNT,
            max_range=DEFAULT_MAX_RANGE, rng=None, noise_sigma=0.0):
    """Scan from the sensing car's centre; its own footprint is never part of the scene."""
    if ray_count < N_SECTORS or ray_count % N_SECTORS:
        raise IndivisibleRayCount(f"ray_count {ray_count} must be a positive multiple of {N_SECTORS}")
    origin = (origin_state.x, origin_state.y)
    walls = np.asarray(wall_segments, dtype=np.float64).reshape(-1, 4)
    walls = walls[segments_near(walls, origin, max_range)]
    segs = scene_segments(walls, other_footprints)
    angles = ray_angles(ray_count)
    ranges = cast_rays(origin, origin_state.heading, angles, segs, max_range)
    if noise_sigma > 0.0 and rng is not None:
        ranges = ranges + rng.normal(0.0, noise_sigma, size=ranges.shape)
    ranges = np.clip(ranges, 1e-6, max_range)
    return LidarScan(ranges=ranges, angles=angles, max_range=float(max_range))


def average_filter(scan, sectors=N_SECTORS):
    """Mean of each contiguous block of rays, in angular order."""
    ranges = scan.ranges if isinstance(scan, LidarScan) else np.asarray(scan, dtype=np.float64)
    if sectors < 1 or len(ranges) % sectors:
        raise IndivisibleRayCount(f"{len(ranges)} rays cannot be split into {sectors} sectors")
    return ranges.reshape(sectors, -1).mean(axis=1)


def build_observation(speed, steering_angle, averaged, max_range=DEFAULT_MAX_RANGE):
    """(v / 2, steer / 0.434, clip(d_i / max_range, 1e-3, 1)) as a length-12 vector."""
    d = np.clip(np.asarray(averaged, dtype=np.float64) / max_range, MIN_NORM_DISTANCE, 1.0)
    return np.concatenate([[speed / MAX_SPEED, steering_angle / MAX_STEER], d])
