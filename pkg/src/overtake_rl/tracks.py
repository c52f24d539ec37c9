"""Closed spline race tracks: generation, wall extrusion and progress projection."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidWidth, OffTrackQuery, SelfIntersectingTrack
from .geometry import closed_polyline_self_crossing, polyline_segments, polylines_cross

MIN_WIDTH = 1.5
MAX_WIDTH = 3.5
TRAINING_WIDTHS = (1.5, 2.17, 2.83, 3.5)
EVAL_WIDTH = 2.5
WALL_SPACING = 0.1
WAYPOINT_STRIDE = 5  # centerline samples per waypoint -> 0.5 m waypoint spacing

TRAINING_TRACK_IDS = ("track_01", "track_02", "track_03", "track_04", "track_05", "track_06")
EVAL_TRACK_ID = "eval"


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class TrackProjection:
    arc_length: float
    lateral_offset: float
    segment_index: int


@dataclass(frozen=True, eq=False)
class Track:
    """Immutable track geometry.

    ``centerline`` is closed (last row equals the first) and runs counter-clockwise,
    so ``inner_wall`` is the left-hand offset and ``outer_wall`` the right-hand one.
    """

    id: str
    centerline: np.ndarray
    width: float
    inner_wall: np.ndarray
    outer_wall: np.ndarray
    waypoint_indices: np.ndarray
    cum_length: np.ndarray = field(repr=False)
    wall_segments: np.ndarray = field(repr=False)

    @property
    def total_length(self):
        return float(self.cum_length[-1])

    @property
    def waypoints(self):
        return self.centerline[self.waypoint_indices]

    @property
    def n_waypoints(self):
        return len(self.waypoint_indices)

    def waypoint_arc(self, index):
        return float(self.cum_length[self.waypoint_indices[index % self.n_waypoints]])

    def waypoint_pose(self, index):
        """Position and centerline tangent heading at a waypoint (index wraps)."""
        i = int(self.waypoint_indices[index % self.n_waypoints])
        nxt = self.centerline[i + 1]
        prv = self.centerline[i - 1] if i > 0 else self.centerline[-2]
        d = nxt - prv
        return self.centerline[i].copy(), float(np.arctan2(d[1], d[0]))

    @classmethod
    def from_centerline(cls, track_id, centerline, width, stride=WAYPOINT_STRIDE):
        """Extrude an already-sampled closed centerline to walls at ``width``."""
        if not MIN_WIDTH <= width <= MAX_WIDTH:
            raise InvalidWidth(f"width {width} outside [{MIN_WIDTH}, {MAX_WIDTH}] m")
        pts = np.array(centerline, dtype=np.float64)
        if np.linalg.norm(pts[0] - pts[-1]) > 1e-9:
            pts = np.vstack([pts, pts[:1]])
        pts[-1] = pts[0]
        if _signed_area(pts) < 0:
            pts = pts[::-1].copy()
        n = len(pts) - 1
        if n % stride:
            raise ValueError(f"centerline sample count {n} not divisible by waypoint stride {stride}")

        ring = pts[:-1]
        tangent = np.roll(ring, -1, axis=0) - np.roll(ring, 1, axis=0)
        tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
        normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
        inner = ring + 0.5 * width * normal
        outer = ring - 0.5 * width * normal
        inner = np.vstack([inner, inner[:1]])
        outer = np.vstack([outer, outer[:1]])

        for name, poly in (("centerline", pts), ("inner wall", inner), ("outer wall", outer)):
            hit = closed_polyline_self_crossing(poly)
            if hit is not None:
                raise SelfIntersectingTrack(f"{track_id}: {name} crosses itself at segments {hit}")
        hit = polylines_cross(inner, outer)
        if hit is not None:
            raise SelfIntersectingTrack(f"{track_id}: inner and outer walls cross at segments {hit}")

        seg_len = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        walls = np.vstack([polyline_segments(inner), polyline_segments(outer)])
        return cls(
            id=track_id,
            centerline=_frozen(pts),
            width=float(width),
            inner_wall=_frozen(inner),
            outer_wall=_frozen(outer),
            waypoint_indices=np.arange(0, n, stride),
            cum_length=_frozen(cum),
            wall_segments=_frozen(walls),
        )

    def project(self, point, max_radius=None):
        """Nearest-point projection onto the centerline polyline.

        Equidistant segments resolve to the lowest segment index. Raises
        OffTrackQuery beyond ``max_radius`` (default twice the width).
        """
        if max_radius is None:
            max_radius = 2.0 * self.width
        p = np.asarray(point, dtype=np.float64)
        a = self.centerline[:-1]
        ab = self.centerline[1:] - a
        ap = p - a
        len2 = np.einsum("ij,ij->i", ab, ab)
        t = np.clip(np.einsum("ij,ij->i", ap, ab) / len2, 0.0, 1.0)
        diff = ap - t[:, None] * ab
        d2 = np.einsum("ij,ij->i", diff, diff)
        i = int(np.argmin(d2))
        dist = float(np.sqrt(d2[i]))
        if dist > max_radius:
            raise OffTrackQuery(f"point {p.tolist()} is {dist:.3f} m from the centerline of {self.id}")
        seg_len = self.cum_length[i + 1] - self.cum_length[i]
        arc = float(self.cum_length[i] + t[i] * seg_len)
        if arc >= self.total_length:
            arc -= self.total_length
        cross = ab[i, 0] * ap[i, 1] - ab[i, 1] * ap[i, 0]
        return TrackProjection(arc, dist if cross >= 0 else -dist, i)

    def point_at(self, arc):
        """Centerline point at arc length ``arc`` (wraps)."""
        s = float(arc) % self.total_length
        i = int(np.searchsorted(self.cum_length, s, side="right")) - 1
        i = min(max(i, 0), len(self.centerline) - 2)
        seg = self.cum_length[i + 1] - self.cum_length[i]
        t = (s - self.cum_length[i]) / seg
        return self.centerline[i] + t * (self.centerline[i + 1] - self.centerline[i])

    def to_dict(self):
        return {
            "id": self.id,
            "width": self.width,
            "total_length": self.total_length,
            "centerline": self.centerline.tolist(),
            "waypoint_indices": self.waypoint_indices.tolist(),
            "inner_wall": self.inner_wall.tolist(),
            "outer_wall": self.outer_wall.tolist(),
        }


def progress_delta(track, prev, curr):
    """Signed forward arc-length change between two projections, unwrapped across the start line."""
    length = track.total_length
    d = curr.arc_length - prev.arc_length
    if d > 0.5 * length:
        d -= length
    elif d < -0.5 * length:
        d += length
    return d


def _signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def catmull_rom_closed(control_points, samples_per_segment=200, alpha=0.5):
    """Dense samples of the closed centripetal Catmull-Rom spline through ``control_points``.

    Returned array is open (the start point is not repeated).
    """
    P = np.asarray(control_points, dtype=np.float64)
    n = len(P)
    u = np.linspace(0.0, 1.0, samples_per_segment, endpoint=False)[:, None]
    out = []
    for i in range(n):
        p0, p1, p2, p3 = P[i - 1], P[i], P[(i + 1) % n], P[(i + 2) % n]
        t0 = 0.0
        t1 = t0 + np.linalg.norm(p1 - p0) ** alpha
        t2 = t1 + np.linalg.norm(p2 - p1) ** alpha
        t3 = t2 + np.linalg.norm(p3 - p2) ** alpha
        t = t1 + u * (t2 - t1)
        a1 = (t1 - t) / (t1 - t0) * p0 + (t - t0) / (t1 - t0) * p1
        a2 = (t2 - t) / (t2 - t1) * p1 + (t - t1) / (t2 - t1) * p2
        a3 = (t3 - t) / (t3 - t2) * p2 + (t - t2) / (t3 - t2) * p3
        b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2
        b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3
        out.append((t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2)
    return np.vstack(out)


def resample_closed(points, spacing=WALL_SPACING, stride=WAYPOINT_STRIDE):
    """Resample a closed curve at uniform arc length.

    The sample count is a multiple of ``stride`` and large enough that spacing
    does not exceed ``spacing``. Returns a closed array (first row repeated).
    """
    ring = np.vstack([points, points[:1]])
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(ring, axis=0), axis=1))])
    length = cum[-1]
    n = stride * int(np.ceil(length / (spacing * stride)))
    s = np.linspace(0.0, length, n, endpoint=False)
    x = np.interp(s, cum, ring[:, 0])
    y = np.interp(s, cum, ring[:, 1])
    out = np.column_stack([x, y])
    return np.vstack([out, out[:1]])


def build_track(track_id, control_points, width):
    if len(control_points) < 4:
        raise ValueError("a closed spline needs at least 4 control points")
    centerline = resample_closed(catmull_rom_closed(control_points))
    return Track.from_centerline(track_id, centerline, width)


def generate_track_family(control_points, widths, track_id="track"):
    """One Track per width, all sharing the spline centerline through ``control_points``."""
    if len(control_points) < 4:
        raise ValueError("a closed spline needs at least 4 control points")
    for w in widths:
        if not MIN_WIDTH <= w <= MAX_WIDTH:
            raise InvalidWidth(f"width {w} outside [{MIN_WIDTH}, {MAX_WIDTH}] m")
    centerline = resample_closed(catmull_rom_closed(control_points))
    return [Track.from_centerline(f"{track_id}_w{w:.2f}", centerline, w) for w in widths]


# -- track definition files --------------------------------------------------

def load_track_definition(path):
    with open(path) as fh:
        spec = json.load(fh)
    return spec


def _bundled(track_id):
    return resources.files("overtake_rl").joinpath("data", "tracks", f"{track_id}.json")


def bundled_definition(track_id):
    return json.loads(_bundled(track_id).read_text())


def training_tracks():
    """The 24 training tracks: 6 splines extruded at 4 widths each."""
    tracks = []
    for tid in TRAINING_TRACK_IDS:
        spec = bundled_definition(tid)
        tracks.extend(generate_track_family(spec["control_points"], spec["widths"], spec["id"]))
    return tracks


def eval_track():
    spec = bundled_definition(EVAL_TRACK_ID)
    return generate_track_family(spec["control_points"], spec["widths"], spec["id"])[0]


def write_track_cache(tracks, out_dir):
    """Dump generated geometry as JSON for inspection; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for track in tracks:
        path = out_dir / f"{track.id}.json"
        path.write_text(json.dumps(track.to_dict()))
        paths.append(path)
    return paths
