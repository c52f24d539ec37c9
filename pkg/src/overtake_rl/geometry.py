"""Low-level 2D geometry kernels: segment intersection, polygon overlap, culling.

Segments are stored as float64 arrays of shape (n, 4) holding (x0, y0, x1, y1).
"""
import math

import numba
import numpy as np

_EPS = 1e-12


def polyline_segments(points):
    """(n, 2) polyline -> (n - 1, 4) segment array."""
    points = np.asarray(points, dtype=np.float64)
    return np.hstack([points[:-1], points[1:]])


@numba.njit(cache=True)
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@numba.njit(cache=True)
def _on_segment(ax, ay, bx, by, px, py):
    return (min(ax, bx) - _EPS <= px <= max(ax, bx) + _EPS
            and min(ay, by) - _EPS <= py <= max(ay, by) + _EPS)


@numba.njit(cache=True)
def segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
    """True when closed segments ab and cd share at least one point."""
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


@numba.njit(cache=True)
def _closed_polyline_self_crossing(seg):
    n = seg.shape[0]
    for i in range(n):
        ax0 = min(seg[i, 0], seg[i, 2])
        ax1 = max(seg[i, 0], seg[i, 2])
        ay0 = min(seg[i, 1], seg[i, 3])
        ay1 = max(seg[i, 1], seg[i, 3])
        for j in range(i + 2, n):
            # first and last segment share the closing vertex
            if i == 0 and j == n - 1:
                continue
            if max(seg[j, 0], seg[j, 2]) < ax0 or min(seg[j, 0], seg[j, 2]) > ax1:
                continue
            if max(seg[j, 1], seg[j, 3]) < ay0 or min(seg[j, 1], seg[j, 3]) > ay1:
                continue
            if segments_cross(seg[i, 0], seg[i, 1], seg[i, 2], seg[i, 3],
                              seg[j, 0], seg[j, 1], seg[j, 2], seg[j, 3]):
                return i, j
    return -1, -1


@numba.njit(cache=True)
def _any_pair_crossing(sa, sb):
    for i in range(sa.shape[0]):
        for j in range(sb.shape[0]):
            if max(sb[j, 0], sb[j, 2]) < min(sa[i, 0], sa[i, 2]):
                continue
            if min(sb[j, 0], sb[j, 2]) > max(sa[i, 0], sa[i, 2]):
                continue
            if max(sb[j, 1], sb[j, 3]) < min(sa[i, 1], sa[i, 3]):
                continue
            if min(sb[j, 1], sb[j, 3]) > max(sa[i, 1], sa[i, 3]):
                continue
            if segments_cross(sa[i, 0], sa[i, 1], sa[i, 2], sa[i, 3],
                              sb[j, 0], sb[j, 1], sb[j, 2], sb[j, 3]):
                return i, j
    return -1, -1


def closed_polyline_self_crossing(points):
    """Return the first crossing pair (i, j) of non-adjacent segments, or None."""
    i, j = _closed_polyline_self_crossing(polyline_segments(points))
    return None if i < 0 else (int(i), int(j))


def polylines_cross(points_a, points_b):
    i, j = _any_pair_crossing(polyline_segments(points_a), polyline_segments(points_b))
    return None if i < 0 else (int(i), int(j))


def segments_near(segments, center, radius):
    """Boolean mask of segments whose closest point lies within ``radius`` of ``center``."""
    a = segments[:, 0:2]
    ab = segments[:, 2:4] - a
    ap = np.asarray(center) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", ap, ab) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    d = ap - t[:, None] * ab
    return np.einsum("ij,ij->i", d, d) <= radius * radius


def rect_edges(corners):
    """(4, 2) corner array -> (4, 4) closed edge segments."""
    return np.hstack([corners, np.roll(corners, -1, axis=0)])


def rects_overlap(ca, cb):
    """Separating-axis test for two convex quadrilaterals given as (4, 2) corners."""
    for corners in (ca, cb):
        for k in range(4):
            edge = corners[(k + 1) % 4] - corners[k]
            axis = np.array([-edge[1], edge[0]])
            pa = ca @ axis
            pb = cb @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


@numba.njit(cache=True)
def _rect_hits_segments(corners, seg):
    for k in range(4):
        ax = corners[k, 0]
        ay = corners[k, 1]
        bx = corners[(k + 1) % 4, 0]
        by = corners[(k + 1) % 4, 1]
        for j in range(seg.shape[0]):
            if segments_cross(ax, ay, bx, by, seg[j, 0], seg[j, 1], seg[j, 2], seg[j, 3]):
                return True
    # a segment lying entirely inside the rectangle crosses no edge
    for j in range(seg.shape[0]):
        px = seg[j, 0]
        py = seg[j, 1]
        inside = True
        for k in range(4):
            ax = corners[k, 0]
            ay = corners[k, 1]
            bx = corners[(k + 1) % 4, 0]
            by = corners[(k + 1) % 4, 1]
            if _orient(ax, ay, bx, by, px, py) < 0:
                inside = False
                break
        if inside:
            return True
    return False


def rect_hits_segments(corners, segments):
    """True when the counter-clockwise quadrilateral touches any segment."""
    if len(segments) == 0:
        return False
    return bool(_rect_hits_segments(np.ascontiguousarray(corners, dtype=np.float64),
                                    np.ascontiguousarray(segments, dtype=np.float64)))


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped
