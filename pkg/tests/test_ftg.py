import numpy as np
import pytest
from hypothesis import given, strategies as st

from overtake_rl.errors import NoGapFound
from overtake_rl.ftg import FtgConfig, ftg_control, free_runs, safety_bubble, select_gap
from overtake_rl.lidar import LidarScan, ray_angles
from overtake_rl.vehicle import MAX_SPEED, MAX_STEER


def scan_of(r, max_range=10.0):
    r = np.asarray(r, dtype=np.float64)
    return LidarScan(r, ray_angles(len(r)), max_range)


def exhaustive_gaps(masked, angles, thr):
    """Every (start, end) interval whose rays are all beyond ``thr``; best by (length, depth, centring)."""
    n = len(masked)
    free = masked > thr
    csum = np.concatenate([[0], np.cumsum(free)])
    s, e = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    ok = (e >= s) & (csum[e + 1] - csum[s] == e - s + 1)
    if not ok.any():
        return None
    length = np.where(ok, e - s + 1, 0)
    L = length.max()
    cands = list(zip(*np.nonzero(length == L)))
    keys = [(masked[a:b + 1].max(), -abs(0.5 * (angles[a] + angles[b]))) for a, b in cands]
    best = max(keys)
    return sorted((int(a), int(b)) for (a, b), k in zip(cands, keys) if k == best)


def test_selected_gap_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    levels = np.array([0.0, 0.5, 1.0, 2.0, 5.0, 8.0])
    for _ in range(10_000):
        n = int(rng.choice([10, 20, 40]))
        r = rng.choice(levels, size=n, p=[0.15, 0.15, 0.1, 0.25, 0.2, 0.15])
        angles = ray_angles(n)
        want = exhaustive_gaps(r, angles, 1.2)
        if want is None:
            with pytest.raises(NoGapFound):
                select_gap(r, angles, 1.2)
        else:
            assert sorted(select_gap(r, angles, 1.2)) == want


def test_mirror_equivariance_exact():
    rng = np.random.default_rng(1)
    levels = np.array([0.3, 0.8, 1.5, 3.0, 6.0, 10.0])
    cfg = FtgConfig()
    for _ in range(10_000):
        n = 120
        r = rng.choice(levels, size=n)
        a = ftg_control(scan_of(r), cfg)
        b = ftg_control(scan_of(r[::-1]), cfg)
        assert b.target_steering == -a.target_steering
        assert b.target_speed == a.target_speed


def test_symmetric_corridor_goes_straight():
    ang = ray_angles(1080)
    r = np.minimum(10.0, 1.0 / np.maximum(np.abs(np.sin(ang)), 1e-9))  # walls 1 m either side
    assert ftg_control(scan_of(r)).target_steering == 0.0


def test_blocked_right_half_turns_left():
    ang = ray_angles(1080)
    r = np.where(ang < 0, 0.5, 6.0)
    act = ftg_control(scan_of(r))
    assert act.target_steering > 0
    masked = safety_bubble(r, ang, 0.4, 10.0)
    masked[np.abs(ang) > np.pi / 2] = 0.0
    (s, e), = exhaustive_gaps(masked, ang, 1.2)
    assert act.target_steering == pytest.approx(min(0.5 * (ang[s] + ang[e]), MAX_STEER))


def test_no_gap_returns_stop():
    r = np.full(1080, 0.1)
    with pytest.raises(NoGapFound):
        select_gap(r, ray_angles(1080), 1.0)
    act = ftg_control(scan_of(r), FtgConfig(gap_threshold=1.0))
    assert (act.target_speed, act.target_steering) == (0.0, 0.0)


@given(st.lists(st.floats(1e-3, 10.0), min_size=20, max_size=20), st.floats(0.1, 3.0))
def test_output_within_bounds(r, gain):
    act = ftg_control(scan_of(np.repeat(r, 6)), FtgConfig(steering_gain=gain))
    assert 0.0 <= act.target_speed <= MAX_SPEED
    assert abs(act.target_steering) <= MAX_STEER


def test_speed_taper():
    cfg = FtgConfig(max_speed=1.5)
    ang = ray_angles(1080)
    straight = ftg_control(scan_of(np.full(1080, 10.0)), cfg)
    assert straight.target_speed == 1.5
    hard = ftg_control(scan_of(np.where(ang < 0.6, 0.5, 6.0)), cfg)
    assert hard.target_steering == MAX_STEER
    assert hard.target_speed == pytest.approx(0.75)


def test_bubble_masks_near_rays_only():
    ang = ray_angles(1080)
    r = np.full(1080, 5.0)
    i = 540
    r[i] = 1.0
    masked = safety_bubble(r, ang, 0.4, 10.0)
    hit = np.array([np.cos(ang[i]), np.sin(ang[i])])
    # perpendicular distance of each forward ray from the hit point
    perp = np.abs(np.cos(ang) * hit[1] - np.sin(ang) * hit[0])
    fwd = np.cos(ang - ang[i]) > 0
    assert np.array_equal(masked == 0.0, fwd & (perp <= 0.4))


def test_bubble_skipped_when_nothing_seen():
    r = np.full(1080, 10.0)
    assert np.array_equal(safety_bubble(r, ray_angles(1080), 0.4, 10.0), r)


def test_free_runs():
    assert free_runs(np.array([1, 1, 0, 1, 0, 1, 1, 1], dtype=bool)) == [(0, 1), (3, 3), (5, 7)]
    assert free_runs(np.zeros(4, dtype=bool)) == []


def test_config_validation():
    with pytest.raises(ValueError):
        FtgConfig(max_speed=2.5)
    with pytest.raises(ValueError):
        FtgConfig(bubble_radius=0.0)
