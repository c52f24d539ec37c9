import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def train_tracks():
    from overtake_rl.tracks import training_tracks
    return training_tracks()


@pytest.fixture(scope="session")
def eval_trk():
    from overtake_rl.tracks import eval_track
    return eval_track()


def stadium(straight=20.0, radius=5.0, n_straight=200, n_arc=155):
    """Closed counter-clockwise stadium: bottom straight along +x from the origin."""
    pts = [(straight * k / n_straight, 0.0) for k in range(n_straight)]
    for k in range(n_arc):
        a = -np.pi / 2 + np.pi * k / n_arc
        pts.append((straight + radius * np.cos(a), radius + radius * np.sin(a)))
    for k in range(n_straight):
        pts.append((straight - straight * k / n_straight, 2 * radius))
    for k in range(n_arc):
        a = np.pi / 2 + np.pi * k / n_arc
        pts.append((radius * np.cos(a), radius + radius * np.sin(a)))
    pts.append(pts[0])
    return np.array(pts)


def circle(radius=10.0, n=1000):
    a = 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([radius * np.cos(a), radius * np.sin(a)])
    return np.vstack([pts, pts[:1]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
