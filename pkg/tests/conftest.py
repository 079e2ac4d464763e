import math

import numpy as np
import pytest

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
RECTANGLE = [(0, 0), (2, 0), (2, 1), (0, 1)]
DART = [(0, 0), (4, 0), (2, 1), (2, 3)]
BOWTIE = [(0, 0), (1, 1), (1, 0), (0, 1)]
REGULAR_SQUARE = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def hexagon(R=1.0):
    return [(R * math.cos(k * math.pi / 3), R * math.sin(k * math.pi / 3)) for k in range(6)]


def shoelace(pts):
    """Plain-loop shoelace, kept independent of the package."""
    s = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        s += x0 * y1 - x1 * y0
    return s / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
