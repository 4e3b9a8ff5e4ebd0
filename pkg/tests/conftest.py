import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wlinpaint import WeightField, build_domain  # noqa: E402
from wlinpaint.grid import grid_coords  # noqa: E402


def central_block(n, lo, hi):
    m = np.zeros((n, n), dtype=bool)
    m[lo:hi, lo:hi] = True
    return m


def random_smooth_weight(n, seed, known=None, base=(0.35, 0.65), amp=0.04, modes=3):
    """Smooth weight in (0, 1) built from a few low-frequency modes; 1 on ``known``."""
    rng = np.random.default_rng(seed)
    h = 1.0 / (n - 1)
    X, Y = grid_coords((n, n), h)
    c = np.full((n, n), rng.uniform(*base))
    for _ in range(modes):
        kx, ky = rng.integers(1, 3, 2)
        ph = rng.uniform(0, 2 * np.pi, 2)
        c += rng.uniform(-amp, amp) * np.sin(np.pi * kx * X + ph[0]) * np.cos(np.pi * ky * Y + ph[1])
    if known is not None:
        c[known] = 1.0
    return c


def weight_problem(n, seed, block=None):
    """(domain, weight, h) for a random smooth weight with a central known block."""
    h = 1.0 / (n - 1)
    lo, hi = block if block is not None else (n // 2 - 3, n // 2 + 4)
    known = central_block(n, lo, hi)
    dom = build_domain(known, h)
    c = random_smooth_weight(n, seed, known)
    return dom, WeightField.from_values(c, h, dom), h


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
