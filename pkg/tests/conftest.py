import math

import numpy as np
import pytest

from isoperim.geometry import Disk, PolygonComponent, Shape, polygonize_disk


def fourier_polygon(rng, n=2048, modes=4, amp=0.08, center=(0.0, 0.0), scale=1.0) -> PolygonComponent:
    """Star-shaped polygon r(φ) = scale (1 + Σ a_k cos kφ + b_k sin kφ), a_k, b_k ~ amp / k."""
    phi = 2 * math.pi * np.arange(n) / n
    k = np.arange(2, modes + 2)[:, None]
    a = rng.uniform(-amp, amp, (modes, 1)) / k
    b = rng.uniform(-amp, amp, (modes, 1)) / k
    r = scale * (1 + np.sum(a * np.cos(k * phi) + b * np.sin(k * phi), axis=0))
    return PolygonComponent(np.column_stack([center[0] + r * np.cos(phi), center[1] + r * np.sin(phi)]))


def unit_disk(n=2048) -> Shape:
    return Shape((polygonize_disk(Disk((0.0, 0.0), 1.0), n),))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            rows += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if rows:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(rows):
            terminalreporter.write_line(line)
