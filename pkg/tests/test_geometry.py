import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import fourier_polygon, unit_disk
from isoperim.constructions import build_fuglede_sequence, hull_perimeter_disk_point
from isoperim.errors import DegenerateShapeError, DomainError, ResolutionError, ShapeError
from isoperim.geometry import (
    Disk,
    Point,
    PolygonComponent,
    Shape,
    area,
    barycenter,
    circle_arcs_inside,
    contains,
    convex_hull,
    diameter,
    diameter_pair,
    disk_disk_symm_diff,
    disk_polygon_intersection_area,
    perimeter,
    polygonize_disk,
    signed_area,
    symm_diff_area_disk,
    validate,
)

SQRT2 = math.sqrt(2.0)


def square(side=1.0, center=(0.0, 0.0)):
    h = side / 2
    cx, cy = center
    return PolygonComponent([(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)])


def equal_disks(n=2048):
    r = 1 / SQRT2
    half = (2 + SQRT2) / 2
    return Shape((polygonize_disk(Disk((half, 0), r), n), polygonize_disk(Disk((-half, 0), r), n)))


# ---------------------------------------------------------------------------
# oracles


def brute_diameter(pts):
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=2))))


def brute_hull_perimeter(pts):
    """Sum of |pq| over ordered pairs with every other point strictly left of p->q."""
    n = len(pts)
    p = pts[:, None, None, :]
    q = pts[None, :, None, :]
    k = pts[None, None, :, :]
    cr = (q[..., 0] - p[..., 0]) * (k[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (k[..., 0] - p[..., 0])
    idx = np.arange(n)
    mask = (idx[:, None, None] == idx[None, None, :]) | (idx[None, :, None] == idx[None, None, :])
    edge = np.all((cr > 0) | mask, axis=2) & (idx[:, None] != idx[None, :])
    i, j = np.nonzero(edge)
    return float(np.sum(np.hypot(*(pts[j] - pts[i]).T)))


def lens_area(a):
    """|B((0,0),1) ∩ B((a,0),1)| by adaptive quadrature over vertical chords."""
    h = lambda x: 2 * min(math.sqrt(max(1 - x * x, 0)), math.sqrt(max(1 - (x - a) ** 2, 0)))
    return quad(h, a - 1, 1, points=[a / 2], epsabs=1e-13, limit=200)[0]


def disk_convex_polygon_area(disk, poly):
    """|disk ∩ convex poly| by quadrature of vertical-slice overlaps."""
    v = poly.vertices
    w = np.roll(v, -1, axis=0)
    cx, cy = disk.center
    r = disk.radius

    def slice_len(x):
        h2 = r * r - (x - cx) ** 2
        if h2 <= 0:
            return 0.0
        h = math.sqrt(h2)
        lo_d, hi_d = cy - h, cy + h
        ys = []
        for (x0, y0), (x1, y1) in zip(v, w):
            if (x0 - x) * (x1 - x) <= 0 and x0 != x1:
                ys.append(y0 + (x - x0) * (y1 - y0) / (x1 - x0))
        if len(ys) < 2:
            return 0.0
        return max(0.0, min(hi_d, max(ys)) - max(lo_d, min(ys)))

    pts = sorted(set(v[:, 0].tolist()) | {cx})
    lo = max(cx - r, v[:, 0].min())
    hi = min(cx + r, v[:, 0].max())
    if hi <= lo:
        return 0.0
    inner = [p for p in pts if lo < p < hi]
    return quad(slice_len, lo, hi, points=inner or None, epsabs=1e-12, limit=500)[0]


def random_convex_polygon(rng, n=9):
    ang = np.sort(rng.uniform(0, 2 * math.pi, n))
    rad = rng.uniform(0.8, 1.6)
    return convex_hull(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]) + rng.normal(0, 0.3, 2))


# ---------------------------------------------------------------------------
# area, perimeter, barycenter


def test_area_of_unit_diagonal_square():
    assert area(Shape.from_polygons([[(1, 0), (0, 1), (-1, 0), (0, -1)]])) == pytest.approx(2.0, abs=1e-15)


def test_polygonized_unit_disk_measures():
    s = unit_disk()
    assert abs(area(s) - math.pi) <= 1e-12
    eps = perimeter(s) - 2 * math.pi
    assert 0 < eps < 1e-5
    assert abs(diameter(s) - 2) <= 1e-4
    assert abs(symm_diff_area_disk(s, Disk((0, 0), 1))) <= 1e-4


def test_polygonized_disk_perimeter_matches_ngon_formula():
    n = 2048
    rho = math.sqrt(2 * math.pi / (n * math.sin(2 * math.pi / n)))
    assert perimeter(unit_disk(n)) == pytest.approx(2 * n * rho * math.sin(math.pi / n), rel=1e-13)


def test_coarse_disk_is_area_exact_and_longer():
    s = Shape((polygonize_disk(Disk((0, 0), 1), 8),))
    assert area(s) == pytest.approx(math.pi, abs=1e-14)
    assert perimeter(s) > 2 * math.pi


def test_polygonize_rejects_coarse_resolution():
    with pytest.raises(ResolutionError):
        polygonize_disk(Disk((0, 0), 1), 7)


def test_square_perimeter():
    s = Shape((square(math.sqrt(math.pi)),))
    assert perimeter(s) == pytest.approx(4 * math.sqrt(math.pi), rel=1e-14)
    assert area(s) == pytest.approx(math.pi, rel=1e-14)


def test_equal_disks_perimeter_and_diameter():
    s = equal_disks()
    assert abs(perimeter(s) - 2 * math.pi * SQRT2) <= 1e-4
    assert abs(diameter(s) - (2 + 2 * SQRT2)) <= 1e-4


@pytest.mark.parametrize("n", [2, 4, 7])
def test_fuglede_area_and_barycenter(n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        shape, _, _ = build_fuglede_sequence(n)
    if n == 4:
        assert abs(area(shape) - math.pi) <= 1e-6
    assert math.hypot(*barycenter(shape)) <= 1e-9


def test_barycenter_translation():
    s = unit_disk().translated(3, -1)
    g = barycenter(s)
    assert g.x == pytest.approx(3, abs=1e-12) and g.y == pytest.approx(-1, abs=1e-12)
    assert max(map(abs, barycenter(unit_disk()))) < 1e-14


def test_orientation_and_structure_errors():
    v = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
    assert signed_area(v[::-1]) == -signed_area(v)
    with pytest.raises(ShapeError):
        PolygonComponent(v[::-1])
    with pytest.raises(ShapeError):
        PolygonComponent(v[:2])
    with pytest.raises(ShapeError):
        PolygonComponent([(0, 0), (1, 0), (1, 0), (0, 1)])
    bowtie = Shape.from_polygons([[(0, 0), (4, 0), (4, 3), (2, -1), (0, 3)]])
    with pytest.raises(ShapeError):
        validate(bowtie, strict=True)


def test_overlapping_and_nested_components_rejected():
    with pytest.raises(ShapeError):
        validate(Shape((square(1), square(1, (0.5, 0.2)))), strict=True)
    with pytest.raises(ShapeError):
        validate(Shape((square(3), square(1))), strict=True)
    validate(Shape((square(1), square(1, (3, 0)))), strict=True)


def test_collinear_hull_is_degenerate():
    with pytest.raises(DegenerateShapeError):
        convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])


# ---------------------------------------------------------------------------
# diameter and hull


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 60))
def test_diameter_matches_brute_force(seed, n):
    pts = np.random.default_rng(seed).normal(size=(n, 2)) * [3.0, 1.0]
    d, p, q = diameter_pair(pts)
    assert d == brute_diameter(pts)
    assert math.dist(p, q) == pytest.approx(d, rel=1e-15)


def test_thin_rectangle_diameter():
    L, w = 7.0, 1e-3
    s = Shape.from_polygons([[(0, 0), (L, 0), (L, w), (0, w)]])
    assert diameter(s) == pytest.approx(math.hypot(L, w), rel=1e-15)


def test_hull_matches_brute_force(rng):
    pts = rng.normal(size=(100, 2))
    hull = convex_hull(pts)
    assert hull.perimeter == pytest.approx(brute_hull_perimeter(pts), rel=1e-12)


def test_hull_of_square_with_interior_point():
    h = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (0.3, 0.6)])
    assert len(h) == 4 and h.area == pytest.approx(1.0)


def test_hull_of_disk_and_point_matches_closed_form():
    R1, R2 = 0.9, 2.5
    disk = polygonize_disk(Disk((0, 0), R1), 4096)
    hull = convex_hull(np.vstack([disk.vertices, [[R2, 0.0]]]))
    assert hull.perimeter == pytest.approx(hull_perimeter_disk_point(R1, R2), abs=1e-4)


def test_hull_perimeter_at_most_perimeter(rng):
    for _ in range(5):
        comp = fourier_polygon(rng, n=512, amp=0.4)
        assert convex_hull(comp.vertices).perimeter <= comp.perimeter + 1e-12


# ---------------------------------------------------------------------------
# disk clipping


def test_disk_inside_and_disjoint():
    big = square(10)
    assert disk_polygon_intersection_area(Disk((0.5, -1), 1.3), big) == pytest.approx(math.pi * 1.69, rel=1e-14)
    assert disk_polygon_intersection_area(Disk((20, 0), 1), big) == pytest.approx(0.0, abs=1e-15)
    s = Shape((square(1, (5, 5)),))
    assert symm_diff_area_disk(s, Disk((0, 0), 2)) == pytest.approx(1 + 4 * math.pi, rel=1e-14)


def test_half_plane_clip():
    half = PolygonComponent([(-50, -50), (0, -50), (0, 50), (-50, 50)])
    assert abs(disk_polygon_intersection_area(Disk((0, 0), 1), half) - math.pi / 2) <= 1e-9


def test_polygon_inside_disk():
    sq = square(1)
    assert disk_polygon_intersection_area(Disk((0, 0), 5), sq) == pytest.approx(1.0, rel=1e-14)


def test_tangent_edge_counts_as_non_crossing():
    sq = PolygonComponent([(-3, 1), (3, 1), (3, 4), (-3, 4)])
    assert disk_polygon_intersection_area(Disk((0, 0), 1), sq) == pytest.approx(0.0, abs=1e-12)
    sq2 = PolygonComponent([(-3, -1), (3, -1), (3, 4), (-3, 4)])
    assert disk_polygon_intersection_area(Disk((0, 0), 1), sq2) == pytest.approx(math.pi, abs=1e-12)


def test_clip_matches_slice_quadrature(rng):
    for _ in range(12):
        poly = random_convex_polygon(rng)
        disk = Disk(rng.normal(0, 0.8, 2), rng.uniform(0.3, 1.5))
        exact = disk_convex_polygon_area(disk, poly)
        assert disk_polygon_intersection_area(disk, poly) == pytest.approx(exact, abs=1e-7)


def test_symm_diff_matches_monte_carlo(rng):
    n = 400_000
    for _ in range(4):
        comp = fourier_polygon(rng, n=512, amp=0.5, scale=rng.uniform(0.6, 1.4))
        disk = Disk(rng.normal(0, 0.4, 2), rng.uniform(0.5, 1.5))
        s = Shape((comp,))
        box = 3.5
        pts = rng.uniform(-box, box, (n, 2))
        in_k = contains(s, pts)
        in_b = np.hypot(*(pts - np.asarray(disk.center)).T) < disk.radius
        frac = np.mean(in_k != in_b)
        est = frac * (2 * box) ** 2
        sigma = math.sqrt(frac * (1 - frac) / n) * (2 * box) ** 2
        assert abs(symm_diff_area_disk(s, disk) - est) <= 4 * sigma


@pytest.mark.parametrize("a", [0.0, 0.2, 0.5, 1.0, 1.5, 1.99])
def test_disk_disk_symm_diff_vs_lens_quadrature(a):
    assert disk_disk_symm_diff(a) == pytest.approx(2 * math.pi - 2 * lens_area(a), abs=1e-9)


def test_disk_disk_symm_diff_closed_values():
    assert disk_disk_symm_diff(0.0) == 0.0
    assert disk_disk_symm_diff(2.0) == pytest.approx(2 * math.pi, abs=1e-15)
    assert disk_disk_symm_diff(5.0) == 2 * math.pi
    assert disk_disk_symm_diff(1.0) == pytest.approx(2 * math.pi / 3 + math.sqrt(3), abs=1e-12)
    with pytest.raises(DomainError):
        disk_disk_symm_diff(-0.1)


def test_kernel_reproduces_unit_disk_distance_one():
    s = unit_disk()
    assert symm_diff_area_disk(s, Disk((1, 0), 1)) == pytest.approx(2 * math.pi / 3 + math.sqrt(3), abs=1e-3)


def test_disk_disk_symm_diff_monotone_and_linear_bound():
    a = np.linspace(0, 2, 2001)
    f = np.array([disk_disk_symm_diff(x) for x in a])
    assert np.all(np.diff(f) > 0)
    assert np.all(f[a <= 1] <= 4 * a[a <= 1] + 1e-15)


# ---------------------------------------------------------------------------
# invariance, serialization, circle arcs


@settings(max_examples=25, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(-math.pi, math.pi),
    st.floats(-50, 50),
    st.floats(-50, 50),
)
def test_measures_rigid_motion_invariant(seed, angle, dx, dy):
    rng = np.random.default_rng(seed)
    s = Shape((fourier_polygon(rng, n=256, amp=0.3),))
    m = s.rotated(angle, about=(0.3, -0.2)).translated(dx, dy)
    for f in (area, perimeter, diameter):
        assert f(m) == pytest.approx(f(s), rel=1e-9)
    disk = Disk((0.1, 0.2), 0.9)
    moved_disk = Disk(_move((0.1, 0.2), angle, (dx, dy)), 0.9)
    assert symm_diff_area_disk(m, moved_disk) == pytest.approx(symm_diff_area_disk(s, disk), rel=1e-9, abs=1e-12)


def _move(p, angle, offset):
    c = np.array([0.3, -0.2])
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    return rot @ (np.asarray(p) - c) + c + np.asarray(offset)


def test_json_round_trip():
    s = equal_disks(64)
    back = Shape.from_json(s.to_json())
    assert all(np.array_equal(a.vertices, b.vertices) for a, b in zip(s.components, back.components))


@pytest.mark.parametrize(
    "text",
    ["{bad", "[]", '{"components": 3}', '{"components": [{"v": []}]}', '{"components": [{"vertices": [[0, 0], [1]]}]}'],
)
def test_json_schema_errors(text):
    with pytest.raises(ShapeError):
        Shape.from_json(text)


def test_circle_arcs_inside_half_plane():
    half = Shape.from_polygons([[(0, -50), (50, -50), (50, 50), (0, 50)]])
    intervals, grazing = circle_arcs_inside(half, Disk((0, 0), 1))
    total = sum(b - a for a, b in intervals)
    assert total == pytest.approx(math.pi, abs=1e-12)
    assert grazing == 0.0


def test_circle_arcs_of_polygonized_disk_graze():
    intervals, grazing = circle_arcs_inside(unit_disk(), Disk((0, 0), 1))
    assert intervals == [(0.0, 2 * math.pi)]
    assert grazing > 0
