"""Planar shape kernel: polygons, disks, exact measures and polygon-disk boolean areas.

A shape is a finite union of pairwise disjoint, simple, counter-clockwise polygons.
Curved sets enter through :func:`polygonize_disk` or through Fourier synthesis in
:mod:`isoperim.optimizer`; in both cases the resulting polygon is what gets measured,
so every area below is exact up to floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateShapeError, DomainError, ResolutionError, ShapeError

TANGENT_TOL = 1e-12
"""Edges whose normalized discriminant against a circle is below this count as non-crossing."""

GRAZE_TOL = 1e-6

TWO_PI = 2.0 * math.pi


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"disk radius must be positive, got {self.radius!r}")

    @property
    def area(self) -> float:
        return math.pi * self.radius * self.radius


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace formula; positive for counter-clockwise vertex order."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class PolygonComponent:
    """One simple CCW polygon.

    ``curvature`` and ``normals`` optionally carry the exact boundary data of the smooth
    curve the polygon was sampled from (one entry per vertex).  They are used where the
    smooth curvature is wanted (optimality residuals) and ignored by the measures.
    """

    vertices: np.ndarray
    curvature: np.ndarray | None = None
    normals: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ShapeError(f"vertices must have shape (n, 2), got {v.shape}")
        if len(v) < 3:
            raise ShapeError(f"a polygon needs at least 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise ShapeError("vertex coordinates must be finite")
        edges = np.roll(v, -1, axis=0) - v
        if np.any(np.einsum("ij,ij->i", edges, edges) == 0.0):
            raise ShapeError("repeated consecutive vertex (zero-length edge)")
        if signed_area(v) <= 0.0:
            raise ShapeError("polygon must be counter-clockwise with positive signed area")
        object.__setattr__(self, "vertices", _readonly(v))
        if self.curvature is not None:
            k = np.array(self.curvature, dtype=float)
            if k.shape != (len(v),):
                raise ShapeError("curvature must have one entry per vertex")
            object.__setattr__(self, "curvature", _readonly(k))
        if self.normals is not None:
            n = np.array(self.normals, dtype=float)
            if n.shape != v.shape:
                raise ShapeError("normals must have one row per vertex")
            object.__setattr__(self, "normals", _readonly(n))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*self.edges.T)

    @property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    def transformed(self, matrix: np.ndarray, offset: Sequence[float], scale: float) -> "PolygonComponent":
        """Apply ``x -> matrix @ x + offset`` where ``matrix`` is ``scale`` times a rotation."""
        v = self.vertices @ matrix.T + np.asarray(offset, dtype=float)
        k = None if self.curvature is None else self.curvature / scale
        n = None if self.normals is None else self.normals @ (matrix / scale).T
        return PolygonComponent(v, k, n)


@dataclass(frozen=True, eq=False)
class Shape:
    components: tuple[PolygonComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, PolygonComponent) else PolygonComponent(c) for c in self.components
        )
        if not comps:
            raise ShapeError("a shape needs at least one component")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_polygons(cls, polygons: Iterable[Sequence[Sequence[float]]]) -> "Shape":
        return cls(tuple(PolygonComponent(np.asarray(p, dtype=float)) for p in polygons))

    @property
    def vertices(self) -> np.ndarray:
        """All vertices of all components, stacked."""
        return np.concatenate([c.vertices for c in self.components])

    def _affine(self, matrix: np.ndarray, offset: Sequence[float], scale: float) -> "Shape":
        return Shape(tuple(c.transformed(matrix, offset, scale) for c in self.components))

    def translated(self, dx: float, dy: float) -> "Shape":
        return self._affine(np.eye(2), (dx, dy), 1.0)

    def scaled(self, factor: float, about: Sequence[float] = (0.0, 0.0)) -> "Shape":
        if not factor > 0:
            raise DomainError("scale factor must be positive")
        c = np.asarray(about, dtype=float)
        return self._affine(factor * np.eye(2), c - factor * c, factor)

    def rotated(self, angle: float, about: Sequence[float] = (0.0, 0.0)) -> "Shape":
        c = np.asarray(about, dtype=float)
        ca, sa = math.cos(angle), math.sin(angle)
        rot = np.array([[ca, -sa], [sa, ca]])
        return self._affine(rot, c - rot @ c, 1.0)

    def to_dict(self) -> dict:
        return {"components": [{"vertices": c.vertices.tolist()} for c in self.components]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, obj) -> "Shape":
        if not isinstance(obj, dict) or not isinstance(obj.get("components"), list):
            raise ShapeError('shape JSON must be an object with a "components" list')
        polys = []
        for i, comp in enumerate(obj["components"]):
            if not isinstance(comp, dict) or "vertices" not in comp:
                raise ShapeError(f'component {i} must be an object with "vertices"')
            verts = comp["vertices"]
            if not isinstance(verts, list) or not all(
                isinstance(p, list) and len(p) == 2 and all(isinstance(t, (int, float)) for t in p)
                for p in verts
            ):
                raise ShapeError(f"component {i}: vertices must be a list of [x, y] numbers")
            polys.append(verts)
        return cls.from_polygons(polys)

    @classmethod
    def from_json(cls, text: str) -> "Shape":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ShapeError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(obj)


# ---------------------------------------------------------------------------
# measures


def area(shape: Shape) -> float:
    a = sum(c.area for c in shape.components)
    if a <= 0:
        raise DegenerateShapeError("shape has non-positive area")
    return a


def perimeter(shape: Shape) -> float:
    return sum(c.perimeter for c in shape.components)


def _first_moment(v: np.ndarray) -> np.ndarray:
    w = np.roll(v, -1, axis=0)
    cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    return np.array([np.dot(v[:, 0] + w[:, 0], cr), np.dot(v[:, 1] + w[:, 1], cr)]) / 6.0


def barycenter(shape: Shape) -> Point:
    a = sum(c.area for c in shape.components)
    if not a > 0:
        raise DegenerateShapeError("barycenter of a zero-area shape is undefined")
    m = sum(_first_moment(c.vertices) for c in shape.components)
    return Point(float(m[0] / a), float(m[1] / a))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_indices(pts: np.ndarray) -> list[int]:
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    p = pts.tolist()
    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and _cross(p[lower[-2]], p[lower[-1]], p[i]) <= 0:
            lower.pop()
        lower.append(int(i))
    upper: list[int] = []
    for i in order[::-1]:
        while len(upper) >= 2 and _cross(p[upper[-2]], p[upper[-1]], p[i]) <= 0:
            upper.pop()
        upper.append(int(i))
    return lower[:-1] + upper[:-1]


def convex_hull(points) -> PolygonComponent:
    """Andrew's monotone chain; returns the CCW hull without collinear points."""
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        raise DegenerateShapeError("convex hull needs at least 3 distinct points")
    idx = _hull_indices(pts)
    if len(idx) < 3:
        raise DegenerateShapeError("all points are collinear")
    return PolygonComponent(pts[idx])


def _sqdist(p, q) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return dx * dx + dy * dy


def diameter_pair(shape_or_points) -> tuple[float, Point, Point]:
    """Farthest vertex pair via rotating calipers on the joint convex hull."""
    if isinstance(shape_or_points, Shape):
        pts = shape_or_points.vertices
    else:
        pts = np.asarray(shape_or_points, dtype=float).reshape(-1, 2)
    pts = np.unique(pts, axis=0)
    idx = _hull_indices(pts) if len(pts) >= 3 else list(range(len(pts)))
    h = pts[idx].tolist()
    m = len(h)
    if m == 1:
        return 0.0, Point(*h[0]), Point(*h[0])
    if m == 2:
        return math.sqrt(_sqdist(h[0], h[1])), Point(*h[0]), Point(*h[1])
    best, bp, bq = -1.0, h[0], h[0]
    j = 1
    for i in range(m):
        i1 = (i + 1) % m
        ex, ey = h[i1][0] - h[i][0], h[i1][1] - h[i][1]
        for _ in range(m):
            j1 = (j + 1) % m
            # advance while the next hull vertex is farther from the line of edge i
            if ex * (h[j1][1] - h[j][1]) - ey * (h[j1][0] - h[j][0]) > 0:
                j = j1
            else:
                break
        for a in (h[i], h[i1]):
            d = _sqdist(a, h[j])
            if d > best:
                best, bp, bq = d, a, h[j]
    return math.sqrt(best), Point(*bp), Point(*bq)


def diameter(shape: Shape) -> float:
    return diameter_pair(shape)[0]


# ---------------------------------------------------------------------------
# circles against polygon edges


def edge_circle_params(p: np.ndarray, q: np.ndarray, center: Sequence[float], radius: float):
    """Parameters t1 <= t2 where the lines p + t(q - p) meet the circle.

    Returns ``(t1, t2, crossing)``; ``crossing`` is False for misses and tangencies
    (normalized discriminant <= TANGENT_TOL), in which case t1 = t2 = 0.
    """
    c = np.asarray(center, dtype=float)
    p = p - c
    d = q - c - p
    a = np.einsum("ij,ij->i", d, d)
    hb = np.einsum("ij,ij->i", p, d) / a
    cc = (np.einsum("ij,ij->i", p, p) - radius * radius) / a
    disc = hb * hb - cc
    crossing = disc > TANGENT_TOL
    sq = np.sqrt(np.where(crossing, disc, 0.0))
    t1 = np.where(crossing, -hb - sq, 0.0)
    t2 = np.where(crossing, -hb + sq, 0.0)
    return t1, t2, crossing


def _sector_angle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.arctan2(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0], np.einsum("ij,ij->i", u, v))


def disk_polygon_intersection_area(disk: Disk, poly: PolygonComponent) -> float:
    """Exact |disk ∩ poly| by Green's theorem, one clipped triangle per edge.

    Each edge (p, q) contributes the signed area of disk ∩ triangle(center, p, q): the
    part of the edge inside the circle contributes a straight triangle, the parts outside
    contribute circular sectors.
    """
    c = np.asarray(disk.center)
    r = disk.radius
    p = poly.vertices
    q = np.roll(p, -1, axis=0)
    t1, t2, _ = edge_circle_params(p, q, c, r)
    t1 = np.clip(t1, 0.0, 1.0)[:, None]
    t2 = np.clip(t2, 0.0, 1.0)[:, None]
    pc, qc = p - c, q - c
    d = qc - pc
    a1 = pc + t1 * d
    a2 = pc + t2 * d
    tri = a1[:, 0] * a2[:, 1] - a1[:, 1] * a2[:, 0]
    sect = _sector_angle(pc, a1) + _sector_angle(a2, qc)
    val = 0.5 * float(np.sum(tri) + r * r * np.sum(sect))
    return min(max(val, 0.0), disk.area, poly.area)


def disk_shape_intersection_area(disk: Disk, shape: Shape) -> float:
    return sum(disk_polygon_intersection_area(disk, c) for c in shape.components)


def symm_diff_area_disk(shape: Shape, disk: Disk) -> float:
    """|shape Δ disk| = |shape| + |disk| - 2 |shape ∩ disk|."""
    val = area(shape) + disk.area - 2.0 * disk_shape_intersection_area(disk, shape)
    return max(val, 0.0)


def disk_disk_symm_diff(a: float) -> float:
    """|B(0,1) Δ B((a,0),1)| for unit disks whose centers are ``a`` apart."""
    if a < 0 or not math.isfinite(a):
        raise DomainError(f"center distance must be non-negative, got {a!r}")
    if a >= 2.0:
        return TWO_PI
    return 4.0 * math.asin(a / 2.0) + 2.0 * a * math.sqrt(1.0 - a * a / 4.0)


def polygonize_disk(disk: Disk, n: int = 2048, phase: float = 0.0) -> PolygonComponent:
    """Regular n-gon whose area equals the disk's area exactly.

    The circumradius is inflated by sqrt(2π / (n sin(2π/n))) instead of correcting the
    area afterwards.
    """
    if n < 8:
        raise ResolutionError(f"need at least 8 vertices, got {n}")
    rho = disk.radius * math.sqrt(TWO_PI / (n * math.sin(TWO_PI / n)))
    t = phase + TWO_PI * np.arange(n) / n
    v = np.column_stack([disk.center.x + rho * np.cos(t), disk.center.y + rho * np.sin(t)])
    return PolygonComponent(v)


# ---------------------------------------------------------------------------
# point location


def _all_edges(shape: Shape) -> tuple[np.ndarray, np.ndarray]:
    p = shape.vertices if len(shape.components) == 1 else np.concatenate(
        [c.vertices for c in shape.components]
    )
    q = np.concatenate([np.roll(c.vertices, -1, axis=0) for c in shape.components])
    return p, q


def contains(shape: Shape, points, chunk: int = 512) -> np.ndarray:
    """Even-odd point-in-shape test (boundary points classified arbitrarily)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    p, q = _all_edges(shape)
    out = np.zeros(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        x = pts[s : s + chunk, 0:1]
        y = pts[s : s + chunk, 1:2]
        straddle = (p[None, :, 1] > y) != (q[None, :, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = p[None, :, 0] + (y - p[None, :, 1]) * (q[None, :, 0] - p[None, :, 0]) / (
                q[None, :, 1] - p[None, :, 1]
            )
        out[s : s + chunk] = (np.sum(straddle & (x < xint), axis=1) % 2).astype(bool)
    return out


def boundary_distance(shape: Shape, points, chunk: int = 512) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    p, q = _all_edges(shape)
    d = q - p
    dd = np.einsum("ij,ij->i", d, d)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        x = pts[s : s + chunk, None, :]
        t = np.clip(np.einsum("kij,ij->ki", x - p[None], d) / dd, 0.0, 1.0)
        foot = p[None] + t[..., None] * d[None]
        out[s : s + chunk] = np.sqrt(np.min(np.sum((x - foot) ** 2, axis=2), axis=1))
    return out


def circle_arcs_inside(shape: Shape, disk: Disk, graze_tol: float = GRAZE_TOL):
    """Angular intervals of the circle ∂disk that lie in the (closed) shape.

    Returns ``(intervals, grazing_length)``.  Intervals are ``(t0, t1)`` pairs with
    ``t0 < t1`` measured from the disk center; an interval may extend past 2π.  Arcs
    whose midpoint lies within ``graze_tol`` of the shape boundary count as inside (the
    shape is closed) and their total length is reported as ``grazing_length``.
    """
    c = np.asarray(disk.center)
    r = disk.radius
    angles = []
    for comp in shape.components:
        p = comp.vertices
        q = np.roll(p, -1, axis=0)
        t1, t2, crossing = edge_circle_params(p, q, c, r)
        for t in (t1, t2):
            ok = crossing & (t >= 0.0) & (t < 1.0)
            pts = p[ok] + t[ok, None] * (q[ok] - p[ok]) - c
            angles.append(np.arctan2(pts[:, 1], pts[:, 0]))
    ang = np.sort(np.mod(np.concatenate(angles), TWO_PI)) if angles else np.empty(0)
    if len(ang):
        ang = ang[np.concatenate([[True], np.diff(ang) > 1e-15])]
    if len(ang) == 0:
        probe = c + np.array([[r, 0.0]])
        inside = bool(contains(shape, probe)[0])
        graze = not inside and bool(boundary_distance(shape, probe)[0] < graze_tol)
        if inside or graze:
            return [(0.0, TWO_PI)], (TWO_PI * r if graze else 0.0)
        return [], 0.0
    starts = ang
    ends = np.append(ang[1:], ang[0] + TWO_PI)
    mids = 0.5 * (starts + ends)
    probes = c + r * np.column_stack([np.cos(mids), np.sin(mids)])
    strictly = contains(shape, probes)
    near = boundary_distance(shape, probes) < graze_tol
    inside = strictly | near
    grazing = float(np.sum((ends - starts)[near & ~strictly])) * r
    intervals: list[tuple[float, float]] = []
    for t0, t1, ins in zip(starts, ends, inside):
        if not ins:
            continue
        if intervals and abs(intervals[-1][1] - t0) < 1e-15:
            intervals[-1] = (intervals[-1][0], float(t1))
        else:
            intervals.append((float(t0), float(t1)))
    if len(intervals) > 1 and abs(intervals[-1][1] - TWO_PI - intervals[0][0]) < 1e-15:
        last = intervals.pop()
        intervals[0] = (last[0] - TWO_PI, intervals[0][1])
    if len(intervals) == 1 and intervals[0][1] - intervals[0][0] >= TWO_PI - 1e-15:
        intervals = [(0.0, TWO_PI)]
    return intervals, grazing


# ---------------------------------------------------------------------------
# structural checks (O(n^2); verification mode only)


def _segments_intersect(p1, p2, q1, q2) -> np.ndarray:
    def orient(a, b, c):
        return np.sign((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))

    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def check_simple(poly: PolygonComponent, chunk: int = 256) -> None:
    """Raise ShapeError if two non-adjacent edges cross."""
    p = poly.vertices
    q = np.roll(p, -1, axis=0)
    n = len(p)
    idx = np.arange(n)
    for s in range(0, n, chunk):
        i = idx[s : s + chunk, None]
        hit = _segments_intersect(p[i], q[i], p[None, :], q[None, :])
        adjacent = (np.abs(i - idx[None, :]) <= 1) | (np.abs(i - idx[None, :]) == n - 1)
        if np.any(hit & ~adjacent):
            raise ShapeError("polygon is self-intersecting")


def check_disjoint(shape: Shape) -> None:
    """Raise ShapeError if two components cross or one contains the other."""
    comps = shape.components
    for a in range(len(comps)):
        for b in range(a + 1, len(comps)):
            pa, pb = comps[a].vertices, comps[b].vertices
            if not _bboxes_overlap(pa, pb):
                continue
            qa, qb = np.roll(pa, -1, axis=0), np.roll(pb, -1, axis=0)
            for s in range(0, len(pa), 256):
                if np.any(_segments_intersect(pa[s : s + 256, None], qa[s : s + 256, None], pb[None], qb[None])):
                    raise ShapeError(f"components {a} and {b} intersect")
            sa, sb = Shape((comps[a],)), Shape((comps[b],))
            if contains(sb, pa[:1])[0] or contains(sa, pb[:1])[0]:
                raise ShapeError(f"components {a} and {b} are nested")


def _bboxes_overlap(pa: np.ndarray, pb: np.ndarray) -> bool:
    return bool(
        np.all(pa.min(axis=0) <= pb.max(axis=0)) and np.all(pb.min(axis=0) <= pa.max(axis=0))
    )


def validate(shape: Shape, strict: bool = False) -> Shape:
    """Check the shape invariants; the O(n^2) checks run only when ``strict``."""
    area(shape)
    if strict:
        for c in shape.components:
            check_simple(c)
        check_disjoint(shape)
    return shape
