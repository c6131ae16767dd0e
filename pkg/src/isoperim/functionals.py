"""Isoperimetric deficit, barycentric and Fraenkel asymmetries, J, and their shape derivatives.

All functionals are written in scale-free form so shapes need not have area π:

    delta   = P / (2 sqrt(pi |K|)) - 1
    lambda0 = |K Δ B_G| / |K|        (B_G: equal-area disk at the barycenter)
    J       = delta / lambda0**2

The shape derivatives are exact derivatives of these polygon functionals when each
vertex moves along its bisector normal with the prescribed normal speed; for a polygon
sampled from a smooth curve they converge to the boundary-integral formulas.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from ._parallel import ordered_map
from .errors import DegenerateShapeError, ShapeError, UndefinedObjectiveError
from .geometry import (
    GRAZE_TOL,
    Disk,
    Point,
    PolygonComponent,
    Shape,
    barycenter,
    circle_arcs_inside,
    diameter,
    disk_shape_intersection_area,
    edge_circle_params,
    perimeter,
)

logger = logging.getLogger(__name__)

LAMBDA0_ZERO_TOL = 1e-4
"""Below this barycentric asymmetry the shape is treated as its own barycentric disk."""

IN_TOL = 1e-12


@dataclass(frozen=True)
class FunctionalReport:
    area: float
    perimeter: float
    barycenter: Point
    diameter: float
    delta: float
    lambda0: float
    fraenkel: float
    fraenkel_center: Point
    objective: float | None
    barycentric_disk: Disk

    FIELDS = (
        "area", "perimeter", "barycenter", "diameter", "delta", "lambda0",
        "fraenkel", "fraenkel_center", "objective", "barycentric_disk",
    )

    @property
    def objective_defined(self) -> bool:
        return self.objective is not None

    def to_dict(self) -> dict:
        d = self.barycentric_disk
        return {
            "area": self.area,
            "perimeter": self.perimeter,
            "barycenter": list(self.barycenter),
            "diameter": self.diameter,
            "delta": self.delta,
            "lambda0": self.lambda0,
            "fraenkel": self.fraenkel,
            "fraenkel_center": list(self.fraenkel_center),
            "objective": self.objective,
            "barycentric_disk": {"center": list(d.center), "radius": d.radius},
        }

    @staticmethod
    def csv_header() -> list[str]:
        return [
            "area", "perimeter", "barycenter_x", "barycenter_y", "diameter", "delta",
            "lambda0", "fraenkel", "fraenkel_center_x", "fraenkel_center_y", "objective",
            "barycentric_disk_x", "barycentric_disk_y", "barycentric_disk_radius",
        ]

    def csv_row(self) -> list:
        d = self.barycentric_disk
        return [
            self.area, self.perimeter, *self.barycenter, self.diameter, self.delta,
            self.lambda0, self.fraenkel, *self.fraenkel_center,
            "" if self.objective is None else self.objective,
            *d.center, d.radius,
        ]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FunctionalReport.csv_header())
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


class BasicTerms(NamedTuple):
    area: float
    perimeter: float
    barycenter: Point
    radius: float
    delta: float
    lambda0: float


def basic_terms(shape: Shape) -> BasicTerms:
    """Area, perimeter, barycenter, delta and lambda0 without the Fraenkel search."""
    a = sum(c.area for c in shape.components)
    if not a > 0:
        raise DegenerateShapeError("shape has non-positive area")
    p = perimeter(shape)
    g = barycenter(shape)
    rho = math.sqrt(a / math.pi)
    delta = p / (2.0 * math.sqrt(math.pi * a)) - 1.0
    inter = disk_shape_intersection_area(Disk(g, rho), shape)
    lam0 = max(2.0 * (a - inter) / a, 0.0)
    return BasicTerms(a, p, g, rho, delta, lam0)


def objective_value(delta: float, lambda0: float) -> float | None:
    if lambda0 <= LAMBDA0_ZERO_TOL:
        return None
    return delta / (lambda0 * lambda0)


class FraenkelResult(NamedTuple):
    value: float
    center: Point
    converged: bool


def fraenkel_asymmetry(shape: Shape, *, grid: int = 5, xatol: float = 1e-9) -> FraenkelResult:
    """Minimize |K Δ B_y| / |K| over centers y with a Nelder-Mead simplex.

    Starts at the barycenter; shapes with several components also start from a
    ``grid`` x ``grid`` lattice over the bounding box.  Ties are broken by the best
    value, then the lexicographically smallest center.
    """
    terms = basic_terms(shape)
    a, rho = terms.area, terms.radius

    def fun(c):
        inter = disk_shape_intersection_area(Disk((c[0], c[1]), rho), shape)
        return 2.0 * (a - inter) / a

    starts = [np.array(terms.barycenter)]
    if len(shape.components) > 1:
        v = shape.vertices
        lo, hi = v.min(axis=0), v.max(axis=0)
        xs = np.linspace(lo[0], hi[0], grid)
        ys = np.linspace(lo[1], hi[1], grid)
        starts += [np.array([x, y]) for x in xs for y in ys]

    h = 0.05 * rho

    def run(x0):
        simplex = np.array([x0, x0 + [h, 0.0], x0 + [0.0, h]])
        res = minimize(
            fun, x0, method="Nelder-Mead",
            options={"xatol": xatol, "fatol": 1e-13, "maxiter": 4000, "initial_simplex": simplex},
        )
        return float(res.fun), (float(res.x[0]), float(res.x[1])), bool(res.success)

    results = ordered_map(run, starts)
    results.append((terms.lambda0, tuple(terms.barycenter), True))
    best = min(results, key=lambda r: (r[0], r[1][0], r[1][1]))
    converged = results[0][2]
    if not converged:
        warnings.warn("Fraenkel center search did not converge; returning best value found", RuntimeWarning)
    return FraenkelResult(min(best[0], terms.lambda0), Point(*best[1]), converged)


def evaluate(shape: Shape, *, fraenkel: bool = True) -> FunctionalReport:
    """Full report; with ``fraenkel=False`` the Fraenkel fields repeat the barycentric values."""
    t = basic_terms(shape)
    if fraenkel:
        fr = fraenkel_asymmetry(shape)
        lam, fc = fr.value, fr.center
    else:
        lam, fc = t.lambda0, t.barycenter
    return FunctionalReport(
        area=t.area,
        perimeter=t.perimeter,
        barycenter=t.barycenter,
        diameter=diameter(shape),
        delta=t.delta,
        lambda0=t.lambda0,
        fraenkel=lam,
        fraenkel_center=fc,
        objective=objective_value(t.delta, t.lambda0),
        barycentric_disk=Disk(t.barycenter, t.radius),
    )


# ---------------------------------------------------------------------------
# discrete boundary geometry


def vertex_normals(comp: PolygonComponent) -> np.ndarray:
    """Outward unit bisector normal at each vertex."""
    e = comp.edges
    ne = np.column_stack([e[:, 1], -e[:, 0]]) / comp.edge_lengths[:, None]
    s = ne + np.roll(ne, 1, axis=0)
    return s / np.hypot(*s.T)[:, None]


def turning_angles(comp: PolygonComponent) -> np.ndarray:
    e = comp.edges
    prev = np.roll(e, 1, axis=0)
    return np.arctan2(prev[:, 0] * e[:, 1] - prev[:, 1] * e[:, 0], np.einsum("ij,ij->i", prev, e))


def discrete_curvature(comp: PolygonComponent) -> np.ndarray:
    """2 sin(turn/2) over the dual cell length (ℓ_prev + ℓ_next) / 2.

    With this normalization the curvature integral against a normal speed is the exact
    first variation of the polygon perimeter.
    """
    ell = comp.edge_lengths
    w = 0.5 * (ell + np.roll(ell, 1))
    return 2.0 * np.sin(0.5 * turning_angles(comp)) / w


@dataclass(frozen=True)
class PerturbationField:
    """Normal speed V·n sampled at the vertices of each component."""

    normal_speed: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "normal_speed", tuple(np.asarray(v, dtype=float) for v in self.normal_speed))
        for v in self.normal_speed:
            if v.ndim != 1 or not np.all(np.isfinite(v)):
                raise ShapeError("normal speeds must be finite 1-D arrays")

    def check(self, shape: Shape) -> None:
        if len(self.normal_speed) != len(shape.components) or any(
            len(v) != len(c) for v, c in zip(self.normal_speed, shape.components)
        ):
            raise ShapeError("perturbation samples do not match the boundary discretization")

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate(self.normal_speed)

    @classmethod
    def from_vector_field(cls, shape: Shape, field: Callable[[np.ndarray], np.ndarray]) -> "PerturbationField":
        """V·n at each vertex for a vector field V: (n, 2) points -> (n, 2) vectors."""
        return cls(tuple(
            np.einsum("ij,ij->i", np.asarray(field(c.vertices), dtype=float), vertex_normals(c))
            for c in shape.components
        ))

    @classmethod
    def from_stacked(cls, shape: Shape, values) -> "PerturbationField":
        values = np.asarray(values, dtype=float)
        splits = np.cumsum([len(c) for c in shape.components])[:-1]
        return cls(tuple(np.split(values, splits)))

    @classmethod
    def zero(cls, shape: Shape) -> "PerturbationField":
        return cls(tuple(np.zeros(len(c)) for c in shape.components))

    def displace(self, shape: Shape, t: float) -> Shape:
        """Move every vertex by t·(V·n)·n along its bisector normal."""
        self.check(shape)
        return Shape(tuple(
            PolygonComponent(c.vertices + t * v[:, None] * vertex_normals(c))
            for c, v in zip(shape.components, self.normal_speed)
        ))


@dataclass(frozen=True)
class BoundaryWeights:
    """Per-vertex linear forms giving boundary integrals of a normal speed field.

    For a normal speed vector ``v`` (stacked over components):
    ``curv @ v`` is dP, ``area @ v`` is d|K|, ``inside @ v`` / ``outside @ v`` split d|K|
    by the circle, and ``moment_x @ v``, ``moment_y @ v`` are the derivatives of the
    first moments of K.
    """

    points: np.ndarray
    inside_flag: np.ndarray
    curv: np.ndarray
    area: np.ndarray
    inside: np.ndarray
    outside: np.ndarray
    moment_x: np.ndarray
    moment_y: np.ndarray


def _hat_integrals(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """∫_a^b (1-τ) dτ and ∫_a^b τ dτ."""
    sq = 0.5 * (b * b - a * a)
    return (b - a) - sq, sq


def boundary_weights(shape: Shape, center, radius: float) -> BoundaryWeights:
    cols = {k: [] for k in ("points", "flag", "curv", "area", "inside", "mx", "my")}
    c = np.asarray(center, dtype=float)
    for comp in shape.components:
        v = comp.vertices
        nxt = np.roll(v, -1, axis=0)
        e = nxt - v
        ell = comp.edge_lengths
        ne = np.column_stack([e[:, 1], -e[:, 0]]) / ell[:, None]
        nh = vertex_normals(comp)
        cs = ell * np.einsum("ij,ij->i", nh, ne)
        ce = ell * np.einsum("ij,ij->i", np.roll(nh, -1, axis=0), ne)

        t1, t2, _ = edge_circle_params(v, nxt, c, radius)
        t1 = np.clip(t1, 0.0, 1.0)
        t2 = np.clip(t2, 0.0, 1.0)
        hs, he = _hat_integrals(t1, t2)
        w_in = cs * hs + np.roll(ce * he, 1)
        w_all = 0.5 * (cs + np.roll(ce, 1))

        mom = []
        for k in (0, 1):
            xs, xe = v[:, k], nxt[:, k]
            start = cs * (xs / 3.0 + xe / 6.0)
            end = ce * (xs / 6.0 + xe / 3.0)
            mom.append(start + np.roll(end, 1))

        r = np.hypot(*(v - c).T)
        cols["points"].append(v)
        cols["flag"].append(r < radius - IN_TOL)
        cols["curv"].append(2.0 * np.sin(0.5 * turning_angles(comp)))
        cols["area"].append(w_all)
        cols["inside"].append(w_in)
        cols["mx"].append(mom[0])
        cols["my"].append(mom[1])
    cat = {k: np.concatenate(val) for k, val in cols.items()}
    return BoundaryWeights(
        points=cat["points"], inside_flag=cat["flag"], curv=cat["curv"], area=cat["area"],
        inside=cat["inside"], outside=cat["area"] - cat["inside"],
        moment_x=cat["mx"], moment_y=cat["my"],
    )


class ArcIntegrals(NamedTuple):
    """Length (in angle) and ∫cos t, ∫sin t over the arcs of a circle inside K."""

    length: float
    cos: float
    sin: float
    grazing: float


def arc_integrals(shape: Shape, disk: Disk, graze_tol: float = GRAZE_TOL) -> ArcIntegrals:
    intervals, grazing = circle_arcs_inside(shape, disk, graze_tol)
    L = C = S = 0.0
    for t0, t1 in intervals:
        L += t1 - t0
        C += math.sin(t1) - math.sin(t0)
        S += math.cos(t0) - math.cos(t1)
    return ArcIntegrals(L, C, S, grazing)


# ---------------------------------------------------------------------------
# shape derivatives


def delta_derivative(shape: Shape, field: PerturbationField) -> float:
    """d/dt delta(K_t) = ∫C V·n / (2 sqrt(π|K|)) - (delta+1) ∫V·n / (2|K|).

    At |K| = π this is ∫ (C - delta - 1) V·n / (2π).
    """
    field.check(shape)
    t = basic_terms(shape)
    v = field.stacked
    wts = boundary_weights(shape, t.barycenter, t.radius)
    dP = float(wts.curv @ v)
    dA = float(wts.area @ v)
    return dP / (2.0 * math.sqrt(math.pi * t.area)) - (t.delta + 1.0) * dA / (2.0 * t.area)


def lambda0_derivative(shape: Shape, field: PerturbationField) -> float:
    """d/dt lambda0(K_t), with the barycentric disk following K_t.

    The disk moves with W·n = a cos t + b sin t + alpha, where (a, b) is the barycenter
    velocity and alpha the radius velocity; then

        d|KΔB| = ∫_{∂B out} W·n - ∫_{∂B in} W·n + ∫_{∂K out} V·n - ∫_{∂K in} V·n
        dlambda0 = (d|KΔB| - lambda0 ∫_{∂K} V·n) / |K|.
    """
    field.check(shape)
    t = basic_terms(shape)
    v = field.stacked
    rho = t.radius
    g = np.asarray(t.barycenter)
    wts = boundary_weights(shape, g, rho)
    dA = float(wts.area @ v)
    dM = np.array([wts.moment_x @ v, wts.moment_y @ v])
    a, b = (dM - g * dA) / t.area
    alpha = dA / (2.0 * math.pi * rho)

    disk = Disk(t.barycenter, rho)
    # the derivative needs the exact partition; grazing only triggers the warning
    arcs = arc_integrals(shape, disk, graze_tol=0.0)
    if circle_arcs_inside(shape, disk)[1] > 0:
        warnings.warn(
            f"boundary grazes the barycentric circle; partition is ill-conditioned",
            RuntimeWarning,
        )
    # out = full circle minus in; ∫ cos and ∫ sin over the full circle vanish
    cos_diff = -2.0 * arcs.cos
    sin_diff = -2.0 * arcs.sin
    len_diff = 2.0 * math.pi - 2.0 * arcs.length
    ball = rho * (a * cos_diff + b * sin_diff + alpha * len_diff)
    boundary = float((wts.outside - wts.inside) @ v)
    return (ball + boundary - t.lambda0 * dA) / t.area


def objective_derivative(shape: Shape, field: PerturbationField) -> float:
    """dJ = ddelta / lambda0² - 2 delta dlambda0 / lambda0³."""
    t = basic_terms(shape)
    if t.lambda0 <= LAMBDA0_ZERO_TOL:
        raise UndefinedObjectiveError("lambda0 vanishes; J is undefined")
    dd = delta_derivative(shape, field)
    dl = lambda0_derivative(shape, field)
    return dd / t.lambda0**2 - 2.0 * t.delta * dl / t.lambda0**3
