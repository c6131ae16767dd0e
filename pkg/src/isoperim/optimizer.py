"""Minimize J over unions of star-shaped Fourier components with |K| = π and diam(K) <= D.

Each component is ``center + r(φ)(cos φ, sin φ)`` with
``r(φ) = r0 (1 + Σ_k a_k cos kφ + b_k sin kφ)``.  Descent is projected gradient with
central finite-difference gradients of ``J ∘ project ∘ synthesize``; the projection
rescales to area π and pulls components together until the diameter fits.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._parallel import ordered_map
from .constructions import build_two_disk_competitor
from .errors import DomainError, InfeasibleError, InvalidParametrizationError, ShapeError, UndefinedObjectiveError
from .functionals import basic_terms
from .geometry import Point, PolygonComponent, Shape, _hull_indices, check_disjoint, diameter

logger = logging.getLogger(__name__)

LAMBDA0_FLOOR = 1e-3
AREA_TOL = 1e-9
DIAM_TOL = 1e-9


@dataclass(frozen=True)
class ComponentParam:
    center: Point
    r0: float
    cos_coeffs: tuple[float, ...]
    sin_coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))
        if len(self.cos_coeffs) != len(self.sin_coeffs):
            raise DomainError("cos and sin coefficient lists must have the same length")

    @property
    def modes(self) -> int:
        return len(self.cos_coeffs)

    def radial(self, phi: np.ndarray, order: int = 0) -> np.ndarray:
        """r(φ) or its first / second derivative."""
        k = np.arange(1, self.modes + 1)[:, None]
        a = np.asarray(self.cos_coeffs)[:, None]
        b = np.asarray(self.sin_coeffs)[:, None]
        kp = k * phi[None, :]
        if order == 0:
            return self.r0 * (1.0 + np.sum(a * np.cos(kp) + b * np.sin(kp), axis=0))
        if order == 1:
            return self.r0 * np.sum(k * (-a * np.sin(kp) + b * np.cos(kp)), axis=0)
        return self.r0 * np.sum(-(k * k) * (a * np.cos(kp) + b * np.sin(kp)), axis=0)

    def smooth_area(self) -> float:
        """Area enclosed by the smooth curve: π r0² (1 + Σ (a_k² + b_k²) / 2)."""
        s = sum(a * a for a in self.cos_coeffs) + sum(b * b for b in self.sin_coeffs)
        return math.pi * self.r0**2 * (1.0 + 0.5 * s)


@dataclass(frozen=True)
class ShapeParam:
    components: tuple[ComponentParam, ...]

    def to_vector(self) -> np.ndarray:
        parts = []
        for c in self.components:
            parts += [c.center.x, c.center.y, c.r0, *c.cos_coeffs, *c.sin_coeffs]
        return np.array(parts)

    def from_vector(self, x) -> "ShapeParam":
        comps, i = [], 0
        for c in self.components:
            m = c.modes
            comps.append(ComponentParam((x[i], x[i + 1]), x[i + 2], x[i + 3 : i + 3 + m], x[i + 3 + m : i + 3 + 2 * m]))
            i += 3 + 2 * m
        return ShapeParam(tuple(comps))

    def to_dict(self) -> dict:
        return {"components": [
            {"center": list(c.center), "r0": c.r0, "cos_coeffs": list(c.cos_coeffs), "sin_coeffs": list(c.sin_coeffs)}
            for c in self.components
        ]}

    @classmethod
    def from_dict(cls, obj) -> "ShapeParam":
        return cls(tuple(
            ComponentParam(tuple(c["center"]), c["r0"], c["cos_coeffs"], c["sin_coeffs"]) for c in obj["components"]
        ))


@dataclass(frozen=True)
class OptimConfig:
    D: float = 10.0
    modes: int = 8
    max_iters: int = 300
    fd_step: float = 1e-6
    tol_grad: float = 1e-7
    penalty_diameter: float = 0.0
    resolution: int = 512
    seed: int = 0
    components: int = 2

    def __post_init__(self):
        if not self.D >= 10.0:
            raise DomainError(f"D must be at least 10, got {self.D}")
        if self.modes < 2:
            raise DomainError("need at least 2 Fourier modes")
        if self.resolution < 128:
            raise DomainError("resolution must be at least 128 vertices per component")
        if self.components not in (1, 2, 3):
            raise DomainError("components must be 1, 2 or 3")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptimTrace:
    iterations: list[tuple[int, float, float, float, float, float, float]] = field(default_factory=list)
    stalled: bool = False

    COLUMNS = ("iter", "J", "delta", "lambda0", "diameter", "grad_norm", "step")

    def append(self, *row) -> None:
        self.iterations.append(tuple(row))

    @property
    def J(self) -> np.ndarray:
        return np.array([r[1] for r in self.iterations])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.iterations:
            w.writerow([r[0], *(repr(float(v)) for v in r[1:])])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# synthesis


def synthesize(param: ShapeParam, resolution: int = 512) -> Shape:
    """Sample each component at ``resolution`` equal angles; carries exact curvature and normals."""
    phi = 2.0 * math.pi * np.arange(resolution) / resolution
    cs, sn = np.cos(phi), np.sin(phi)
    comps = []
    for i, c in enumerate(param.components):
        r = c.radial(phi)
        if not np.all(r > 0):
            raise InvalidParametrizationError(f"component {i}: r(φ) <= 0 at some sample angle")
        r1 = c.radial(phi, 1)
        r2 = c.radial(phi, 2)
        v = np.column_stack([c.center.x + r * cs, c.center.y + r * sn])
        tx, ty = r1 * cs - r * sn, r1 * sn + r * cs
        speed = np.hypot(tx, ty)
        kappa = (r * r + 2.0 * r1 * r1 - r * r2) / speed**3
        normals = np.column_stack([ty, -tx]) / speed[:, None]
        comps.append(PolygonComponent(v, kappa, normals))
    return Shape(tuple(comps))


def param_from_disks(disks, modes: int) -> ShapeParam:
    """Zero-coefficient parametrization of a list of (center, radius)."""
    z = (0.0,) * modes
    return ShapeParam(tuple(ComponentParam(c, r, z, z) for c, r in disks))


def initial_param(config: OptimConfig, kind: str = "two-disks") -> ShapeParam:
    if kind == "two-disks":
        comp, _ = build_two_disk_competitor(config.D, n=16)
        disks = list(zip(comp.centers, (comp.R1, comp.R2)))
        if config.components == 1:
            disks = [(Point(0.0, 0.0), 1.0)]
        elif config.components == 3:
            # a third, small disk near the barycentric disk
            disks = disks + [(Point(comp.barycenter_x - 1.5, 0.0), 0.1)]
        param = param_from_disks(disks, config.modes)
    elif kind == "disk":
        param = param_from_disks([(Point(0.0, 0.0), 1.0)], config.modes)
    else:
        raise DomainError(f"unknown initial shape {kind!r}")
    rng = np.random.default_rng(config.seed)
    if kind == "disk" or config.components == 1:
        # break the symmetry of the disk, which is not admissible (lambda0 = 0)
        x = param.to_vector()
        x[3:] += rng.normal(0.0, 0.05, len(x) - 3)
        param = param.from_vector(x)
    return param


# ---------------------------------------------------------------------------
# constraints


def _convex_offsets(comp: PolygonComponent, center: Point) -> np.ndarray:
    v = comp.vertices
    return v[_hull_indices(v)] - np.asarray(center)


def _minkowski_sum(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Vertices of P ⊕ Q for convex CCW polygons (edge-angle merge)."""

    def canon(A):
        i = np.lexsort((A[:, 0], A[:, 1]))[0]
        A = np.roll(A, -i, axis=0)
        e = np.roll(A, -1, axis=0) - A
        return A[0], e, np.mod(np.arctan2(e[:, 1], e[:, 0]), 2.0 * math.pi)

    p0, ep, ap = canon(P)
    q0, eq, aq = canon(Q)
    e = np.concatenate([ep, eq])
    order = np.argsort(np.concatenate([ap, aq]), kind="stable")
    return (p0 + q0) + np.concatenate([[np.zeros(2)], np.cumsum(e[order], axis=0)[:-1]])


def _pull_factor(hulls, centers, D: float) -> float:
    """Largest s in [0, 1] such that pulling centers to m + s (c - m) gives diameter <= D."""
    s_best = 1.0
    for i in range(len(hulls)):
        for j in range(i + 1, len(hulls)):
            z = _minkowski_sum(hulls[j], -hulls[i])
            dc = centers[j] - centers[i]
            aa = float(dc @ dc)
            bb = z @ dc
            cc = np.einsum("ij,ij->i", z, z) - D * D
            if np.max(np.einsum("ij,ij->i", z + dc, z + dc)) <= D * D:
                continue
            if aa == 0.0:
                raise InfeasibleError("coincident centers cannot be pulled together")
            disc = bb * bb - aa * cc
            if np.any(disc < 0):
                raise InfeasibleError("components are too wide to fit the diameter bound")
            s_best = min(s_best, float(np.min((-bb + np.sqrt(disc)) / aa)))
    if s_best < 0:
        raise InfeasibleError("diameter bound cannot be met by pulling components together")
    return s_best


def _components_disjoint(shape: Shape, param: ShapeParam) -> bool:
    comps = shape.components
    reach = [float(np.max(np.hypot(*(c.vertices - np.asarray(p.center)).T))) for c, p in zip(comps, param.components)]
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            d = math.dist(param.components[i].center, param.components[j].center)
            if d <= reach[i] + reach[j]:
                try:
                    check_disjoint(Shape((comps[i], comps[j])))
                except ShapeError:
                    return False
    return True


def _scaled(param: ShapeParam, factor: float) -> ShapeParam:
    m = np.mean([c.center for c in param.components], axis=0)
    return ShapeParam(tuple(
        replace(c, center=Point(*(m + factor * (np.asarray(c.center) - m))), r0=c.r0 * factor)
        for c in param.components
    ))


def _pulled(param: ShapeParam, s: float) -> ShapeParam:
    m = np.mean([c.center for c in param.components], axis=0)
    return ShapeParam(tuple(
        replace(c, center=Point(*(m + s * (np.asarray(c.center) - m)))) for c in param.components
    ))


def project_constraints(param: ShapeParam, config: OptimConfig) -> ShapeParam:
    """Scale to area π, then pull centers together until diam <= D, then rescale."""
    shape = synthesize(param, config.resolution)
    a = sum(c.area for c in shape.components)
    param = _scaled(param, math.sqrt(math.pi / a))
    for _ in range(2):
        shape = synthesize(param, config.resolution)
        for comp in shape.components:
            if diameter(Shape((comp,))) > config.D:
                raise InfeasibleError("a single component is wider than D")
        if len(param.components) > 1:
            hulls = [_convex_offsets(c, p.center) for c, p in zip(shape.components, param.components)]
            centers = [np.asarray(p.center) for p in param.components]
            s = _pull_factor(hulls, centers, config.D)
            if s < 1.0:
                param = _pulled(param, s)
                shape = synthesize(param, config.resolution)
            if not _components_disjoint(shape, param):
                raise InfeasibleError("components overlap after the diameter pull-in")
        a = sum(c.area for c in shape.components)
        if abs(a - math.pi) <= AREA_TOL:
            break
        param = _scaled(param, math.sqrt(math.pi / a))
    return param


# ---------------------------------------------------------------------------
# descent


class StencilError(UndefinedObjectiveError):
    """J is undefined at a point of the finite-difference stencil."""


def objective(param: ShapeParam, config: OptimConfig) -> float:
    """J of the projected, synthesized shape; +inf where the step leaves the admissible set."""
    try:
        p = project_constraints(param, config)
        t = basic_terms(synthesize(p, config.resolution))
    except (InfeasibleError, InvalidParametrizationError, ShapeError):
        return math.inf
    if t.lambda0 < LAMBDA0_FLOOR:
        return math.inf
    return t.delta / t.lambda0**2


def gradient(param: ShapeParam, config: OptimConfig) -> np.ndarray:
    """Central differences of J ∘ project ∘ synthesize in coefficient space."""
    x = param.to_vector()
    h = config.fd_step

    def probe(k):
        e = np.zeros_like(x)
        e[k] = h
        return objective(param.from_vector(x + e), config), objective(param.from_vector(x - e), config)

    vals = ordered_map(probe, range(len(x)))
    g = np.array([(fp - fm) / (2.0 * h) for fp, fm in vals])
    if not np.all(np.isfinite(g)):
        raise StencilError("J is undefined inside the finite-difference stencil")
    return g


def _feasibility(shape: Shape, config: OptimConfig) -> tuple[float, float]:
    a = sum(c.area for c in shape.components)
    d = diameter(shape)
    if abs(a - math.pi) > AREA_TOL or d > config.D + DIAM_TOL:
        raise InfeasibleError(f"iterate infeasible: area error {a - math.pi:.3e}, diameter {d:.12g}")
    return a, d


def minimize(config: OptimConfig, init: ShapeParam, callback=None) -> tuple[ShapeParam, OptimTrace]:
    """Projected gradient descent with Armijo backtracking (factor 0.5, c = 1e-4)."""
    c_armijo = 1e-4
    p = project_constraints(init, config)
    shape = synthesize(p, config.resolution)
    t = basic_terms(shape)
    J = t.delta / t.lambda0**2
    _, d = _feasibility(shape, config)
    trace = OptimTrace()
    trace.append(0, J, t.delta, t.lambda0, d, math.nan, 0.0)
    alpha = 1.0
    for it in range(1, config.max_iters + 1):
        g = gradient(p, config)
        gn = float(np.linalg.norm(g))
        if gn < config.tol_grad:
            break
        x = p.to_vector()
        accepted = False
        for _ in range(50):
            cand = p.from_vector(x - alpha * g)
            Jc = objective(cand, config)
            if config.penalty_diameter > 0 and math.isfinite(Jc):
                over = max(diameter(synthesize(cand, config.resolution)) - config.D, 0.0)
                Jc += config.penalty_diameter * over * over
            if Jc <= J - c_armijo * alpha * gn * gn:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            trace.stalled = True
            logger.info("line search stalled at iteration %d (J=%.10g)", it, J)
            break
        p = project_constraints(cand, config)
        shape = synthesize(p, config.resolution)
        t = basic_terms(shape)
        J = t.delta / t.lambda0**2
        _, d = _feasibility(shape, config)
        trace.append(it, J, t.delta, t.lambda0, d, gn, alpha)
        if callback is not None:
            callback(it, p, trace)
        alpha = min(alpha * 2.0, 1e3)
    return p, trace


def run_config_json(config: OptimConfig, init_kind: str) -> str:
    return json.dumps({"config": config.to_dict(), "init": init_kind}, indent=2)
