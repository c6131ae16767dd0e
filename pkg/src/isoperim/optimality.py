"""First-order optimality condition for minimizers of J and pendulum shooting.

Everything here works in the barycentric frame: the shape is translated so its
barycenter is the origin and scaled to area π, which makes the barycentric disk the
unit disk.  In that frame a stationary shape has curvature

    C(x, y) = 1 - 3δ + 4δ/(2πλ0) (|∂B_out| - |∂B_in|) ± 4δ/λ0 + μ1 x + μ2 y

(+ outside the unit disk, - inside), with μ1, μ2 given by the cosine and sine
moments of the arcs of the unit circle outside and inside the shape.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegeneratePartitionError,
    DivergenceError,
    InsufficientDataError,
    UndefinedObjectiveError,
)
from .functionals import (
    LAMBDA0_ZERO_TOL,
    BasicTerms,
    basic_terms,
    boundary_weights,
    discrete_curvature,
    vertex_normals,
)
from .geometry import GRAZE_TOL, Disk, Point, Shape, circle_arcs_inside

TWO_PI = 2.0 * math.pi
EXCLUDE_TOL = 1e-6


@dataclass(frozen=True)
class BarycentricPartition:
    len_B_out: float
    len_B_in: float
    int_cos_out: float
    int_cos_in: float
    int_sin_out: float
    int_sin_in: float
    intervals: tuple[tuple[float, float], ...] = ()
    grazing_length: float = 0.0


@dataclass(frozen=True)
class MultiplierPair:
    mu1: float
    mu2: float


def to_barycentric_frame(shape: Shape) -> tuple[Shape, float, Point]:
    """Translate the barycenter to the origin and scale to area π.

    Returns ``(normalized, scale, barycenter)`` with ``normalized = scale * (shape - barycenter)``.
    """
    t = basic_terms(shape)
    scale = 1.0 / t.radius
    g = t.barycenter
    return shape.translated(-g.x, -g.y).scaled(scale), scale, g


def circle_partition(shape: Shape, disk: Disk, strict: bool = False) -> BarycentricPartition:
    """Split a circle into arcs inside and outside the (closed) shape; angles from the disk center."""
    intervals, grazing = circle_arcs_inside(shape, disk, GRAZE_TOL)
    if strict and grazing > 0:
        raise DegeneratePartitionError(f"shape boundary runs along the circle over length {grazing:.3g}")
    L = C = S = 0.0
    for t0, t1 in intervals:
        L += t1 - t0
        C += math.sin(t1) - math.sin(t0)
        S += math.cos(t0) - math.cos(t1)
    return BarycentricPartition(
        len_B_out=TWO_PI - L, len_B_in=L,
        int_cos_out=-C, int_cos_in=C,
        int_sin_out=-S, int_sin_in=S,
        intervals=tuple(intervals), grazing_length=grazing,
    )


def barycentric_partition(shape: Shape, strict: bool = False) -> BarycentricPartition:
    """Arcs of the unit barycentric circle inside / outside the shape, in the barycentric frame."""
    normalized, _, _ = to_barycentric_frame(shape)
    return circle_partition(normalized, Disk((0.0, 0.0), 1.0), strict)


def _check_lambda0(terms) -> None:
    if terms.lambda0 <= LAMBDA0_ZERO_TOL:
        raise UndefinedObjectiveError("lambda0 vanishes; the optimality condition is undefined")


def multipliers_from(terms, partition: BarycentricPartition) -> MultiplierPair:
    _check_lambda0(terms)
    k = 4.0 * terms.delta / (math.pi * terms.lambda0)
    return MultiplierPair(
        k * (partition.int_cos_out - partition.int_cos_in),
        k * (partition.int_sin_out - partition.int_sin_in),
    )


def multipliers(shape: Shape) -> MultiplierPair:
    normalized, _, _ = to_barycentric_frame(shape)
    return multipliers_from(basic_terms(normalized), circle_partition(normalized, Disk((0.0, 0.0), 1.0)))


def curvature_constant(report, partition: BarycentricPartition, inside: bool) -> float:
    """The part of the predicted curvature that does not depend on position."""
    _check_lambda0(report)
    d, l0 = report.delta, report.lambda0
    jump = 4.0 * d / l0
    base = 1.0 - 3.0 * d + 4.0 * d / (TWO_PI * l0) * (partition.len_B_out - partition.len_B_in)
    return base - jump if inside else base + jump


def predicted_curvature(report, partition: BarycentricPartition, mult: MultiplierPair, p, inside: bool) -> float:
    """Curvature a stationary shape must have at ``p`` (barycentric frame)."""
    return curvature_constant(report, partition, inside) + mult.mu1 * p[0] + mult.mu2 * p[1]


@dataclass(frozen=True)
class CurvatureProfile:
    """Boundary samples with measured and predicted curvature, column-wise."""

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    kappa_measured: np.ndarray
    kappa_predicted: np.ndarray
    inside: np.ndarray
    evaluable: np.ndarray
    weights: np.ndarray
    switches: tuple[int, ...] = ()
    jumps_measured: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return len(self.s)

    @property
    def residual(self) -> np.ndarray:
        return self.kappa_measured - self.kappa_predicted

    @property
    def sup_norm(self) -> float:
        r = self.residual[self.evaluable]
        return float(np.max(np.abs(r))) if len(r) else 0.0

    @property
    def l2_norm(self) -> float:
        r = self.residual[self.evaluable]
        return float(math.sqrt(np.sum(self.weights[self.evaluable] * r * r)))

    def closure_gap(self) -> float:
        """Distance between end and start, position and tangent (tangent mod 2π)."""
        dx = self.x[-1] - self.x[0]
        dy = self.y[-1] - self.y[0]
        dth = self.theta[-1] - self.theta[0]
        dth -= TWO_PI * round(dth / TWO_PI)
        return math.sqrt(dx * dx + dy * dy + dth * dth)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "x", "y", "theta", "kappa_measured", "kappa_predicted", "inside"])
        for row in zip(self.s, self.x, self.y, self.theta, self.kappa_measured, self.kappa_predicted, self.inside):
            w.writerow([repr(float(v)) for v in row[:6]] + [int(row[6])])
        return buf.getvalue()


def optimality_residual(shape: Shape, container: Disk | None = None, min_samples: int = 8) -> CurvatureProfile:
    """Measured minus predicted curvature at every vertex, in the barycentric frame.

    Vertices within 1e-6 of the barycentric circle or of the ``container`` circle are
    kept in the profile but excluded from the norms.  Components that carry smooth
    curvature data use it; raw polygons use the discrete curvature.
    """
    normalized, scale, g = to_barycentric_frame(shape)
    terms = basic_terms(normalized)
    part = circle_partition(normalized, Disk((0.0, 0.0), 1.0))
    mult = multipliers_from(terms, part)
    c_in = curvature_constant(terms, part, True)
    c_out = curvature_constant(terms, part, False)

    cols = {k: [] for k in ("s", "x", "y", "theta", "km", "w")}
    offset = 0.0
    for comp in normalized.components:
        v = comp.vertices
        ell = comp.edge_lengths
        normals = comp.normals if comp.normals is not None else vertex_normals(comp)
        kappa = comp.curvature if comp.curvature is not None else discrete_curvature(comp)
        cols["s"].append(offset + np.concatenate([[0.0], np.cumsum(ell[:-1])]))
        offset += float(ell.sum())
        cols["x"].append(v[:, 0])
        cols["y"].append(v[:, 1])
        cols["theta"].append(np.unwrap(np.arctan2(normals[:, 0], -normals[:, 1])))
        cols["km"].append(kappa)
        cols["w"].append(0.5 * (ell + np.roll(ell, 1)))
    s, x, y, theta, km, w = (np.concatenate(cols[k]) for k in ("s", "x", "y", "theta", "km", "w"))
    r = np.hypot(x, y)
    inside = r < 1.0 - 1e-12
    kp = np.where(inside, c_in, c_out) + mult.mu1 * x + mult.mu2 * y
    ok = np.abs(r - 1.0) >= EXCLUDE_TOL
    if container is not None:
        cc = (np.asarray(container.center) - np.asarray(g)) * scale
        ok &= np.abs(np.hypot(x - cc[0], y - cc[1]) - container.radius * scale) >= EXCLUDE_TOL
    if ok.sum() < min_samples:
        raise InsufficientDataError(f"only {int(ok.sum())} evaluable boundary samples")
    return CurvatureProfile(s, x, y, theta, km, kp, inside, ok, w)


def canonical_rotation(shape: Shape) -> tuple[Shape, float]:
    """Rotate about the barycenter so that μ2 = 0 and μ1 >= 0; returns (shape, angle)."""
    m = multipliers(shape)
    angle = -math.atan2(m.mu2, m.mu1)
    return shape.rotated(angle, about=basic_terms(shape).barycenter), angle


def stationarity_gradient(shape: Shape) -> np.ndarray:
    """Per-vertex vector g with g @ v = 2π λ0² dJ(v) for a shape in the barycentric frame.

    Built from the curvature condition: g is the weak form of C - C_predicted, so it
    vanishes exactly when the discrete optimality condition holds.
    """
    terms = basic_terms(shape)
    part = circle_partition(shape, Disk((0.0, 0.0), 1.0))
    mult = multipliers_from(terms, part)
    wts = boundary_weights(shape, (0.0, 0.0), 1.0)
    base = curvature_constant(terms, part, inside=False) - 4.0 * terms.delta / terms.lambda0
    jump = 4.0 * terms.delta / terms.lambda0
    return (
        wts.curv
        - base * wts.area
        - mult.mu1 * wts.moment_x
        - mult.mu2 * wts.moment_y
        - jump * (wts.outside - wts.inside)
    )


# ---------------------------------------------------------------------------
# pendulum shooting


@dataclass(frozen=True)
class ShootingParams:
    a_out: float
    a_in: float
    mu1: float
    start: Point
    theta0: float
    arclength_budget: float
    step: float

    def __post_init__(self):
        object.__setattr__(self, "start", Point(float(self.start[0]), float(self.start[1])))
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.arclength_budget > 0:
            raise ValueError("arclength budget must be positive")


def _rhs(state: np.ndarray, a: float, mu1: float) -> np.ndarray:
    return np.array([math.cos(state[2]), math.sin(state[2]), a + mu1 * state[0]])


def _rk4(state: np.ndarray, h: float, a: float, mu1: float) -> np.ndarray:
    k1 = _rhs(state, a, mu1)
    k2 = _rhs(state + 0.5 * h * k1, a, mu1)
    k3 = _rhs(state + 0.5 * h * k2, a, mu1)
    k4 = _rhs(state + h * k3, a, mu1)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _is_inside(state) -> bool:
    return state[0] * state[0] + state[1] * state[1] < 1.0


def _fd_weights(offsets: np.ndarray) -> np.ndarray:
    """First-derivative weights at 0 for each row of stencil offsets (batched)."""
    k = offsets.shape[1]
    h = np.max(np.abs(offsets), axis=1, keepdims=True)
    h[h == 0] = 1.0
    z = offsets / h
    A = z[:, None, :] ** np.arange(k)[None, :, None]
    rhs = np.zeros((len(z), k, 1))
    rhs[:, 1, 0] = 1.0
    return np.linalg.solve(A, rhs)[..., 0] / h


def _arc_derivative(s: np.ndarray, f: np.ndarray, width: int = 5) -> np.ndarray:
    m = len(s)
    k = min(width, m)
    start = np.clip(np.arange(m) - k // 2, 0, m - k)
    idx = start[:, None] + np.arange(k)[None, :]
    w = _fd_weights(s[idx] - s[:, None])
    return np.sum(w * f[idx], axis=1)


def shoot(params: ShootingParams, bound: float = 100.0) -> CurvatureProfile:
    """Integrate x' = cos θ, y' = sin θ, θ' = a + μ1 x with fixed-step RK4.

    ``a`` is ``a_in`` inside the unit circle and ``a_out`` outside.  Crossings are
    located by bisection to 1e-12 in arclength and become samples; θ is continuous
    across them while θ' jumps by a_out - a_in.  ``kappa_measured`` is a 5-point
    finite-difference derivative of θ within each arc; ``kappa_predicted`` is the
    right-hand side a + μ1 x.
    """
    mu1 = params.mu1
    state = np.array([params.start.x, params.start.y, params.theta0], dtype=float)
    inside = _is_inside(state)
    s = 0.0
    L = params.arclength_budget
    S, X, side, switches = [0.0], [state.copy()], [inside], []
    max_steps = int(math.ceil(L / params.step)) * 4 + 1000
    for _ in range(max_steps):
        if s >= L - 1e-14:
            break
        h = min(params.step, L - s)
        a = params.a_in if inside else params.a_out
        new = _rk4(state, h, a, mu1)
        if _is_inside(new) != inside:
            lo, hi = 0.0, h
            while hi - lo > 1e-12:
                mid = 0.5 * (lo + hi)
                if _is_inside(_rk4(state, mid, a, mu1)) != inside:
                    hi = mid
                else:
                    lo = mid
            he = 0.5 * (lo + hi)
            if he > 1e-13:
                state = _rk4(state, he, a, mu1)
                s += he
            inside = not inside
            switches.append(len(S) if he > 1e-13 else len(S) - 1)
            if he > 1e-13:
                S.append(s)
                X.append(state.copy())
                side.append(inside)
            else:
                side[-1] = inside
            continue
        state = new
        s += h
        if abs(state[0]) > bound or abs(state[1]) > bound:
            raise DivergenceError(f"trajectory left the box |x|, |y| <= {bound} at s={s:.6g}")
        S.append(s)
        X.append(state.copy())
        side.append(inside)

    S = np.array(S)
    X = np.array(X)
    side = np.array(side)
    a_arr = np.where(side, params.a_in, params.a_out)
    kp = a_arr + mu1 * X[:, 0]

    # a switch sample closes one arc and opens the next; it keeps the right-hand value
    km = np.zeros(len(S))
    bounds = [0] + switches + [len(S) - 1]
    jumps = []
    prev_end = None
    for j in range(len(bounds) - 1):
        lo, hi = bounds[j], bounds[j + 1]
        if hi <= lo:
            continue
        d = _arc_derivative(S[lo : hi + 1], X[lo : hi + 1, 2])
        km[lo:hi] = d[:-1]
        if j == len(bounds) - 2:
            km[hi] = d[-1]
        if prev_end is not None:
            jumps.append(d[0] - prev_end)
        prev_end = d[-1]
    ell = np.diff(S)
    w = np.concatenate([[ell[0] / 2], 0.5 * (ell[:-1] + ell[1:]), [ell[-1] / 2]]) if len(ell) else np.zeros(1)
    return CurvatureProfile(
        s=S, x=X[:, 0], y=X[:, 1], theta=X[:, 2], kappa_measured=km, kappa_predicted=kp,
        inside=side, evaluable=np.ones(len(S), dtype=bool), weights=w,
        switches=tuple(switches), jumps_measured=np.array(jumps),
    )


def closure_residual(params: ShootingParams) -> np.ndarray:
    """(Δx, Δy, Δθ - 2π) between the end and the start of the shot curve."""
    prof = shoot(params)
    return np.array([
        prof.x[-1] - prof.x[0],
        prof.y[-1] - prof.y[0],
        prof.theta[-1] - prof.theta[0] - TWO_PI,
    ])


@dataclass(frozen=True)
class ClosureResult:
    params: ShootingParams
    gap: float
    iterations: int
    converged: bool


def find_closed_curve(init: ShootingParams, tol: float = 1e-8, max_iter: int = 100) -> ClosureResult:
    """Gauss-Newton on (theta0, a_out, arclength) to close position and tangent.

    ``mu1`` and ``a_in`` stay fixed.  The Jacobian is a forward difference; steps are
    least-squares solutions, halved until the gap decreases.
    """

    def with_(u):
        return replace(init, theta0=float(u[0]), a_out=float(u[1]), arclength_budget=float(u[2]))

    u = np.array([init.theta0, init.a_out, init.arclength_budget], dtype=float)
    F = closure_residual(init)
    gap = float(np.linalg.norm(F))
    it = 0
    while gap > tol and it < max_iter:
        it += 1
        J = np.empty((3, 3))
        for k in range(3):
            hk = 1e-7 * max(1.0, abs(u[k]))
            du = u.copy()
            du[k] += hk
            J[:, k] = (closure_residual(with_(du)) - F) / hk
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        t = 1.0
        improved = False
        for _ in range(30):
            cand = u + t * step
            if cand[2] > 0:
                try:
                    Fc = closure_residual(with_(cand))
                except DivergenceError:
                    Fc = None
                if Fc is not None and np.linalg.norm(Fc) < gap:
                    u, F, gap = cand, Fc, float(np.linalg.norm(Fc))
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
    return ClosureResult(with_(u), gap, it, gap <= tol)
