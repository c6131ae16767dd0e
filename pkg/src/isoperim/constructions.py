"""Closed-form competitors, polynomials and constants for the minimization of J.

These are the analytic ground truth against which the polygon kernel is checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

from .errors import DomainError, InconsistencyError, UnsupportedRegimeError
from .geometry import Disk, Point, Shape, disk_disk_symm_diff, polygonize_disk

SQRT2 = math.sqrt(2.0)


def ball_l1_distance(a: float) -> float:
    """|B_0 Δ B_a| for unit disks, restricted to 0 <= a <= 2 (no clamping)."""
    if not 0.0 <= a <= 2.0:
        raise DomainError(f"a must lie in [0, 2], got {a!r}")
    value = disk_disk_symm_diff(a)
    if a <= 1.0 and value > 4.0 * a * (1.0 + 1e-15):
        raise InconsistencyError(f"f({a}) = {value} exceeds 4a")
    return value


def hull_perimeter_disk_point(R1: float, R2: float) -> float:
    """Perimeter of the convex hull of a disk of radius R1 and a point at distance R2 from its center."""
    if not 0.0 < R1 <= R2:
        raise DomainError(f"need 0 < R1 <= R2, got R1={R1!r}, R2={R2!r}")
    return R1 * (2.0 * math.pi - 2.0 * math.acos(R1 / R2)) + 2.0 * math.sqrt(R2 * R2 - R1 * R1)


def cap_geometry(alpha: float) -> tuple[float, float]:
    """Area of the circular cap of half-aperture alpha in the unit disk, and cos(2 alpha).

    The second value is the radius of the concentric disk tangent to the chords that
    join neighbouring caps.
    """
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError(f"alpha must lie in (0, pi/2), got {alpha!r}")
    cap = alpha - math.sin(alpha) * math.cos(alpha)
    if alpha < 0.05:
        approx = 2.0 * alpha**3 / 3.0
        if abs(cap - approx) > 0.01 * approx:
            raise InconsistencyError("cap area disagrees with its small-angle expansion")
    return cap, math.cos(2.0 * alpha)


def q_poly(D: float, R: float) -> float:
    return R**3 - D * R**2 - 2.0 * R + D - 1.0


def p_poly(D: float, R: float) -> float:
    return (
        2.0 * R**4
        - 2.0 * (D + 2.0) * R**3
        + (D * D + 4.0 * D - 1.0) * R**2
        + (4.0 - 2.0 * D * D) * R
        + D * D
        - 2.0 * D
    )


def squared_identity_residual(D: float, R: float) -> float:
    """(R+1)² p_D(R) - (q_D(R)² - (1-R²)³); zero for every D and R."""
    return (R + 1.0) ** 2 * p_poly(D, R) - (q_poly(D, R) ** 2 - (1.0 - R * R) ** 3)


def _bisect(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def r1_bracket(D: float) -> tuple[float, float]:
    return 1.0 - 1.0 / D - 2.0 / D**2, 1.0 - 1.0 / D - 1.0 / D**2


def solve_R1_star(D: float) -> float:
    """Radius of the large disk when the barycentric disk is tangent to it from outside."""
    if not D >= 5.0:
        raise DomainError(f"the bracket for R1* needs D >= 5, got {D!r}")
    lo, hi = r1_bracket(D)
    if not (p_poly(D, lo) > 0.0 and p_poly(D, hi) < 0.0):
        raise InconsistencyError(f"p_D has no sign change on [{lo}, {hi}] for D={D}")
    r_sq = _bisect(lambda R: p_poly(D, R), lo, hi)
    # p_D loses ~D² ε to cancellation; the unsquared equation is well conditioned,
    # so it polishes the root, and the two roots must agree
    tangency = lambda R: q_poly(D, R) - (1.0 - R * R) ** 1.5
    if not (tangency(lo) > 0.0 > tangency(hi)):
        raise InconsistencyError(f"tangency equation has no sign change on [{lo}, {hi}] for D={D}")
    r = _bisect(tangency, lo, hi, tol=1e-15)
    if abs(r - r_sq) > 1e-9 + 1e-12 * D * D:
        raise InconsistencyError(f"squared and unsquared roots disagree: {r_sq} vs {r}")
    if not (lo < r < hi) or q_poly(D, r) < 0.0:
        raise InconsistencyError(f"R1*={r} violates the bracket or q_D(R1*) >= 0")
    return r


@dataclass(frozen=True)
class TwoDiskCompetitor:
    R1: float
    R2: float
    D: float
    centers: tuple[Point, Point]
    delta: float
    lambda0: float
    objective: float
    barycenter_x: float

    def analytic(self) -> dict:
        return {"R1": self.R1, "R2": self.R2, "delta": self.delta, "lambda0": self.lambda0, "J": self.objective}


def two_disk_barycenter_x(R1: float, R2: float, D: float) -> float:
    return R1 * R1 * (D / 2.0 - R1) + R2 * R2 * (-D / 2.0 + R2)


def build_two_disk_competitor(D: float, n: int = 2048) -> tuple[TwoDiskCompetitor, Shape]:
    """Two disks of radii R1 >= R2, R1² + R2² = 1, spanning diameter D, with the
    barycentric unit disk externally tangent to the large one."""
    if not D >= 10.0:
        raise UnsupportedRegimeError(f"the two-disk competitor is only established for D >= 10, got {D!r}")
    R1 = solve_R1_star(D)
    R2 = math.sqrt(1.0 - R1 * R1)
    c1 = Point(D / 2.0 - R1, 0.0)
    c2 = Point(-D / 2.0 + R2, 0.0)
    xg = two_disk_barycenter_x(R1, R2, D)
    residual = abs(xg + 1.0 - (D / 2.0 - 2.0 * R1))
    if residual > 1e-9:
        raise InconsistencyError(f"tangency residual {residual:.3e} exceeds 1e-9")
    if -D / 2.0 + 2.0 * R2 > xg - 1.0:
        raise InconsistencyError("small disk meets the barycentric disk")
    delta = R1 + R2 - 1.0
    comp = TwoDiskCompetitor(R1, R2, D, (c1, c2), delta, 2.0, delta / 4.0, xg)
    shape = Shape((polygonize_disk(Disk(c1, R1), n), polygonize_disk(Disk(c2, R2), n)))
    return comp, shape


@dataclass(frozen=True)
class FugledeMember:
    n: int
    R: float
    r: float
    centers: tuple[Point, Point]
    delta: float
    lambda0: float | None
    disjoint_from_barycentric_disk: bool


def build_fuglede_sequence(n: int, vertices: int = 2048) -> tuple[Shape, float, float | None]:
    """Two disks with barycenter at the origin and area π whose deficit tends to 0.

    Returns ``(shape, delta, lambda0)``; ``lambda0`` is None when the small disk
    overlaps the unit disk at the origin (n < 4), since it is then not 2.
    """
    member = fuglede_member(n)
    shape = Shape((
        polygonize_disk(Disk(member.centers[0], member.R), vertices),
        polygonize_disk(Disk(member.centers[1], member.r), vertices),
    ))
    return shape, member.delta, member.lambda0


def fuglede_member(n: int) -> FugledeMember:
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n!r}")
    R = 1.0 - 1.0 / n
    r = math.sqrt((2 * n - 1) / n**2)
    xs = -2.0 * (n - 1) ** 2 / (2 * n - 1)
    # the big disk at (2, 0) always clears the unit disk; the small one may not
    disjoint = abs(xs) >= 1.0 + r and 2.0 >= 1.0 + R
    if not disjoint:
        warnings.warn(
            f"n={n}: the small disk overlaps the barycentric disk, so lambda0 < 2", RuntimeWarning
        )
    return FugledeMember(
        n, R, r, (Point(2.0, 0.0), Point(xs, 0.0)), R + r - 1.0, 2.0 if disjoint else None, disjoint
    )


@dataclass(frozen=True)
class PaperConstants:
    cicalese_leonardi: float
    tau_star: float
    equal_disk_J: float
    R1_hat: float

    def to_dict(self) -> dict:
        return asdict(self)


def two_disk_J(R1: float) -> float:
    """J of two disjoint disks outside their barycentric disk, R1² + R2² = 1."""
    return (R1 + math.sqrt(max(1.0 - R1 * R1, 0.0)) - 1.0) / 4.0


def paper_constants() -> PaperConstants:
    tau = 1.8296 / (2.0 + 8.0 / math.pi) ** 2
    r1_hat = _bisect(lambda R: two_disk_J(R) - tau, 1.0 / SQRT2, 1.0, tol=1e-14)
    return PaperConstants(
        cicalese_leonardi=math.pi / (8.0 * (4.0 - math.pi)),
        tau_star=tau,
        equal_disk_J=(SQRT2 - 1.0) / 4.0,
        R1_hat=r1_hat,
    )
