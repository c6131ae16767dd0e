"""Table of published constants and inequalities, recomputed from scratch.

Each row compares a computed value against a stated value or bound; ``run_checks``
is what ``isoperim verify`` prints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

from .constructions import (
    build_fuglede_sequence,
    build_two_disk_competitor,
    cap_geometry,
    hull_perimeter_disk_point,
    p_poly,
    paper_constants,
    q_poly,
    solve_R1_star,
)
from .functionals import basic_terms
from .geometry import Disk, Shape, area, barycenter, diameter, perimeter, polygonize_disk

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    expected: str
    computed: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _near(target: float, tol: float) -> tuple[str, Callable[[float], bool]]:
    return f"{target:.10g} ± {tol:g}", lambda v: abs(v - target) <= tol


def _above(bound: float) -> tuple[str, Callable[[float], bool]]:
    return f"> {bound:g}", lambda v: v > bound


def _below(bound: float) -> tuple[str, Callable[[float], bool]]:
    return f"< {bound:g}", lambda v: v < bound


def _equal_disks() -> Shape:
    r = 1.0 / SQRT2
    half = (2.0 + SQRT2) / 2.0
    return Shape((polygonize_disk(Disk((half, 0.0), r), 1024), polygonize_disk(Disk((-half, 0.0), r), 1024)))


def _checks():
    c = paper_constants()
    rows = [
        ("cicalese_leonardi", "thresholds", lambda: c.cicalese_leonardi, _near(0.457474, 1e-6)),
        ("tau_star_lower", "thresholds", lambda: c.tau_star, _above(0.0885)),
        ("tau_star_value", "thresholds", lambda: c.tau_star, _near(0.08851, 1e-4)),
        ("equal_disk_J", "thresholds", lambda: c.equal_disk_J, _near(0.103553, 1e-6)),
        ("R1_hat", "thresholds", lambda: c.R1_hat, _near(0.881075, 1e-5)),
    ]
    for D in (5.0, 7.0, 10.0, 10.1, 20.0, 50.0):
        rows += [
            (f"p_D(1-1/D-2/D^2) D={D:g}", "brackets", lambda D=D: p_poly(D, 1 - 1 / D - 2 / D**2), _above(0.0)),
            (f"p_D(1-1/D-1/D^2) D={D:g}", "brackets", lambda D=D: p_poly(D, 1 - 1 / D - 1 / D**2), _below(0.0)),
            (f"p_D(1-1/D) D={D:g}", "brackets", lambda D=D: p_poly(D, 1 - 1 / D), _above(0.0)),
            (f"q_D(0) D={D:g}", "brackets", lambda D=D: q_poly(D, 0.0), _near(D - 1.0, 0.0)),
            (f"q_D(1) D={D:g}", "brackets", lambda D=D: q_poly(D, 1.0), _near(-2.0, 0.0)),
            (f"p_D(0) D={D:g}", "brackets", lambda D=D: p_poly(D, 0.0), _near(D * D - 2 * D, 1e-12 * D * D)),
            (f"p_D(1) D={D:g}", "brackets", lambda D=D: p_poly(D, 1.0), _near(1.0, 1e-12 * D * D)),
        ]
    rows += [
        ("R1*(10.1)", "brackets", lambda: solve_R1_star(10.1), _above(0.8814 - 1e-12)),
        ("R1*(10) vs 1-1/D-1.8/D^2", "brackets", lambda: solve_R1_star(10.0) - (1 - 0.1 - 0.018), _above(0.0)),
        ("cap area alpha=0.01 / (2 alpha^3/3)", "brackets",
         lambda: cap_geometry(0.01)[0] / (2 * 0.01**3 / 3), _near(1.0, 1e-3)),
        ("hull perimeter Taylor u=v=1e-3", "brackets",
         lambda: (hull_perimeter_disk_point(1 - 1e-3, 1 + 1e-3)
                  - (2 * math.pi - 2 * math.pi * 1e-3 + 4 * SQRT2 / 3 * 2e-3**1.5)) / 2e-3**1.5,
         _near(0.0, 0.05)),
    ]

    def competitor_J():
        comp, shape = build_two_disk_competitor(10.0, n=1024)
        t = basic_terms(shape)
        return t.delta / t.lambda0**2

    def fuglede(n, what):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            shape, delta, _ = build_fuglede_sequence(n, vertices=1024)
        if what == "area":
            return area(shape)
        if what == "barycenter":
            return math.hypot(*barycenter(shape))
        t = basic_terms(shape)
        if what == "delta_error":
            return t.delta - delta
        if what == "lambda0":
            return t.lambda0
        return t.delta / t.lambda0**2

    rows += [
        ("two-disk competitor J, D=10", "competitors", competitor_J, _below(0.0885)),
        ("equal disks perimeter", "competitors", lambda: perimeter(_equal_disks()), _near(2 * math.pi * SQRT2, 1e-4)),
        ("equal disks diameter", "competitors", lambda: diameter(_equal_disks()), _near(2 + 2 * SQRT2, 1e-4)),
        ("equal disks delta", "competitors", lambda: basic_terms(_equal_disks()).delta, _near(SQRT2 - 1, 1e-3)),
        ("equal disks lambda0", "competitors", lambda: basic_terms(_equal_disks()).lambda0, _near(2.0, 1e-3)),
        ("Fuglede n=4 area", "competitors", lambda: fuglede(4, "area"), _near(math.pi, 1e-6)),
        ("Fuglede n=4 barycenter", "competitors", lambda: fuglede(4, "barycenter"), _near(0.0, 1e-9)),
        ("Fuglede n=8 delta - (R+r-1)", "competitors", lambda: fuglede(8, "delta_error"), _near(0.0, 1e-3)),
        ("Fuglede n=8 lambda0", "competitors", lambda: fuglede(8, "lambda0"), _near(2.0, 1e-3)),
        ("Fuglede J(64) - J(8)", "competitors", lambda: fuglede(64, "J") - fuglede(8, "J"), _below(0.0)),
    ]
    return rows


def run_checks(group: str | None = None) -> list[CheckResult]:
    results = []
    for name, grp, compute, (expected, ok) in _checks():
        if group is not None and grp != group:
            continue
        value = float(compute())
        results.append(CheckResult(name, grp, expected, value, bool(ok(value))))
    return results


GROUPS = ("thresholds", "brackets", "competitors")
