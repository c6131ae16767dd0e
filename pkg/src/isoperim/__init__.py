"""Isoperimetric deficit versus barycentric asymmetry for planar shapes."""

from .constructions import build_fuglede_sequence, build_two_disk_competitor, paper_constants, solve_R1_star
from .functionals import FunctionalReport, PerturbationField, evaluate, objective_derivative
from .geometry import Disk, Point, PolygonComponent, Shape, polygonize_disk
from .optimality import ShootingParams, find_closed_curve, optimality_residual, shoot
from .optimizer import OptimConfig, ShapeParam, minimize

__all__ = [
    "Disk",
    "FunctionalReport",
    "OptimConfig",
    "PerturbationField",
    "Point",
    "PolygonComponent",
    "Shape",
    "ShapeParam",
    "ShootingParams",
    "build_fuglede_sequence",
    "build_two_disk_competitor",
    "evaluate",
    "find_closed_curve",
    "minimize",
    "objective_derivative",
    "optimality_residual",
    "paper_constants",
    "polygonize_disk",
    "shoot",
    "solve_R1_star",
]
