import math
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import fourier_polygon
from isoperim.constructions import build_two_disk_competitor
from isoperim.errors import DegeneratePartitionError, DivergenceError, InsufficientDataError
from isoperim.functionals import basic_terms
from isoperim.geometry import Disk, PolygonComponent, Shape, polygonize_disk, symm_diff_area_disk
from isoperim.optimality import (
    BarycentricPartition,
    MultiplierPair,
    ShootingParams,
    barycentric_partition,
    canonical_rotation,
    circle_partition,
    find_closed_curve,
    multipliers,
    optimality_residual,
    predicted_curvature,
    shoot,
    to_barycentric_frame,
)

SQRT2 = math.sqrt(2.0)


def symmetric_oval(n=2048):
    phi = 2 * math.pi * np.arange(n) / n
    r = 1 + 0.3 * np.cos(2 * phi) + 0.05 * np.cos(4 * phi)
    return Shape((PolygonComponent(np.column_stack([r * np.cos(phi), r * np.sin(phi)])),))


# ---------------------------------------------------------------------------
# partition and multipliers


def separated_disks(n=2048):
    r = 1 / SQRT2
    return Shape((polygonize_disk(Disk((2.5, 0), r), n), polygonize_disk(Disk((-2.5, 0), r), n)))


def test_partition_shape_outside():
    p = barycentric_partition(separated_disks())
    assert p.len_B_in == 0.0
    assert p.len_B_out == pytest.approx(2 * math.pi)
    assert p.int_cos_out == pytest.approx(0.0, abs=1e-15)


def test_partition_half_plane():
    slab = Shape.from_polygons([[(0, -5), (5, -5), (5, 5), (0, 5)]])
    p = circle_partition(slab, Disk((0, 0), 1))
    assert p.len_B_in == pytest.approx(math.pi, abs=1e-12)
    assert p.int_cos_in == pytest.approx(2.0, abs=1e-12)
    assert p.int_sin_in == pytest.approx(0.0, abs=1e-12)


def test_partition_of_polygonized_unit_disk():
    s = Shape((polygonize_disk(Disk((0, 0), 1), 2048),))
    p = barycentric_partition(s)
    assert p.len_B_in == pytest.approx(2 * math.pi, abs=1e-9)
    assert p.grazing_length > 0
    with pytest.raises(DegeneratePartitionError):
        barycentric_partition(s, strict=True)


def test_partition_totals(rng):
    for _ in range(5):
        p = barycentric_partition(Shape((fourier_polygon(rng, n=512, amp=0.4),)))
        assert p.len_B_in + p.len_B_out == pytest.approx(2 * math.pi, abs=1e-9)
        assert p.int_cos_in + p.int_cos_out == pytest.approx(0.0, abs=1e-9)
        assert p.int_sin_in + p.int_sin_out == pytest.approx(0.0, abs=1e-9)


def test_symmetric_shapes_have_zero_multipliers():
    for s in (symmetric_oval(), separated_disks()):
        m = multipliers(s)
        assert m.mu1 == pytest.approx(0.0, abs=1e-12)
        assert m.mu2 == pytest.approx(0.0, abs=1e-12)


def test_mu1_sign_matches_moving_the_disk(rng):
    """μ1 · πλ0/(4δ) is the rate of |K Δ B| as B slides along +x."""
    s, _, _ = to_barycentric_frame(Shape((fourier_polygon(rng, n=2048, amp=0.4),)))
    t = basic_terms(s)
    m = multipliers(s)
    h = 1e-6
    for axis, mu in ((0, m.mu1), (1, m.mu2)):
        e = np.zeros(2)
        e[axis] = h
        rate = (symm_diff_area_disk(s, Disk(e, 1.0)) - symm_diff_area_disk(s, Disk(-e, 1.0))) / (2 * h)
        assert mu * math.pi * t.lambda0 / (4 * t.delta) == pytest.approx(rate, rel=1e-5, abs=1e-8)


# ---------------------------------------------------------------------------
# predicted curvature and residual


def test_predicted_curvature_of_disk_is_one():
    report = SimpleNamespace(delta=0.0, lambda0=0.7)
    part = BarycentricPartition(1.0, 2 * math.pi - 1.0, 0.3, -0.3, 0.1, -0.1)
    mult = MultiplierPair(0.0, 0.0)
    for inside in (True, False):
        assert predicted_curvature(report, part, mult, (0.3, -2.0), inside) == 1.0


def test_predicted_curvature_outside_constant():
    report = SimpleNamespace(delta=0.25, lambda0=2.0)
    part = BarycentricPartition(2 * math.pi, 0.0, 0.0, 0.0, 0.0, 0.0)
    value = predicted_curvature(report, part, MultiplierPair(0.0, 0.0), (0.0, 0.0), inside=False)
    d, l0 = 0.25, 2.0
    assert value == pytest.approx((d + 1 - 4 * d) + 4 * d / l0 + 4 * d / l0, rel=1e-15)


def test_residual_of_disjoint_disks():
    prof = optimality_residual(separated_disks())
    assert np.all(np.isfinite(prof.residual))
    # curvature of a disk of area π/2 after normalization is √2
    assert np.allclose(prof.kappa_measured, SQRT2, rtol=1e-5)


def test_residual_of_two_disk_competitor_is_nonzero():
    _, s = build_two_disk_competitor(10.0)
    prof = optimality_residual(s)
    assert prof.l2_norm > 1e-2
    assert np.isfinite(prof.sup_norm)
    assert not prof.evaluable.all()  # the tangency point is excluded


def test_residual_csv_header():
    prof = optimality_residual(separated_disks(64))
    lines = prof.to_csv().splitlines()
    assert lines[0] == "s,x,y,theta,kappa_measured,kappa_predicted,inside"
    assert len(lines) == 129


def test_insufficient_samples():
    big = polygonize_disk(Disk((0, 0), 1), 2048)
    rho = float(np.hypot(*big.vertices[0]))
    tri = PolygonComponent([(5, 0), (5.3, 0), (5.1, 0.3)])
    with pytest.raises(InsufficientDataError):
        optimality_residual(Shape((big, tri)), container=Disk((0.0, 0.0), rho))


def test_canonical_rotation(rng):
    s = Shape((fourier_polygon(rng, n=2048, amp=0.4),))
    assert abs(multipliers(s).mu2) > 1e-4
    rotated, _ = canonical_rotation(s)
    m = multipliers(rotated)
    assert m.mu2 == pytest.approx(0.0, abs=1e-9)
    assert m.mu1 >= 0
    before, after = optimality_residual(s), optimality_residual(rotated)
    assert after.l2_norm == pytest.approx(before.l2_norm, rel=1e-9)
    assert after.sup_norm == pytest.approx(before.sup_norm, rel=1e-9)


# ---------------------------------------------------------------------------
# shooting


def circle_params(steps=7000, theta0=math.pi / 2, **kw):
    base = dict(a_out=1.0, a_in=1.0, mu1=0.0, start=(1.5, 0.0), theta0=theta0,
                arclength_budget=2 * math.pi, step=2 * math.pi / steps)
    base.update(kw)
    return ShootingParams(**base)


def test_shoot_circle_closes():
    prof = shoot(circle_params())
    assert prof.closure_gap() <= 1e-8
    assert np.all(np.diff(prof.s) > 0)
    assert np.max(np.abs(prof.kappa_measured - 1)) <= 1e-8


def test_shoot_circle_radius_follows_curvature():
    c = 2.5
    prof = shoot(circle_params(a_out=c, a_in=c, arclength_budget=2 * math.pi / c, step=1e-3))
    assert prof.closure_gap() <= 1e-8
    center = np.array([1.5 - 1 / c, 0.0])
    assert np.allclose(np.hypot(prof.x - center[0], prof.y - center[1]), 1 / c, atol=1e-10)


def test_piecewise_circular_arcs():
    prof = shoot(circle_params(a_out=1.3, a_in=0.7, start=(0.5, 0.0), step=1e-3))
    assert len(prof.switches) >= 1
    expected = np.where(prof.inside, 0.7, 1.3)
    assert np.max(np.abs(prof.kappa_measured - expected)) <= 1e-8


@pytest.mark.parametrize("mu1", [0.02, 0.05])
def test_first_integral_and_jumps(mu1):
    prof = shoot(circle_params(a_out=1.3, a_in=0.7, mu1=mu1, start=(0.5, 0.0), step=1e-3))
    assert len(prof.switches) >= 2
    a = np.where(prof.inside, 0.7, 1.3)
    assert np.max(np.abs(prof.kappa_measured - mu1 * prof.x - a)) <= 1e-8
    # θ is continuous, θ' jumps by ±(a_out - a_in)
    assert np.max(np.abs(np.diff(prof.theta))) < 0.01
    signs = [1 if not prof.inside[i] else -1 for i in prof.switches]
    for jump, sign in zip(prof.jumps_measured, signs):
        assert jump == pytest.approx(sign * 0.6, abs=1e-9)


def test_shoot_divergence():
    with pytest.raises(DivergenceError):
        shoot(circle_params(a_out=0.0, a_in=0.0, theta0=0.0, arclength_budget=200.0, step=0.01), bound=10.0)


def test_find_closed_curve_on_circle():
    init = circle_params(step=1e-3)
    res = find_closed_curve(init)
    assert res.converged and res.iterations <= 2
    assert res.params == init


def test_find_closed_curve_recovers_length():
    init = circle_params(step=1e-3, arclength_budget=2 * math.pi + 0.01)
    res = find_closed_curve(init)
    assert res.converged
    assert res.gap <= 1e-8
    assert res.params.arclength_budget == pytest.approx(2 * math.pi, abs=1e-8)


def test_find_closed_curve_perturbed_angle():
    res = find_closed_curve(circle_params(step=1e-3, theta0=math.pi / 2 + 0.01))
    assert res.converged and res.gap <= 1e-8


def test_find_closed_curve_with_drift_regression():
    """Frozen outcome of a two-switch closed curve at μ1 = 0.05."""
    init = ShootingParams(a_out=1.0, a_in=0.8, mu1=0.05, start=(0.5, 0.0), theta0=math.pi / 2,
                          arclength_budget=2 * math.pi / 0.9, step=1e-3)
    res = find_closed_curve(init)
    assert res.converged and res.gap <= 1e-10
    assert res.params.theta0 == pytest.approx(math.pi / 2, abs=1e-8)
    assert res.params.a_out == pytest.approx(0.9107039321750714, abs=1e-6)
    assert res.params.arclength_budget == pytest.approx(7.459748400439882, abs=1e-6)
    assert len(shoot(res.params).switches) == 2
