import math

import numpy as np
import pytest

from annulab.errors import BoundaryZero, OverlapError
from annulab.fixedpoint import (
    DriftClass,
    drift_classification,
    find_fixed_points,
    find_periodic_orbit,
    fixed_point_index,
    lefschetz_sum,
)
from annulab.geom import Rect
from annulab.lifts import LiftPoint, iterate, project
from annulab.zoo import diss_rot, flow_one_fixed, pert_twist, rot_no_fixed, twist


def winding_oracle(m, cell, samples=4096):
    """Independent index computation: dense boundary sampling + unwrap."""
    bx, by = cell.boundary_points(samples // 4)
    fx, fy, _ = m.batch(bx, by)
    ang = np.unwrap(np.arctan2(fy - by, fx - bx))
    total = ang[-1] - ang[0]
    closing = np.arctan2(fy[0] - by[0], fx[0] - bx[0]) - ang[-1]
    closing = (closing + np.pi) % (2 * np.pi) - np.pi
    return int(round((total + closing) / (2 * np.pi)))


@pytest.fixture(scope="module")
def pt():
    return pert_twist(0.0, 0.1, 0.0, 0.5)


def test_index_pt_attracting_node(pt):
    cell = Rect(0.45, 0.55, 0.45, 0.55)
    assert fixed_point_index(pt, cell) == 1
    assert winding_oracle(pt, cell) == 1


def test_index_pt_saddle(pt):
    cell = Rect(-0.05, 0.05, 0.45, 0.55)
    assert fixed_point_index(pt, cell) == -1
    assert winding_oracle(pt, cell) == -1


def test_index_iz_semistable_zero():
    m = flow_one_fixed(1.0)
    cell = Rect(-1 / 256, 1 / 256, 0.5 - 1 / 256, 0.5 + 1 / 256)
    assert fixed_point_index(m, cell) == 0
    assert winding_oracle(m, cell) == 0


def test_index_stable_under_boundary_refinement(pt):
    cell = Rect(0.46, 0.54, 0.47, 0.53)
    assert fixed_point_index(pt, cell, per_edge=16) == fixed_point_index(
        pt, cell, per_edge=64
    )


def test_index_stable_under_cell_shrink(pt):
    big = Rect(0.42, 0.58, 0.43, 0.57)
    small = Rect(0.46, 0.54, 0.465, 0.535)
    assert fixed_point_index(pt, big) == fixed_point_index(pt, small) == 1


def test_index_additive_over_partition(pt):
    # region holding both zeros; interfaces chosen off the zeros
    region = Rect(-0.2, 0.8, 0.4, 0.6)
    total = fixed_point_index(pt, region)
    xsplit = 0.23
    parts = [
        Rect(-0.2, xsplit, 0.4, 0.6),
        Rect(xsplit, 0.8, 0.4, 0.6),
    ]
    assert total == sum(fixed_point_index(pt, c) for c in parts) == 0


def test_index_boundary_zero_raises():
    cell = Rect(0.2, 0.3, 0.45, 0.55)  # fixed curve y=1/2 crosses the boundary
    with pytest.raises(BoundaryZero):
        fixed_point_index(twist(), cell)


def test_find_fixed_points_pt_exactly_two(pt):
    res = find_fixed_points(pt, Rect(0.0, 1.0, 0.25, 0.75))
    assert len(res.records) == 2
    assert all(not r.degenerate for r in res.records)
    assert sorted(r.index for r in res.records) == [-1, 1]
    assert all(r.residual < 1e-9 for r in res.records)
    assert lefschetz_sum(res.records) == 0


def test_find_fixed_points_rnf_empty_with_positive_grid_min():
    res = find_fixed_points(rot_no_fixed(0.05, 6, 0.9), Rect(0.0, 1.0, 0.05, 0.95))
    assert res.records == ()
    assert res.grid_min_displacement > 0.01


def test_find_fixed_points_iz_single_index_zero_cell():
    res = find_fixed_points(flow_one_fixed(1.0), Rect(0.0, 1.0, 0.25, 0.75),
                            cell_resolution=7)
    assert len(res.records) == 1
    rec = res.records[0]
    assert rec.index == 0 and not rec.degenerate
    assert rec.cell.width == pytest.approx(2.0 ** -7)
    assert lefschetz_sum(res.records) == 0


def test_find_fixed_points_twist_degenerate_curve():
    res = find_fixed_points(twist(), Rect(0.0, 1.0, 0.25, 0.75))
    assert len(res.records) >= 16
    for r in res.records:
        assert r.degenerate and r.index == 0
        assert abs(r.point.y - 0.5) < 1e-9
        assert r.residual < 1e-9


def test_lefschetz_overlap_error(pt):
    res = find_fixed_points(pt, Rect(0.0, 1.0, 0.25, 0.75))
    rec = res.records[0]
    clone = type(rec)(rec.point, rec.index, rec.residual, rec.cell, rec.degenerate)
    with pytest.raises(OverlapError):
        lefschetz_sum([rec, clone])


def test_periodic_orbit_diss_rot_third():
    m = diss_rot(1 / 3, 0.9)
    recs, _ = find_periodic_orbit(m, 1, 3, Rect(0.0, 1.0, 0.25, 0.75))
    assert recs
    best = min(recs, key=lambda r: r.residual)
    assert best.residual < 1e-10
    assert abs(best.point.y - 0.5) < 1e-6
    assert best.rotation_liminf - 1e-6 <= 1 / 3 <= best.rotation_limsup + 1e-6
    # the located point really is periodic with the stated translation
    z3 = iterate(m, best.point, 3)
    assert abs(z3.x - best.point.x - 1.0) < 1e-9 and abs(z3.y - best.point.y) < 1e-9
    # and the annulus point has period dividing q
    a0 = project(best.point)
    a3 = project(z3)
    assert abs(a3.theta - a0.theta) < 1e-9 and abs(a3.y - a0.y) < 1e-9


def test_periodic_orbit_pt_zero_over_one(pt):
    recs, _ = find_periodic_orbit(pt, 0, 1, Rect(0.0, 1.0, 0.25, 0.75))
    assert len(recs) == 2
    for r in recs:
        assert r.residual < 1e-9


def test_periodic_orbit_absent_for_wrong_rotation():
    m = diss_rot(0.5, 0.9)
    recs, _ = find_periodic_orbit(m, 1, 3, Rect(0.0, 1.0, 0.25, 0.75))
    assert recs == []


@pytest.fixture(scope="module")
def sample_points():
    rng = np.random.default_rng(0)
    return [LiftPoint(float(x), float(y))
            for x, y in zip(rng.uniform(0, 1, 50), rng.uniform(0.2, 0.8, 50))]


def test_drift_rnf_uniform_positive(sample_points):
    dc = drift_classification(rot_no_fixed(0.05, 6, 0.9), sample_points)
    assert dc.verdict == "uniform-positive-drift"
    assert all(t == "to+inf" for t in dc.tags)


def test_drift_rnf_mirrored_uniform_negative(sample_points):
    dc = drift_classification(rot_no_fixed(-0.05, 6, 0.9), sample_points)
    assert dc.verdict == "uniform-negative-drift"
    assert all(t == "to-inf" for t in dc.tags)


def test_drift_pt_all_converge(pt, sample_points):
    dc = drift_classification(pt, sample_points)
    assert dc.verdict == "all-converge"
    assert all(t == "converges" for t in dc.tags)


def test_drift_unclassified_when_thresholds_unmet():
    # slow twist orbits near the fixed circle neither escape nor converge
    pts = [LiftPoint(0.0, 0.5001), LiftPoint(0.3, 0.4999)]
    dc = drift_classification(twist(), pts, N=200)
    assert "unclassified" in dc.tags
    assert dc.verdict == "unclassified-present"
