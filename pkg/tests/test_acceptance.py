"""Acceptance suite: one test per criterion, each printing a pass line.

Every tolerance is pinned here; nothing is calibrated later.  Criteria are
exercised through the public APIs exactly as the CLI drives them.
"""

import json
import math

import numpy as np
import pytest

from annulab import certificates as certs
from annulab.billiards import (
    BilliardState,
    BumperSet,
    Disk,
    billiard_area_defect,
    billiard_chart_map,
    billiard_orbit,
    bumper_avoidance_search,
    circle_table,
    ellipse_table,
)
from annulab.boxdyn import (
    BoxSet,
    assemble_periodic_chain,
    attractor_boxes,
    box_of_point,
    boxset_from_band,
    build_box_graph,
    chain_recurrent_boxes,
    construct_invariant_annulus,
    find_returning_disk,
    grow_window,
)
from annulab.fixedpoint import (
    drift_classification,
    find_fixed_points,
    find_periodic_orbit,
    fixed_point_index,
)
from annulab.geom import Rect
from annulab.horseshoe import make_horseshoe, verify_example_claims
from annulab.lifts import LiftPoint
from annulab.rotation import rotation_estimate
from annulab.zoo import diss_rot, flow_one_fixed, pert_twist, rigid, rot_no_fixed, twist


def _report(n, text):
    print(f"PASS criterion {n}: {text}")


def test_criterion_01_rotation_exactness():
    est = rotation_estimate(rigid(0.25), LiftPoint(0.0, 0.5), 1000)
    assert abs(est.mean - 0.25) < 1e-9
    N = 1000
    for y in np.linspace(0.05, 0.95, 20):
        e = rotation_estimate(twist(), LiftPoint(0.0, float(y)), N)
        assert abs(e.mean - (float(y) - 0.5)) < 1.0 / N
    _report(1, "rigid rotation estimate exact to 1e-9; twist heights within 1/N")


def test_criterion_02_lift_independence():
    for m in (rigid(0.25), twist(), pert_twist(0.0, 0.1, 0.0, 0.5)):
        a = rotation_estimate(m, LiftPoint(0.2, 0.7), 1000)
        b = rotation_estimate(m, LiftPoint(1.2, 0.7), 1000)
        assert abs(a.mean - b.mean) <= 1e-12
    m = rigid(0.25)
    base = rotation_estimate(m, LiftPoint(0.0, 0.5), 1000)
    for k in (1, 2, -3):
        shifted = rotation_estimate(m.shifted_lift(k), LiftPoint(0.0, 0.5), 1000)
        assert shifted.mean - base.mean == float(k)
    _report(2, "estimates agree across deck translates; shifted lifts move by exactly k")


def test_criterion_03_index_sum_zero_for_pert_twist():
    m = pert_twist(0.0, 0.1, 0.0, 0.5)
    res = find_fixed_points(m, Rect(0.0, 1.0, 0.25, 0.75))
    assert len(res.records) == 2
    assert sorted(r.index for r in res.records) == [-1, 1]
    assert sum(r.index for r in res.records) == 0
    # winding agrees at two boundary refinement levels
    for r in res.records:
        assert fixed_point_index(m, r.cell, per_edge=16) == fixed_point_index(
            m, r.cell, per_edge=64
        ) == r.index
    _report(3, "exactly two fixed points with indices {+1, -1} summing to zero")


def test_criterion_04_flow_surrogate_single_index_zero_cell():
    res = find_fixed_points(flow_one_fixed(1.0), Rect(0.0, 1.0, 0.25, 0.75),
                            cell_resolution=7)
    assert len(res.records) == 1
    rec = res.records[0]
    assert rec.cell.width == pytest.approx(2.0 ** -7)
    assert rec.index == 0
    _report(4, "integrated flow has exactly one fixed cell at 2^-7 with index 0")


def test_criterion_05_rational_rotation_periodic_orbits():
    m = diss_rot(1 / 3, 0.9)
    recs, _ = find_periodic_orbit(m, 1, 3, Rect(0.0, 1.0, 0.25, 0.75))
    assert recs
    best = min(recs, key=lambda r: r.residual)
    assert best.residual < 1e-8
    assert best.rotation_liminf - 1e-6 <= 1 / 3 <= best.rotation_limsup + 1e-6
    other = diss_rot(0.5, 0.9)
    empty, _ = find_periodic_orbit(other, 1, 3, Rect(0.0, 1.0, 0.25, 0.75))
    assert empty == []
    _report(5, "rotation 1/3 yields a periodic point (residual < 1e-8); "
               "rotation 1/2 map yields none")


def test_criterion_06_horseshoe_claims():
    m = make_horseshoe()
    claims = verify_example_claims(m)
    assert claims.all_passed
    assert (claims.negative.n, claims.negative.k) == (1, -1)
    assert (claims.positive.n, claims.positive.k) == (5, 1)
    assert claims.min_positive_n == 5
    assert (claims.small_disk_witness.n, claims.small_disk_witness.k) == (7, 1)
    _report(6, "horseshoe: (n=1, k=-1), (n=5, k=+1), exhaustive minimality below n=5, "
               "shrunken disk returns at n=7")


@pytest.mark.parametrize("name,mmaker", [
    ("DISS_ROT", lambda: diss_rot(0.318, 0.9)),
    ("PT", lambda: pert_twist(0.0, 0.1, 0.0, 0.5)),
    ("RNF", lambda: rot_no_fixed(0.05, 6, 0.9)),
])
def test_criterion_07_attractors_connected_and_separating(name, mmaker):
    rep = attractor_boxes(mmaker(), boxset_from_band(8, (0.25, 0.75)), 10)
    assert rep.connected
    assert rep.separates
    _report(7, f"{name} attractor at 2^-8 is connected and separates the collars")


def test_criterion_08_window_growth_and_invariant_annulus():
    m = diss_rot(0.318, 0.9)
    seed = BoxSet(6, 0, 64, frozenset([box_of_point(6, 0.5, 0.5)]))
    rep = grow_window(m, seed)
    assert rep.stabilized and rep.rounds <= 100
    assert rep.verified and rep.margin > 0
    band = construct_invariant_annulus(m, rep.boxes)
    assert band.verified and band.boxes.bandify() is not None
    chart = billiard_chart_map(circle_table(1.0))
    rep2 = grow_window(chart, boxset_from_band(6, (0.3, 0.7)))
    assert rep2.unbounded
    _report(8, "window grows and verifies with positive margin; invariant band built; "
               "circle billiard chart is unbounded at scale")


def test_criterion_09_billiards():
    xs, thetas = billiard_orbit(circle_table(1.0), BilliardState(0.1, 0.7), 1000)
    assert np.all(thetas == thetas[0])
    rng = np.random.default_rng(0)
    table = ellipse_table(2, 1)
    for _ in range(100):
        st = BilliardState(float(rng.uniform(0, 1)),
                           float(rng.uniform(0.1 * math.pi, 0.9 * math.pi)))
        assert abs(billiard_area_defect(table, st, 1e-5)) < 1e-4
    cert = bumper_avoidance_search(circle_table(1.0), BumperSet([Disk(0.0, 0.0, 0.3)]),
                                   [0.05], 10000)
    assert cert is not None and cert.min_distance > 0
    _report(9, "circle conserves the angle bit-exactly; ellipse area defect < 1e-4 "
               "over 100 states; 10^4-chord bumper-free trajectory certified")


def test_criterion_10_drift_trichotomy():
    rnf = rot_no_fixed(0.05, 6, 0.9)
    res = find_fixed_points(rnf, Rect(0.0, 1.0, 0.05, 0.95))
    assert res.records == ()
    assert res.grid_min_displacement > 0.01
    rng = np.random.default_rng(0)
    pts = [LiftPoint(float(x), float(y))
           for x, y in zip(rng.uniform(0, 1, 50), rng.uniform(0.2, 0.8, 50))]
    dc = drift_classification(rnf, pts, fixed_points=res.records)
    assert all(t == "to+inf" for t in dc.tags) and len(dc.tags) == 50
    dcm = drift_classification(rot_no_fixed(-0.05, 6, 0.9), pts)
    assert all(t == "to-inf" for t in dcm.tags)
    dcp = drift_classification(pert_twist(0.0, 0.1, 0.0, 0.5), pts)
    assert all(t == "converges" for t in dcp.tags)
    _report(10, "no fixed point (grid min displacement > 0.01); all 50 samples drift "
                "to +inf, mirrored to -inf; attracting case all converge")


def test_criterion_11_returning_disks_without_recurrence():
    rnf = rot_no_fixed(0.05, 6, 0.9)
    g5 = build_box_graph(rnf, (0.1, 0.9), 5)
    wneg = find_returning_disk(g5, -1)
    wpos = find_returning_disk(g5, +1)
    assert wneg is not None and wneg.k < 0
    assert wpos is not None and wpos.k > 0
    rec = chain_recurrent_boxes(build_box_graph(rnf, (0.1, 0.9), 8))
    disjoint = rec.geometric_overlaps(wneg.U) == []
    assert disjoint
    res = find_fixed_points(rnf, Rect(0.0, 1.0, 0.05, 0.95))
    assert res.records == ()
    # the disjointness is recorded in the emitted certificate
    cert = certs.build("returning", rnf.spec_dict(),
                       dict(wneg.to_payload(), disjoint_from_recurrence=disjoint))
    assert cert["payload"]["disjoint_from_recurrence"] is True
    ok, msg = certs.reverify(cert)
    assert ok, msg
    _report(11, "returning disks of both signs found; the negative one is disjoint "
                "from the chain-recurrent boxes and no fixed point exists")


def test_criterion_12_certificate_integrity(tmp_path):
    rnf = rot_no_fixed(0.05, 6, 0.9)
    g5 = build_box_graph(rnf, (0.1, 0.9), 5)
    wneg = find_returning_disk(g5, -1)
    returning_cert = certs.build("returning", rnf.spec_dict(), wneg.to_payload())

    hs = make_horseshoe()
    claims = verify_example_claims(hs)
    chain = assemble_periodic_chain(hs, claims.positive, claims.negative)
    chain_cert = certs.build("chain", hs.spec_dict(), chain.to_payload())

    pt = pert_twist(0.0, 0.1, 0.0, 0.5)
    res = find_fixed_points(pt, Rect(0.0, 1.0, 0.25, 0.75))
    fixed_cert = certs.build("fixed", pt.spec_dict(), {
        "tol": 1e-9,
        "records": [{"point": [r.point.x, r.point.y],
                     "image": list(pt.evaluate_xy(r.point.x, r.point.y)),
                     "index": r.index}
                    for r in res.records],
    })

    dr = diss_rot(1 / 3, 0.9)
    recs, _ = find_periodic_orbit(dr, 1, 3, Rect(0.0, 1.0, 0.4, 0.6))
    gm = dr.power_shift(3, 1)
    periodic_cert = certs.build("periodic", dr.spec_dict(), {
        "tol": 1e-8,
        "p": 1,
        "q": 3,
        "records": [{"point": [recs[0].point.x, recs[0].point.y],
                     "image": list(gm.evaluate_xy(recs[0].point.x, recs[0].point.y))}],
    })

    tampered = 0
    for cert in (returning_cert, chain_cert, fixed_cert, periodic_cert):
        ok, msg = certs.reverify(cert)
        assert ok, f"{cert['kind']}: {msg}"
        # tampering any witness coordinate by 0.05 must break re-verification
        blob = json.dumps(cert)
        pay = json.loads(blob)["payload"]
        if cert["kind"] == "returning":
            coords = [pay["z"]]
        elif cert["kind"] == "chain":
            coords = pay["witnesses"]
        else:
            coords = [r["point"] for r in pay["records"]]
        for coord in coords:
            for axis in (0, 1):
                broken = json.loads(blob)
                bpay = broken["payload"]
                if cert["kind"] == "returning":
                    bpay["z"][axis] += 0.05
                elif cert["kind"] == "chain":
                    bpay["witnesses"][coords.index(coord)][axis] += 0.05
                else:
                    bpay["records"][coords.index(coord)]["point"][axis] += 0.05
                bad, _ = certs.reverify(broken)
                assert not bad, f"tampered {cert['kind']} certificate still verifies"
                tampered += 1
    assert tampered >= 8
    _report(12, f"returning/chain/fixed/periodic certificates re-verify; "
                f"{tampered} single-coordinate tamperings all fail")
