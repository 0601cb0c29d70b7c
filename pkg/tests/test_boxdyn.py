import math

import numpy as np
import pytest

from annulab.billiards import billiard_chart_map, circle_table
from annulab.boxdyn import (
    BoxSet,
    attractor_boxes,
    box_of_point,
    boxset_from_band,
    build_box_graph,
    chain_recurrent_boxes,
    construct_invariant_annulus,
    disk_self_disjoint,
    find_returning_disk,
    grow_window,
    omega_limit_boxes,
    pull_back_returning,
    verify_window,
)
from annulab.errors import LinkVerificationFailed, NotFoundAtResolution, PreconditionFailed
from annulab.boxdyn import assemble_periodic_chain
from annulab.geom import Rect
from annulab.lifts import AnnulusPoint, LiftPoint, iterate
from annulab.zoo import diss_rot, flow_one_fixed, pert_twist, rigid, rot_no_fixed, twist


@pytest.fixture(scope="module")
def rnf():
    return rot_no_fixed(0.05, 6, 0.9)


@pytest.fixture(scope="module")
def dr():
    return diss_rot(0.318, 0.9)


@pytest.fixture(scope="module")
def rnf_graph5(rnf):
    return build_box_graph(rnf, (0.1, 0.9), 5)


def test_rigid_graph_labels_and_degree():
    g = build_box_graph(rigid(0.25), (0.125, 0.875), 5)
    assert g.out_degree_min() >= 1
    assert set(g.labels()) <= {0, 1}


def test_twist_graph_labels():
    g = build_box_graph(twist(), (0.1, 0.9), 6)
    assert set(g.labels()) <= {-1, 0, 1}
    assert -1 in g.labels() and 1 in g.labels()


def test_rnf_graph_has_strongly_negative_labels(rnf):
    g = build_box_graph(rnf, (0.1, 0.9), 7)
    assert min(g.labels()) <= -1
    assert max(g.labels()) >= 1


@pytest.mark.parametrize("mmaker,point", [
    (lambda: diss_rot(0.318, 0.9), (0.123, 0.6)),
    (lambda: twist(), (0.4, 0.37)),
])
def test_soundness_orbit_segments_have_edges(mmaker, point):
    m = mmaker()
    d = 6
    g = build_box_graph(m, (0.1, 0.9), d)
    x, y = point
    for _ in range(60):
        fx, fy = m.evaluate_xy(x, y)
        b0 = box_of_point(d, x, y)
        b1 = box_of_point(d, fx, fy)
        # label observed when the source is reduced to the fundamental domain
        k = int(math.floor(fx - math.floor(x)))
        assert g.has_edge(b0, b1, k), (b0, b1, k)
        x, y = fx, fy


def test_chain_recurrence_twist_is_everything():
    g = build_box_graph(twist(), (0.25, 0.75), 6)
    rec = chain_recurrent_boxes(g)
    assert len(rec) == g.n_nodes


def test_chain_recurrence_diss_rot_covers_circle_and_shrinks(dr):
    g = build_box_graph(dr, (0.1, 0.9), 7)
    rec = chain_recurrent_boxes(g)
    s = 1 << 7
    # the circle rows just below/above y = 1/2 are recurrent
    for c in range(s):
        assert (c, 63) in rec.boxes and (c, 64) in rec.boxes
    # the mid-zone, where the fiber drift beats a box plus the inflation,
    # is wandering at this resolution
    for c in range(s):
        assert (c, 32) not in rec.boxes and (c, 95) not in rec.boxes
    assert len(rec) < g.n_nodes


def test_chain_recurrence_pt_keeps_fixed_point_clusters():
    g = build_box_graph(pert_twist(0.0, 0.1, 0.0, 0.5), (0.25, 0.75), 7)
    rec = chain_recurrent_boxes(g)
    assert box_of_point(7, 0.001, 0.499) in rec.boxes
    assert box_of_point(7, 0.501, 0.501) in rec.boxes


def test_chain_recurrence_refinement_monotone(dr):
    rec6 = chain_recurrent_boxes(build_box_graph(dr, (0.25, 0.75), 6))
    rec7 = chain_recurrent_boxes(build_box_graph(dr, (0.25, 0.75), 7))
    coarse = rec6.boxes
    for c, r in rec7.boxes:
        parent = (c // 2, r // 2)
        neighbors = [
            ((parent[0] + dc) % (1 << 6), parent[1] + dr2)
            for dc in (-1, 0, 1)
            for dr2 in (-1, 0, 1)
        ]
        assert any(nb in coarse for nb in neighbors)


def test_verify_window_diss_rot_band(dr):
    rep = verify_window(dr, boxset_from_band(6, (0.25, 0.75)))
    assert rep.verified and rep.margin > 0
    assert rep.connected and rep.separates


def test_verify_window_rnf_thin_band(rnf):
    rep = verify_window(rnf, boxset_from_band(8, (0.45, 0.55)))
    assert rep.verified and rep.margin > 0


def test_verify_window_fails_off_center_band(dr):
    rep = verify_window(dr, boxset_from_band(6, (0.7, 0.9)))
    assert not rep.verified
    assert rep.counterexample is not None or rep.margin <= 0


def test_grow_window_diss_rot_single_seed(dr):
    seed = BoxSet(6, 0, 64, frozenset([box_of_point(6, 0.5, 0.5)]))
    rep = grow_window(dr, seed)
    assert rep.stabilized and rep.rounds <= 100
    assert rep.verified and rep.margin > 0


def test_grow_window_billiard_chart_unbounded():
    m = billiard_chart_map(circle_table(1.0))
    rep = grow_window(m, boxset_from_band(6, (0.3, 0.7)))
    assert rep.unbounded and not rep.verified


def test_grow_window_identity_reported_distinctly():
    # with inflated enclosures the identity creeps to the region bound, so
    # the honest box-level verdict is unbounded-at-scale; it never verifies
    from annulab.zoo import vector_field_time_one

    ident = vector_field_time_one(lambda x, y: (0.0, 0.0), name="IDENTITY")
    rep = grow_window(ident, boxset_from_band(6, (0.45, 0.55)))
    assert not rep.verified
    assert rep.unbounded or rep.stabilized is False


@pytest.mark.parametrize("mmaker", [
    lambda: diss_rot(0.318, 0.9),
    lambda: pert_twist(0.0, 0.1, 0.0, 0.5),
    lambda: rot_no_fixed(0.05, 6, 0.9),
])
def test_attractor_band_connected_and_separating(mmaker):
    m = mmaker()
    rep = attractor_boxes(m, boxset_from_band(8, (0.25, 0.75)), 10)
    assert rep.connected and rep.separates
    assert rep.contained_in_window and rep.forward_invariant


def test_attractor_pt_contains_both_fixed_points():
    m = pert_twist(0.0, 0.1, 0.0, 0.5)
    rep = attractor_boxes(m, boxset_from_band(7, (0.25, 0.75)), 8)
    assert box_of_point(7, 0.0, 0.5 - 1e-9) in rep.boxes.boxes
    assert box_of_point(7, 0.5, 0.5 - 1e-9) in rep.boxes.boxes


def test_attractor_iz_connected_separating():
    # the one-step x stretch of the flow reaches ~e^pi, so the enclosure
    # needs a denser sample grid than the default to stay gap-free
    m = flow_one_fixed(1.0)
    rep = attractor_boxes(m, boxset_from_band(6, (0.25, 0.75)), 8, samples_per_box=9)
    assert rep.connected and rep.separates


def test_invariant_annulus_diss_rot(dr):
    rep = construct_invariant_annulus(dr, d=6)
    assert rep.verified and rep.connected and rep.separates
    band = rep.boxes.bandify()
    assert band is not None and band.boxes == rep.boxes.boxes


def test_invariant_annulus_rnf(rnf):
    rep = construct_invariant_annulus(rnf, W=boxset_from_band(6, (0.25, 0.75)), d=6)
    assert rep.verified


def test_invariant_annulus_twist_not_found():
    with pytest.raises(NotFoundAtResolution):
        construct_invariant_annulus(twist(), d=6)


def test_returning_disk_signs_on_rnf(rnf, rnf_graph5):
    wneg = find_returning_disk(rnf_graph5, -1)
    assert wneg is not None and wneg.k < 0
    # the certificate's witness re-verifies by direct iteration
    z = LiftPoint(*wneg.z)
    img = iterate(rnf, z, wneg.n)
    assert wneg.U.translate(wneg.k).contains_interior(img.x, img.y)
    wpos = find_returning_disk(rnf_graph5, +1)
    assert wpos is not None and wpos.k > 0


def test_returning_negative_disjoint_from_recurrence(rnf, rnf_graph5):
    wneg = find_returning_disk(rnf_graph5, -1)
    rec = chain_recurrent_boxes(build_box_graph(rnf, (0.1, 0.9), 8))
    assert rec.geometric_overlaps(wneg.U) == []


def test_no_negative_return_for_positive_drift(dr):
    g = build_box_graph(dr, (0.1, 0.9), 6)
    assert find_returning_disk(g, -1, horizon=50) is None


def test_disk_self_disjoint(dr):
    assert disk_self_disjoint(dr, Rect(0.0, 0.1, 0.45, 0.55))
    ident_box = Rect(0.0, 0.9, 0.3, 0.7)
    assert not disk_self_disjoint(twist(), ident_box)


def test_assemble_periodic_chain_from_horseshoe_witnesses():
    from annulab.horseshoe import make_horseshoe, verify_example_claims

    m = make_horseshoe()
    claims = verify_example_claims(m)
    chain = assemble_periodic_chain(m, claims.positive, claims.negative)
    assert chain.periodic
    assert chain.disks[0].as_list() == chain.disks[-1].as_list()
    # minimal parameters k1 = k2 = 1 give the two-link closed chain
    assert len(chain.exponents) == 2
    assert chain.exponents == (claims.positive.n, claims.negative.n)


def test_assemble_chain_rejects_mismatched_bases():
    from annulab.horseshoe import make_horseshoe, verify_example_claims
    from annulab.boxdyn import ReturningWitness

    m = make_horseshoe()
    claims = verify_example_claims(m)
    moved = ReturningWitness(
        U=claims.negative.U.translate(1),
        n=claims.negative.n,
        k=claims.negative.k,
        z=claims.negative.z,
        z_image=claims.negative.z_image,
        sign=-1,
    )
    with pytest.raises(LinkVerificationFailed):
        assemble_periodic_chain(m, claims.positive, moved)


def test_pull_back_returning(dr):
    g = build_box_graph(dr, (0.1, 0.9), 7)
    w = find_returning_disk(g, +1)
    assert w is not None
    # a point off the attractor whose 12-step image lands in the disk
    n = 12
    target_y = (w.U.y0 + w.U.y1) / 2
    y0 = 0.5 + (target_y - 0.5) / (0.9 ** n)
    x0 = (w.U.x0 + w.U.x1) / 2 - n * 0.318
    x0 -= math.floor(x0)
    pulled = pull_back_returning(dr, AnnulusPoint(x0, y0), w, n)
    assert pulled.U.contains(x0, y0)
    assert pulled.k == w.k and pulled.n == w.n


def test_pull_back_identity_case(dr):
    g = build_box_graph(dr, (0.1, 0.9), 7)
    w = find_returning_disk(g, +1)
    inside = AnnulusPoint((w.U.x0 + w.U.x1) / 2 % 1.0, (w.U.y0 + w.U.y1) / 2)
    assert pull_back_returning(dr, inside, w, 0) is w


def test_pull_back_precondition(dr):
    g = build_box_graph(dr, (0.1, 0.9), 7)
    w = find_returning_disk(g, +1)
    with pytest.raises(PreconditionFailed):
        pull_back_returning(dr, AnnulusPoint(0.2, 0.75), w, 1)


def test_omega_limit_boxes(dr):
    bs, escaped = omega_limit_boxes(dr, LiftPoint(0.1, 0.3), 500, 2000, d=7)
    assert not escaped
    rows = set(r for _, r in bs.boxes)
    assert rows <= {63, 64}


def test_omega_limit_pt_attracting_node():
    m = pert_twist(0.0, 0.1, 0.0, 0.5)
    bs, escaped = omega_limit_boxes(m, LiftPoint(0.3, 0.6), 500, 1000, d=7)
    assert not escaped
    assert bs.boxes <= {(63, 63), (63, 64), (64, 63), (64, 64)}


def test_omega_limit_billiard_fills_row():
    m = billiard_chart_map(circle_table(1.0))
    theta = 0.31 * math.pi  # irrational-looking rotation theta/pi
    bs, escaped = omega_limit_boxes(m, LiftPoint(0.0, theta / math.pi), 100, 3000, d=6)
    assert not escaped
    rows = set(r for _, r in bs.boxes)
    assert len(rows) == 1
    cols = set(c for c, _ in bs.boxes)
    assert len(cols) == 64


def test_boxset_json_round_trip():
    bs = boxset_from_band(5, (0.25, 0.75))
    again = BoxSet.from_json(bs.to_json())
    assert again.boxes == bs.boxes and again.d == bs.d


def test_separation_flags_on_synthetic_sets():
    full_band = boxset_from_band(4, (0.375, 0.625))
    bs = BoxSet(4, 0, 16, full_band.boxes)
    assert bs.separates() and bs.connected()
    holed = BoxSet(4, 0, 16, frozenset(b for b in bs.boxes if b[0] != 3))
    assert not holed.separates()
