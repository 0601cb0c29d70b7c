"""Command-line front end: reproducible certificates and plot-ready data.

Exit codes: 0 success, 2 for honest not-found reports (no window at scale,
no returning disk at this horizon), 1 for errors.
"""

import argparse
import os
import sys

import numpy as np

from . import certificates as certs
from .billiards import BilliardState, BumperSet, Disk, bumper_avoidance_search, parse_table_flag
from .boxdyn import (
    BoxSet,
    attractor_boxes,
    boxset_from_band,
    box_of_point,
    build_box_graph,
    chain_recurrent_boxes,
    find_returning_disk,
    grow_window,
    verify_window,
)
from .errors import AnnulabError
from .fixedpoint import drift_classification, find_fixed_points, find_periodic_orbit
from .geom import Rect
from .lifts import LiftPoint
from .rotation import rotation_estimate
from .zoo import parse_map_flag

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_FOUND = 2


def _band(text):
    lo, hi = (float(v) for v in text.split(","))
    return (lo, hi)


def _point(text):
    x, y = (float(v) for v in text.split(","))
    return LiftPoint(x, y)


def _out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _common(sub):
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--tol", type=float, default=1e-9)


def cmd_rotation(args):
    m = parse_map_flag(args.map)
    p = _point(args.point)
    est = rotation_estimate(m, p, args.steps, args.tol if args.tol < 1 else 1e-6)
    xs, _ = m.orbit(p.x, p.y, args.steps)
    with open(_out(args, "rotation.csv"), "w") as fh:
        fh.write("n,displacement_over_n\n")
        for n in range(1, args.steps + 1):
            fh.write(f"{n},{float((xs[n] - xs[0]) / n)!r}\n")
    cert = certs.build("rotation", m.spec_dict(), {
        "point": [p.x, p.y],
        "N": est.N,
        "mean": est.mean,
        "liminf": est.liminf_est,
        "limsup": est.limsup_est,
        "converged": est.converged,
    })
    certs.dump(_out(args, "rotation.json"), cert)
    print(f"rotation mean={est.mean!r} window=[{est.liminf_est!r}, {est.limsup_est!r}] "
          f"converged={est.converged}")
    return EXIT_OK


def cmd_window(args):
    m = parse_map_flag(args.map)
    d = args.resolution
    region = _band(args.region)
    if args.grow:
        x, y = (float(v) for v in args.seed_point.split(","))
        seed = BoxSet(d, 0, 1 << d, frozenset([box_of_point(d, x, y)]))
        rep = grow_window(m, seed, region, args.max_rounds)
    else:
        band = _band(args.band)
        rep = verify_window(m, boxset_from_band(d, band))
    payload = {
        "boxes": rep.boxes.to_json(),
        "verified": rep.verified,
        "margin": None if rep.margin in (None, float("-inf")) else rep.margin,
        "stabilized": rep.stabilized,
        "rounds": rep.rounds,
        "unbounded": rep.unbounded,
        "connected": rep.connected,
        "separates": rep.separates,
    }
    cert = certs.build("window", m.spec_dict(), payload)
    certs.dump(_out(args, "window.json"), cert)
    if rep.unbounded:
        print(f"Unbounded-at-scale: growth hit the region bound after {rep.rounds} rounds")
        return EXIT_NOT_FOUND
    if not rep.verified:
        print("window not verified (no strict interior margin)")
        return EXIT_NOT_FOUND
    print(f"window verified: {len(rep.boxes)} boxes, margin {rep.margin:.3e}")
    return EXIT_OK


def cmd_attractor(args):
    m = parse_map_flag(args.map)
    W = boxset_from_band(args.resolution, _band(args.band))
    rep = attractor_boxes(m, W, args.depth)
    payload = {
        "boxes": rep.boxes.to_json(),
        "depth": rep.depth,
        "connected": rep.connected,
        "separates": rep.separates,
        "contained_in_window": rep.contained_in_window,
        "forward_invariant": rep.forward_invariant,
    }
    certs.dump(_out(args, "attractor.json"), certs.build("attractor", m.spec_dict(), payload))
    print(f"attractor: {len(rep.boxes)} boxes, connected={rep.connected}, "
          f"separates={rep.separates}")
    return EXIT_OK


def cmd_recurrence(args):
    m = parse_map_flag(args.map)
    g = build_box_graph(m, _band(args.band), args.resolution)
    rec = chain_recurrent_boxes(g)
    payload = {"boxes": rec.to_json(), "band": list(g.band), "inflation": g.inflation}
    certs.dump(_out(args, "recurrence.json"), certs.build("recurrence", m.spec_dict(), payload))
    print(f"chain-recurrent boxes: {len(rec)} of {g.n_nodes}")
    return EXIT_OK


def cmd_returning(args):
    m = parse_map_flag(args.map)
    g = build_box_graph(m, _band(args.band), args.resolution,
                        samples_per_box=args.samples)
    sign = 1 if args.sign in ("+", "+1", "pos") else -1
    w = find_returning_disk(g, sign, horizon=args.horizon)
    if w is None:
        print(f"no {'positively' if sign > 0 else 'negatively'} returning disk found "
              f"at resolution 2^-{args.resolution} within horizon {args.horizon}")
        return EXIT_NOT_FOUND
    certs.dump(_out(args, "returning.json"),
               certs.build("returning", m.spec_dict(), w.to_payload()))
    print(f"returning disk: n={w.n}, k={w.k}, witness z={w.z}")
    return EXIT_OK


def cmd_fixed(args):
    m = parse_map_flag(args.map)
    x0, x1, y0, y1 = (float(v) for v in args.region.split(","))
    res = find_fixed_points(m, Rect(x0, x1, y0, y1), args.tol)
    payload = {
        "tol": args.tol,
        "grid_min_displacement": res.grid_min_displacement,
        "records": [
            {
                "point": [r.point.x, r.point.y],
                "image": list(m.evaluate_xy(r.point.x, r.point.y)),
                "index": r.index,
                "residual": r.residual,
                "cell": r.cell.as_list(),
                "degenerate": r.degenerate,
            }
            for r in res.records
        ],
    }
    certs.dump(_out(args, "fixed.json"), certs.build("fixed", m.spec_dict(), payload))
    print(f"fixed points: {len(res.records)} records "
          f"(grid min displacement {res.grid_min_displacement:.3e})")
    return EXIT_OK


def cmd_periodic(args):
    m = parse_map_flag(args.map)
    x0, x1, y0, y1 = (float(v) for v in args.region.split(","))
    records, _ = find_periodic_orbit(m, args.p, args.q, Rect(x0, x1, y0, y1), args.tol)
    gm = m.power_shift(args.q, args.p)
    payload = {
        "p": args.p,
        "q": args.q,
        "tol": args.tol,
        "records": [
            {
                "point": [r.point.x, r.point.y],
                "image": list(gm.evaluate_xy(r.point.x, r.point.y)),
                "residual": r.residual,
                "rotation": [r.rotation_liminf, r.rotation_limsup],
            }
            for r in records
        ],
    }
    certs.dump(_out(args, "periodic.json"), certs.build("periodic", m.spec_dict(), payload))
    print(f"periodic points with rotation {args.p}/{args.q}: {len(records)}")
    return EXIT_OK


def cmd_drift(args):
    m = parse_map_flag(args.map)
    rng = np.random.default_rng(args.seed)
    pts = [LiftPoint(float(x), float(y))
           for x, y in zip(rng.uniform(0, 1, args.samples),
                           rng.uniform(0.2, 0.8, args.samples))]
    dc = drift_classification(m, pts, N=args.steps, tol=args.tol)
    payload = {
        "points": [[p.x, p.y] for p in pts],
        "tags": list(dc.tags),
        "verdict": dc.verdict,
        "N": args.steps,
        "escape_threshold": 3.0,
        "converge_tol": 10.0 * args.tol,
        "fixed_points": [[r.point.x, r.point.y] for r in dc.fixed_points],
    }
    certs.dump(_out(args, "drift.json"), certs.build("drift", m.spec_dict(), payload))
    print(f"drift verdict: {dc.verdict} {dc.counts()}")
    return EXIT_OK


def cmd_billiard(args):
    table = parse_table_flag(args.table)
    if args.bumpers:
        import json

        with open(args.bumpers) as fh:
            spec = json.load(fh)
        bumpers = BumperSet([Disk(*d) for d in spec["disks"]])
    else:
        bumpers = BumperSet([])
    cert_obj = bumper_avoidance_search(table, bumpers, [args.theta0], args.steps,
                                       s0=args.s0)
    if cert_obj is None:
        print("no bumper-avoiding trajectory found on the given grid")
        return EXIT_NOT_FOUND
    payload = {
        "table": args.table,
        "s0": cert_obj.s0,
        "theta0": cert_obj.theta0,
        "steps": cert_obj.steps,
        "min_distance": None if cert_obj.min_distance == float("inf") else cert_obj.min_distance,
        "bumpers": [[d.cx, d.cy, d.r] for d in bumpers.disks],
    }
    mapspec = {"name": "BILLIARD_CIRCLE" if table.kind == "circle" else "BILLIARD_ELLIPSE",
               "params": {"radius": table.a} if table.kind == "circle"
               else {"a": table.a, "b": table.b},
               "chart": {"kind": "open", "margin": 1e-12}}
    certs.dump(_out(args, "billiard.json"), certs.build("billiard", mapspec, payload))
    md = cert_obj.min_distance
    print(f"bumper-free trajectory certified: theta0={cert_obj.theta0}, "
          f"{cert_obj.steps} chords, min distance {md if md != float('inf') else 'inf'}")
    return EXIT_OK


def cmd_horseshoe(args):
    from .horseshoe import make_horseshoe, verify_example_claims

    m = make_horseshoe()
    claims = verify_example_claims(m)
    certs.dump(_out(args, "horseshoe.json"),
               certs.build("horseshoe", m.spec_dict(), claims.to_payload()))
    print(f"horseshoe claims verified: negative (n={claims.negative.n}, k={claims.negative.k}), "
          f"positive (n={claims.positive.n}, k={claims.positive.k}), "
          f"no positive return below n={claims.min_positive_n}; "
          f"shrunken disk returns with n={claims.small_disk_witness.n}")
    return EXIT_OK


def cmd_reverify(args):
    cert = certs.load(args.certificate)
    ok, msg = certs.reverify(cert)
    print(("PASS: " if ok else "FAIL: ") + msg)
    return EXIT_OK if ok else EXIT_ERROR


def build_parser():
    ap = argparse.ArgumentParser(
        prog="annulab",
        description="Annulus dynamics at desk scale: rotation numbers, windows, "
                    "attractors, returning disks, fixed-point indices, billiards, "
                    "and a triple horseshoe, with re-verifiable certificates.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rotation", help="estimate a rotation number")
    s.add_argument("--map", required=True)
    s.add_argument("--point", default="0.0,0.5")
    s.add_argument("--steps", type=int, default=1000)
    _common(s)
    s.set_defaults(fn=cmd_rotation)

    s = sub.add_parser("window", help="verify or grow a forward-invariant window")
    s.add_argument("--map", required=True)
    s.add_argument("--resolution", type=int, default=6)
    s.add_argument("--band", default="0.25,0.75")
    s.add_argument("--grow", action="store_true")
    s.add_argument("--seed-point", default="0.5,0.5")
    s.add_argument("--region", default="0.0625,0.9375")
    s.add_argument("--max-rounds", type=int, default=100)
    _common(s)
    s.set_defaults(fn=cmd_window)

    s = sub.add_parser("attractor", help="attractor boxes inside a verified window")
    s.add_argument("--map", required=True)
    s.add_argument("--resolution", type=int, default=7)
    s.add_argument("--band", default="0.25,0.75")
    s.add_argument("--depth", type=int, default=10)
    _common(s)
    s.set_defaults(fn=cmd_attractor)

    s = sub.add_parser("recurrence", help="chain-recurrent boxes")
    s.add_argument("--map", required=True)
    s.add_argument("--resolution", type=int, default=7)
    s.add_argument("--band", default="0.1,0.9")
    _common(s)
    s.set_defaults(fn=cmd_recurrence)

    s = sub.add_parser("returning", help="search for a returning disk")
    s.add_argument("--map", required=True)
    s.add_argument("--sign", required=True, choices=["+", "-", "+1", "-1", "pos", "neg"])
    s.add_argument("--resolution", type=int, default=5)
    s.add_argument("--band", default="0.1,0.9")
    s.add_argument("--horizon", type=int, default=64)
    s.add_argument("--samples", type=int, default=3)
    _common(s)
    s.set_defaults(fn=cmd_returning)

    s = sub.add_parser("fixed", help="locate fixed points with indices")
    s.add_argument("--map", required=True)
    s.add_argument("--region", default="0,1,0.1,0.9")
    _common(s)
    s.set_defaults(fn=cmd_fixed)

    s = sub.add_parser("periodic", help="periodic points with rotation p/q")
    s.add_argument("--map", required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--region", default="0,1,0.1,0.9")
    _common(s)
    s.set_defaults(fn=cmd_periodic)

    s = sub.add_parser("drift", help="classify horizontal drift of sample orbits")
    s.add_argument("--map", required=True)
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--steps", type=int, default=2000)
    s.add_argument("--seed", type=int, default=0)
    _common(s)
    s.set_defaults(fn=cmd_drift)

    s = sub.add_parser("billiard", help="billiard bumper-avoidance search")
    s.add_argument("--table", default="circle:1")
    s.add_argument("--theta0", type=float, default=0.05)
    s.add_argument("--steps", type=int, default=10000)
    s.add_argument("--bumpers", default=None)
    s.add_argument("--s0", type=float, default=0.0)
    _common(s)
    s.set_defaults(fn=cmd_billiard)

    s = sub.add_parser("horseshoe", help="verify the triple-horseshoe claims")
    s.add_argument("--verify", action="store_true")
    _common(s)
    s.set_defaults(fn=cmd_horseshoe)

    s = sub.add_parser("reverify", help="replay the checks of a certificate")
    s.add_argument("certificate")
    _common(s)
    s.set_defaults(fn=cmd_reverify)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except AnnulabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
