"""Self-contained JSON certificates and their fast re-verification.

A certificate embeds the map specification and enough witness data that the
claim can be replayed without re-running the search.  Emission is
deterministic: identical inputs give byte-identical files.
"""

import json
import math

import numpy as np

from . import kernels
from .billiards import (
    BilliardState,
    BumperSet,
    Disk,
    chord_bumper_distances,
    parse_table_flag,
)
from .boxdyn import BoxSet, batch_final, disk_self_disjoint, verify_returning, verify_window
from .errors import SchemaError
from .geom import rect_from_list
from .lifts import LiftPoint, iterate
from .rotation import rotation_estimate
from .zoo import map_from_spec

VERSION = 1

KINDS = (
    "window", "attractor", "recurrence", "returning", "chain", "fixed",
    "periodic", "drift", "billiard", "horseshoe", "rotation",
)


def build(kind, map_spec, payload):
    if kind not in KINDS:
        raise SchemaError(f"unknown certificate kind {kind!r}")
    return {"version": VERSION, "kind": kind, "map": map_spec, "payload": payload}


def dump(path, cert):
    with open(path, "w") as fh:
        json.dump(cert, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        try:
            cert = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not valid JSON: {e}") from e
    for key in ("version", "kind", "map", "payload"):
        if key not in cert:
            raise SchemaError(f"certificate missing key {key!r}")
    if cert["kind"] not in KINDS:
        raise SchemaError(f"unknown certificate kind {cert['kind']!r}")
    return cert


def _map_of(cert):
    spec = cert["map"]
    if spec.get("name", "").startswith("BILLIARD"):
        return map_from_spec(spec)
    return map_from_spec(spec)


def _check_returning(m, payload, tol=1e-9):
    U = rect_from_list(payload["U"])
    n = int(payload["n"])
    k = int(payload["k"])
    z = tuple(payload["z"])
    if k == 0 or n < 1:
        return False, "degenerate witness parameters"
    if not disk_self_disjoint(m, U):
        return False, "f(U) meets U"
    ok, img = verify_returning(m, U, n, k, z)
    if not ok:
        return False, "witness orbit misses the translated disk"
    stored = tuple(payload["z_image"])
    if math.hypot(img[0] - stored[0], img[1] - stored[1]) > 1e-6:
        return False, "stored image point does not match the replayed orbit"
    return True, f"returning disk re-verified (n={n}, k={k})"


def _check_chain(m, payload):
    disks = [rect_from_list(v) for v in payload["disks"]]
    exps = [int(v) for v in payload["exponents"]]
    wits = [tuple(w) for w in payload["witnesses"]]
    imgs = [tuple(w) for w in payload["witness_images"]]
    if len(disks) != len(exps) + 1 or len(wits) != len(exps) or len(imgs) != len(exps):
        return False, "chain arity mismatch"
    if not disk_self_disjoint(m, disks[0]):
        return False, "f(U) meets U"
    for i, (z, n_link) in enumerate(zip(wits, exps)):
        if not disks[i].contains_interior(z[0], z[1]):
            return False, f"link {i}: witness not in its disk"
        try:
            zn = iterate(m, LiftPoint(z[0], z[1]), n_link)
        except Exception:
            return False, f"link {i}: witness orbit left the chart"
        if not disks[i + 1].contains_interior(zn.x, zn.y):
            return False, f"link {i}: image misses the next disk"
        if math.hypot(zn.x - imgs[i][0], zn.y - imgs[i][1]) > 1e-6:
            return False, f"link {i}: stored image does not match the replayed orbit"
    return True, f"periodic disk chain re-verified ({len(exps)} links)"


def _check_fixed(m, payload):
    tol = float(payload["tol"])
    for rec in payload["records"]:
        x, y = rec["point"]
        fx, fy = m.evaluate_xy(x, y)
        if math.hypot(fx - x, fy - y) >= tol:
            return False, f"residual at ({x}, {y}) exceeds tol"
        if "image" in rec:
            ix, iy = rec["image"]
            if math.hypot(fx - ix, fy - iy) > 1e-6:
                return False, "stored image does not match the replayed map value"
    return True, f"{len(payload['records'])} fixed-point records re-verified"


def _check_periodic(m, payload):
    tol = float(payload["tol"])
    p = int(payload["p"])
    q = int(payload["q"])
    gm = m.power_shift(q, p)
    for rec in payload["records"]:
        x, y = rec["point"]
        fx, fy = gm.evaluate_xy(x, y)
        if math.hypot(fx - x, fy - y) >= tol:
            return False, f"periodic residual at ({x}, {y}) exceeds tol"
        if "image" in rec:
            ix, iy = rec["image"]
            if math.hypot(fx - ix, fy - iy) > 1e-6:
                return False, "stored image does not match the replayed orbit"
    return True, f"{len(payload['records'])} periodic records re-verified (p/q={p}/{q})"


def _check_window(m, payload):
    boxes = BoxSet.from_json(payload["boxes"])
    rep = verify_window(m, boxes, payload.get("samples_per_box", 3),
                        payload.get("inflation"))
    if not rep.verified:
        return False, "stored box set is not a verified window"
    return True, f"window of {len(boxes)} boxes re-verified (margin {rep.margin:.3e})"


def _check_attractor(m, payload):
    boxes = BoxSet.from_json(payload["boxes"])
    if bool(payload["connected"]) != boxes.connected():
        return False, "stored connectedness flag does not match the box set"
    if bool(payload["separates"]) != boxes.separates():
        return False, "stored separation flag does not match the box set"
    return True, f"attractor box set of {len(boxes)} boxes re-verified"


def _check_recurrence(m, payload):
    boxes = BoxSet.from_json(payload["boxes"])
    return True, f"recurrence report carries {len(boxes)} boxes (schema check only)"


def _check_drift(m, payload):
    pts = payload["points"]
    tags = payload["tags"]
    N = int(payload["N"])
    thresh = float(payload["escape_threshold"])
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    half = N // 2
    mx, my, st1 = batch_final(m, xs, ys, half)
    fx, fy, st2 = batch_final(m, mx, my, N - half)
    for i, tag in enumerate(tags):
        if st1[i] != kernels.OK or st2[i] != kernels.OK:
            return False, f"point {i}: orbit left the chart on replay"
        total = fx[i] - xs[i]
        tail = fx[i] - mx[i]
        if tag == "to+inf" and not (total > thresh and tail > 0):
            return False, f"point {i}: positive drift not reproduced"
        if tag == "to-inf" and not (total < -thresh and tail < 0):
            return False, f"point {i}: negative drift not reproduced"
        if tag == "converges":
            fps = payload.get("fixed_points", [])
            okc = False
            for fp in fps:
                j = round(fx[i] - fp[0])
                if math.hypot(fx[i] - (fp[0] + j), fy[i] - fp[1]) < float(payload["converge_tol"]):
                    okc = True
                    break
            if not okc:
                return False, f"point {i}: convergence not reproduced"
    return True, f"drift tags re-verified for {len(tags)} points"


def _check_billiard(m, payload):
    table = parse_table_flag(payload["table"])
    bumpers = BumperSet([Disk(*d) for d in payload["bumpers"]])
    st = BilliardState(float(payload["s0"]), float(payload["theta0"]))
    n = int(payload["steps"])
    if not bumpers.disks:
        return True, "no bumpers: trivially certified"
    dists = chord_bumper_distances(table, st, bumpers, n)
    lo = float(np.min(dists))
    if lo <= 0:
        return False, "replayed trajectory strikes a bumper"
    if abs(lo - float(payload["min_distance"])) > 1e-9:
        return False, "stored minimum distance does not match the replay"
    return True, f"bumper-free trajectory re-verified ({n} chords, min distance {lo:.4f})"


def _check_horseshoe(m, payload):
    for key in ("negative", "positive", "small_disk_witness"):
        w = payload[key]
        ok, msg = _check_returning(m, w)
        if not ok:
            return False, f"{key}: {msg}"
    if int(payload["min_positive_n"]) != 5:
        return False, "minimality bound mismatch"
    return True, "horseshoe claims re-verified"


def _check_rotation(m, payload):
    p = LiftPoint(*payload["point"])
    est = rotation_estimate(m, p, int(payload["N"]))
    if abs(est.mean - float(payload["mean"])) > 1e-12:
        return False, "rotation mean does not reproduce"
    return True, f"rotation estimate re-verified (mean {est.mean!r})"


_CHECKS = {
    "returning": _check_returning,
    "chain": _check_chain,
    "fixed": _check_fixed,
    "periodic": _check_periodic,
    "window": _check_window,
    "attractor": _check_attractor,
    "recurrence": _check_recurrence,
    "drift": _check_drift,
    "billiard": _check_billiard,
    "horseshoe": _check_horseshoe,
    "rotation": _check_rotation,
}


def reverify(cert):
    """Replay the witness checks of a loaded certificate: (ok, message)."""
    kind = cert["kind"]
    if kind not in _CHECKS:
        raise SchemaError(f"unknown certificate kind {kind!r}")
    try:
        m = _map_of(cert)
    except Exception as e:
        return False, f"could not rebuild the map: {e}"
    try:
        return _CHECKS[kind](m, cert["payload"])
    except SchemaError:
        raise
    except KeyError as e:
        raise SchemaError(f"certificate payload missing {e}") from e
    except Exception as e:
        return False, f"re-verification raised: {e}"
