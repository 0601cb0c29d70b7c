"""Fixed points, winding-number indices, rational-rotation periodic orbits,
and the horizontal drift classification of lift orbits.

Displacement means z -> f(z) - z on the universal cover, so a zero is a
fixed point of the chosen lift.  The index of an isolated zero is the
winding number of the displacement field along a small cell boundary,
computed by signed angle summation with adaptive refinement.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .boxdyn import batch_final
from .errors import BoundaryZero, OverlapError, PreconditionFailed
from .geom import Rect
from .lifts import LiftMap, LiftPoint
from .rotation import rotation_estimate


@dataclass(frozen=True)
class FixedPointRecord:
    point: LiftPoint
    index: int
    residual: float
    cell: Rect
    degenerate: bool = False   # zero set not isolated at this scale


@dataclass(frozen=True)
class FixedPointSearchResult:
    records: tuple
    grid_min_displacement: float
    region: Rect
    tol: float

    @property
    def isolated(self):
        return tuple(r for r in self.records if not r.degenerate)

    @property
    def degenerate_curve_cells(self):
        return tuple(r for r in self.records if r.degenerate)


def _displacement_batch(m: LiftMap, xs, ys):
    fx, fy, st = m.batch(xs, ys)
    return fx - xs, fy - ys, st


def fixed_point_index(m: LiftMap, cell: Rect, eps=1e-9, per_edge=16, max_rounds=24):
    """Winding number of the displacement field along the cell boundary.

    The boundary subdivision refines until every angle increment is below
    pi/2; BoundaryZero signals displacement below eps on the boundary.
    """
    ts = list(np.linspace(0.0, 1.0, 4 * per_edge, endpoint=False))

    def point_at(t):
        t = t % 1.0
        seg, u = divmod(t * 4.0, 1.0)
        seg = int(seg)
        if seg == 0:
            return cell.x0 + u * cell.width, cell.y0
        if seg == 1:
            return cell.x1, cell.y0 + u * cell.height
        if seg == 2:
            return cell.x1 - u * cell.width, cell.y1
        return cell.x0, cell.y1 - u * cell.height

    for _ in range(max_rounds):
        pts = np.array([point_at(t) for t in ts])
        dx, dy, st = _displacement_batch(m, pts[:, 0], pts[:, 1])
        if np.any(st == kernels.UNDEFINED):
            raise PreconditionFailed("cell boundary leaves the map domain")
        mags = np.hypot(dx, dy)
        if float(np.min(mags)) < eps:
            raise BoundaryZero(
                f"displacement {float(np.min(mags)):.3e} below eps on cell boundary"
            )
        ang = np.arctan2(dy, dx)
        diff = np.diff(np.append(ang, ang[0]))
        diff = (diff + np.pi) % (2 * np.pi) - np.pi
        bad = np.abs(diff) >= 0.5 * np.pi
        if not np.any(bad):
            total = float(np.sum(diff))
            w = total / (2 * np.pi)
            if abs(w - round(w)) > 0.1:
                raise BoundaryZero("winding sum failed to close to an integer")
            return int(round(w))
        new_ts = []
        nt = len(ts)
        for i in range(nt):
            new_ts.append(ts[i])
            if bad[i]:
                t0 = ts[i]
                t1 = ts[(i + 1) % nt] + (1.0 if i == nt - 1 else 0.0)
                new_ts.append(0.5 * (t0 + t1))
        ts = new_ts
        if len(ts) > 300000:
            break
    raise BoundaryZero("boundary refinement did not stabilize")


def _polish(m: LiftMap, x, y, cell: Rect, tol, max_iter=40):
    """Drive |f(z)-z| toward zero: damped Gauss-Newton steps (pseudo-inverse,
    so rank-deficient Jacobians still move), one axis-shrink round on stall."""

    def disp(px, py):
        fx, fy = m.evaluate_xy(px, py)
        return fx - px, fy - py

    def norm2(px, py):
        try:
            dx, dy = disp(px, py)
        except Exception:
            return math.inf
        return dx * dx + dy * dy

    target2 = (tol * 1e-3) ** 2
    h = 1e-7
    axis_round_used = False
    it = 0
    while it < max_iter:
        it += 1
        r2 = norm2(x, y)
        if r2 <= target2:
            break
        dx, dy = disp(x, y)
        fxp = disp(x + h, y)
        fxm = disp(x - h, y)
        fyp = disp(x, y + h)
        fym = disp(x, y - h)
        J = np.array(
            [
                [(fxp[0] - fxm[0]) / (2 * h), (fyp[0] - fym[0]) / (2 * h)],
                [(fxp[1] - fxm[1]) / (2 * h), (fyp[1] - fym[1]) / (2 * h)],
            ]
        )
        step, *_ = np.linalg.lstsq(J, -np.array([dx, dy]), rcond=None)
        lam = 1.0
        stepped = False
        for _ in range(25):
            nx, ny = x + lam * step[0], y + lam * step[1]
            if norm2(nx, ny) < r2:
                x, y = nx, ny
                stepped = True
                break
            lam *= 0.5
        if stepped:
            continue
        if axis_round_used:
            break
        axis_round_used = True
        span = max(cell.width, cell.height)
        for axis in (0, 1):
            best = norm2(x, y)
            bestv = x if axis == 0 else y
            for sgn in (-1.0, 1.0):
                step_sz = span
                for _ in range(45):
                    cand = (x + sgn * step_sz, y) if axis == 0 else (x, y + sgn * step_sz)
                    v = norm2(*cand)
                    if v < best:
                        best = v
                        bestv = cand[axis]
                    step_sz *= 0.5
                    if step_sz < 1e-17:
                        break
            if axis == 0:
                x = bestv
            else:
                y = bestv
    return x, y, math.sqrt(norm2(x, y))


def _could_vanish(dx, dy, tol):
    mags = np.hypot(dx, dy)
    lo = float(np.min(mags))
    spread = float(max(np.max(dx) - np.min(dx), np.max(dy) - np.min(dy)))
    if lo <= 1.5 * spread + tol:
        return True
    sx = np.min(dx) <= 0.0 <= np.max(dx)
    sy = np.min(dy) <= 0.0 <= np.max(dy)
    return bool(sx and sy)


def find_fixed_points(m: LiftMap, region: Rect, tol=1e-9, cell_resolution=7,
                      init_resolution=5) -> FixedPointSearchResult:
    """Subdivision search for zeros of the lift displacement over a region.

    Cells whose sampled displacement could vanish are split down to side
    2^-cell_resolution, then each survivor is polished to residual < tol.
    Non-isolated zero sets (whole fixed curves) come back flagged degenerate
    with conventional index 0.  grid_min_displacement reports the minimum
    sampled displacement over the initial coarse grid.
    """
    nx = max(4, int(round(region.width * (1 << init_resolution))))
    ny = max(4, int(round(region.height * (1 << init_resolution))))
    xs = np.linspace(region.x0, region.x1, nx + 1)
    ys = np.linspace(region.y0, region.y1, ny + 1)
    cells = [
        Rect(xs[i], xs[i + 1], ys[j], ys[j + 1])
        for i in range(nx)
        for j in range(ny)
    ]

    def sample_cells(cs):
        pts_x = []
        pts_y = []
        for c in cs:
            gx, gy = c.sample_grid(3)
            pts_x.append(gx)
            pts_y.append(gy)
        X = np.concatenate(pts_x)
        Y = np.concatenate(pts_y)
        dx, dy, st = _displacement_batch(m, X, Y)
        return dx.reshape(len(cs), 9), dy.reshape(len(cs), 9), st.reshape(len(cs), 9)

    dx, dy, st = sample_cells(cells)
    ok = np.all(st == kernels.OK, axis=1)
    mags = np.hypot(dx, dy)
    grid_min = float(np.min(mags[ok])) if np.any(ok) else math.inf

    target = 1.0 / (1 << cell_resolution)
    active = [c for i, c in enumerate(cells) if ok[i] and _could_vanish(dx[i], dy[i], tol)]
    while active and max(max(c.width, c.height) for c in active) > target * 1.001:
        nxt = []
        for c in active:
            nxt.extend(c.split4() if max(c.width, c.height) > target * 1.001 else [c])
        dx, dy, st = sample_cells(nxt)
        active = [
            c
            for i, c in enumerate(nxt)
            if np.all(st[i] == kernels.OK) and _could_vanish(dx[i], dy[i], tol)
        ]

    raw = []
    for c in active:
        cx, cy = c.center
        px, py, res = _polish(m, cx, cy, c, tol)
        if res < tol and region.contains(px, py, slack=c.width):
            raw.append((px, py, res))

    half = 0.5 * target
    records = []
    used = [False] * len(raw)
    raw.sort(key=lambda t: t[2])
    for i, (px, py, res) in enumerate(raw):
        if used[i]:
            continue
        for j in range(i + 1, len(raw)):
            if used[j]:
                continue
            qx, qy, _ = raw[j]
            dth = abs((px - qx) - round(px - qx))
            if dth < 2 * target and abs(py - qy) < 2 * target:
                used[j] = True
        used[i] = True
        cell = Rect(px - half, px + half, py - half, py + half)
        try:
            idx = fixed_point_index(m, cell)
            degenerate = False
        except BoundaryZero:
            idx = 0
            degenerate = True
        records.append(FixedPointRecord(LiftPoint(px, py), idx, res, cell, degenerate))
    records.sort(key=lambda r: (r.point.x, r.point.y))
    return FixedPointSearchResult(tuple(records), grid_min, region, tol)


def lefschetz_sum(records, require_disjoint=True):
    """Sum of indices over isolated fixed-point records."""
    recs = [r for r in records if not r.degenerate]
    if require_disjoint:
        for i in range(len(recs)):
            for j in range(i + 1, len(recs)):
                if recs[i].cell.intersects(recs[j].cell):
                    raise OverlapError(
                        f"cells of records {i} and {j} overlap; indices not summable"
                    )
    return sum(r.index for r in recs)


@dataclass(frozen=True)
class PeriodicOrbitRecord:
    point: LiftPoint
    p: int
    q: int
    residual: float
    rotation_liminf: float
    rotation_limsup: float


def find_periodic_orbit(m: LiftMap, p: int, q: int, region: Rect, tol=1e-9,
                        rotation_N=2000, rotation_slack=1e-6, **search_kw):
    """Periodic points with rotation number p/q: zeros of the lift of f^q
    composed with the deck shift by -p, each cross-checked against the
    orbit's rotation estimate."""
    if q < 1:
        raise PreconditionFailed("q must be >= 1")
    gm = m.power_shift(q, p)
    res = find_fixed_points(gm, region, tol, **search_kw)
    out = []
    for r in res.records:
        est = rotation_estimate(m, r.point, rotation_N)
        if est.liminf_est - rotation_slack <= p / q <= est.limsup_est + rotation_slack:
            out.append(
                PeriodicOrbitRecord(r.point, p, q, r.residual,
                                    est.liminf_est, est.limsup_est)
            )
    return out, res


@dataclass(frozen=True)
class DriftClass:
    tags: tuple           # per point: "to+inf" | "to-inf" | "converges" | "unclassified"
    verdict: str
    fixed_points: tuple

    def counts(self):
        c = {}
        for t in self.tags:
            c[t] = c.get(t, 0) + 1
        return c


def drift_classification(m: LiftMap, points, N=2000, escape_threshold=3.0,
                         converge_tol=None, tol=1e-9, region: Rect = None,
                         fixed_points=None) -> DriftClass:
    """Tag each sample orbit: horizontal escape to either end, convergence to
    a fixed point of the lift, or unclassified at this horizon.

    Escape needs the total drift to pass the threshold with the tail half
    still moving the same way; convergence compares the final state against
    located fixed points (up to deck translation).
    """
    if converge_tol is None:
        converge_tol = 10.0 * tol
    if region is None:
        region = Rect(0.0, 1.0, 0.1, 0.9)
    if fixed_points is None:
        fixed_points = find_fixed_points(m, region, tol).records
    pts = [(p.x, p.y) for p in points]
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    half = N // 2
    mx, my, st1 = batch_final(m, xs, ys, half)
    fx, fy, st2 = batch_final(m, mx, my, N - half)
    tags = []
    for i in range(len(pts)):
        if st1[i] != kernels.OK or st2[i] != kernels.OK:
            tags.append("unclassified")
            continue
        tag = "unclassified"
        for r in fixed_points:
            j = round(fx[i] - r.point.x)
            if math.hypot(fx[i] - (r.point.x + j), fy[i] - r.point.y) < converge_tol:
                tag = "converges"
                break
        if tag == "unclassified":
            total = fx[i] - xs[i]
            tail = fx[i] - mx[i]
            if total > escape_threshold and tail > 0:
                tag = "to+inf"
            elif total < -escape_threshold and tail < 0:
                tag = "to-inf"
        tags.append(tag)
    kinds = set(tags)
    if kinds == {"to+inf"}:
        verdict = "uniform-positive-drift"
    elif kinds == {"to-inf"}:
        verdict = "uniform-negative-drift"
    elif kinds == {"converges"}:
        verdict = "all-converge"
    elif "unclassified" in kinds:
        verdict = "unclassified-present"
    else:
        verdict = "mixed"
    return DriftClass(tuple(tags), verdict, tuple(fixed_points))
