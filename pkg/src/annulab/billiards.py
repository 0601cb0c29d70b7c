"""Convex-table billiards embedded as annulus dynamics.

Phase space is (s, theta): normalized boundary parameter s in [0,1) and the
angle theta in (0, pi) the outgoing chord makes with the wall.  The circle
uses the exact closed form (s, theta) -> (s + theta/pi, theta); the ellipse
map is solved through exact ray/conic intersection.  The ellipse is
parameterized by the angle parameter, not arc length, so its rotation
numbers are chart dependent; the invariant area form carries the boundary
speed factor (see billiard_area_defect).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadParameter, DegenerateChord
from .lifts import ChartSpec, LiftMap


@dataclass(frozen=True)
class TableSpec:
    kind: str          # "circle" | "ellipse"
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("circle", "ellipse"):
            raise BadParameter(f"unknown table kind {self.kind!r}")
        if not self.a >= self.b > 0:
            raise BadParameter("table needs a >= b > 0")

    def point(self, t):
        w = 2 * math.pi * t
        return (self.a * math.cos(w), self.b * math.sin(w))

    def speed(self, t):
        w = 2 * math.pi * t
        return math.hypot(-self.a * math.sin(w), self.b * math.cos(w))


def circle_table(radius=1.0):
    return TableSpec("circle", radius, radius)


def ellipse_table(a, b):
    if a == b:
        return TableSpec("circle", a, b)
    return TableSpec("ellipse", a, b)


@dataclass(frozen=True)
class BilliardState:
    s: float
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi:
            raise BadParameter(f"theta={self.theta} outside (0, pi)")


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float


@dataclass
class BumperSet:
    disks: list = field(default_factory=list)

    def validate_inside(self, table: TableSpec, samples=256):
        """Disks must stay clear of the table wall."""
        for d in self.disks:
            for i in range(samples):
                px, py = table.point(i / samples)
                if math.hypot(px - d.cx, py - d.cy) <= d.r:
                    raise BadParameter("bumper touches the table boundary")


def _table_kind_params(table: TableSpec):
    if table.kind == "circle":
        return kernels.BILL_CIRCLE, np.zeros(0)
    return kernels.BILL_ELLIPSE, np.array([table.a, table.b])


def billiard_step(table: TableSpec, st: BilliardState) -> BilliardState:
    """Next boundary collision with equal-angle reflection."""
    if table.kind == "circle":
        s = st.s + st.theta / math.pi
        return BilliardState(s - math.floor(s), st.theta)
    kind, p = _table_kind_params(table)
    x, y, status = kernels.apply_one(kind, p, 1, 0.0, st.s, st.theta / math.pi)
    if status != kernels.OK:
        raise DegenerateChord(f"chord solve failed from ({st.s}, {st.theta})")
    return BilliardState(x - math.floor(x), y * math.pi)


def billiard_orbit(table: TableSpec, st: BilliardState, n: int):
    """Arrays of n+1 successive states (s lifted, theta)."""
    kind, p = _table_kind_params(table)
    xs, ys, status, steps = kernels.orbit_trace(
        kind, p, 1, 0.0, st.s, st.theta / math.pi, n, 1e-15, 1.0 - 1e-15
    )
    if status != kernels.OK:
        raise DegenerateChord(f"chord solve failed at bounce {steps + 1}")
    return xs, ys * math.pi


def billiard_area_defect(table: TableSpec, st: BilliardState, h: float) -> float:
    """Deviation of the map from preserving the invariant area form.

    The determinant of the central-difference Jacobian is taken in the
    coordinates (arc length, -cos theta); with the angle parameterization
    this is the parameter-space determinant times the boundary speed ratio.
    """
    if not 1e-7 <= h <= 1e-3:
        raise BadParameter(f"h={h} outside [1e-7, 1e-3]")

    def step_sp(s, pcos):
        theta = math.acos(-pcos)
        nxt = billiard_step(table, BilliardState(s - math.floor(s), theta))
        return nxt.s, -math.cos(nxt.theta)

    s0, p0 = st.s, -math.cos(st.theta)
    sp, pp = step_sp(s0 + h, p0)
    sm, pm = step_sp(s0 - h, p0)
    # unwrap the s difference across the seam
    ds_dx = ((sp - sm + 0.5) % 1.0 - 0.5) / (2 * h)
    dp_dx = (pp - pm) / (2 * h)
    sp2, pp2 = step_sp(s0, p0 + h)
    sm2, pm2 = step_sp(s0, p0 - h)
    ds_dy = ((sp2 - sm2 + 0.5) % 1.0 - 0.5) / (2 * h)
    dp_dy = (pp2 - pm2) / (2 * h)
    det = ds_dx * dp_dy - ds_dy * dp_dx
    s1 = billiard_step(table, st).s
    return abs(det * table.speed(s1) / table.speed(st.s)) - 1.0


def _segment_disk_distance(ax, ay, bx, by, d: Disk):
    vx, vy = bx - ax, by - ay
    wx, wy = d.cx - ax, d.cy - ay
    vv = vx * vx + vy * vy
    t = 0.0 if vv == 0 else max(0.0, min(1.0, (wx * vx + wy * vy) / vv))
    px, py = ax + t * vx, ay + t * vy
    return math.hypot(px - d.cx, py - d.cy) - d.r


def chord_bumper_distances(table: TableSpec, st: BilliardState, bumpers: BumperSet, n: int):
    """Per-chord minimum distance to the bumper disks along an n-step orbit."""
    xs, thetas = billiard_orbit(table, st, n)
    ss = xs - np.floor(xs)
    pts = np.array([table.point(float(s)) for s in ss])
    out = np.empty(n)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[i + 1]
        out[i] = min(
            _segment_disk_distance(ax, ay, bx, by, d) for d in bumpers.disks
        )
    return out


@dataclass(frozen=True)
class AvoidanceCertificate:
    s0: float
    theta0: float
    steps: int
    min_distance: float
    argmin_step: int

    @property
    def found(self):
        return True


def bumper_avoidance_search(table: TableSpec, bumpers: BumperSet, theta0_grid, n_steps, s0=0.0):
    """First initial state on the grid whose first n chords miss every bumper.

    Returns an AvoidanceCertificate, or None when no grid angle works at
    this scale (a report, not a failure).
    """
    if n_steps < 1:
        raise BadParameter("n_steps must be >= 1")
    if not bumpers.disks:
        theta0 = next(iter(theta0_grid))
        return AvoidanceCertificate(s0, float(theta0), n_steps, math.inf, -1)
    bumpers.validate_inside(table)
    for theta0 in theta0_grid:
        dists = chord_bumper_distances(table, BilliardState(s0, float(theta0)), bumpers, n_steps)
        lo = float(np.min(dists))
        if lo > 0.0:
            return AvoidanceCertificate(s0, float(theta0), n_steps, lo, int(np.argmin(dists)))
    return None


def billiard_chart_map(table: TableSpec) -> LiftMap:
    """The billiard map as a lift on the chart (s, theta/pi)."""
    kind, p = _table_kind_params(table)
    name = "BILLIARD_CIRCLE" if table.kind == "circle" else "BILLIARD_ELLIPSE"
    params = {"radius": table.a} if table.kind == "circle" else {"a": table.a, "b": table.b}
    return LiftMap(
        name=name,
        params=params,
        chart=ChartSpec("open", margin=1e-12),
        kind=kind,
        kparams=p,
    )


def parse_table_flag(text):
    """Parse --table circle:1 or ellipse:2,1."""
    text = text.strip()
    if ":" in text:
        head, tail = text.split(":", 1)
        vals = [float(v) for v in tail.split(",") if v]
    else:
        head, vals = text, []
    head = head.lower()
    if head == "circle":
        return circle_table(vals[0] if vals else 1.0)
    if head == "ellipse":
        if len(vals) != 2:
            raise BadParameter("ellipse table needs a,b")
        return ellipse_table(vals[0], vals[1])
    raise BadParameter(f"unknown table {head!r}")
