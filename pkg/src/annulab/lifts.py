"""Annulus points, lifts of annulus homeomorphisms, and orbit iteration.

The annulus is (R/Z) x I with the fiber interval I = (0,1) (open chart) or
[0,1] (closed chart).  A map is always handled through a lift on the
universal cover R x I; the horizontal coordinate is stored unwrapped so net
translation stays observable.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadParameter, FiberEscape, MissingInverse, OutsideDomain


@dataclass(frozen=True)
class AnnulusPoint:
    """Point of the annulus: theta in [0,1) turns, y the fiber coordinate."""

    theta: float
    y: float

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise BadParameter(f"theta={self.theta} outside [0,1)")


@dataclass(frozen=True)
class LiftPoint:
    """Point of the universal cover: x unwrapped turns, y fiber coordinate."""

    x: float
    y: float

    def as_tuple(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class ChartSpec:
    """Fiber chart: open or closed interval, with an escape margin.

    The margin clamps numerical drift: on an open chart an orbit may come
    arbitrarily close to the boundary, and a FiberEscape is raised only when
    y leaves [margin, 1-margin].
    """

    kind: str = "open"
    margin: float = 1e-12

    def __post_init__(self):
        if self.kind not in ("open", "closed"):
            raise BadParameter(f"chart kind {self.kind!r}")
        if not 0.0 < self.margin < 0.1:
            raise BadParameter(f"chart margin {self.margin} outside (0, 0.1)")

    def bounds(self):
        if self.kind == "open":
            return self.margin, 1.0 - self.margin
        return -self.margin, 1.0 + self.margin


def project(p: LiftPoint) -> AnnulusPoint:
    """Covering projection: wrap x into [0,1), keep the fiber coordinate."""
    return AnnulusPoint(p.x - math.floor(p.x), p.y)


@dataclass
class LiftMap:
    """A lift of an annulus homeomorphism, evaluated through compiled kernels.

    A map is a raw kernel (kind, kparams) applied `repeat` times followed by
    an integer horizontal shift `x_offset`; this closed form under
    composition covers powers and deck-shifted lifts.  Python-callable maps
    (kind < 0) bypass the kernels.
    """

    name: str
    params: dict
    chart: ChartSpec
    kind: int
    kparams: np.ndarray = field(default_factory=lambda: np.zeros(0))
    repeat: int = 1
    x_offset: float = 0.0
    exactness: str = "closed-form"
    has_inverse: bool = True
    py_eval: object = None
    py_inv: object = None

    def __post_init__(self):
        self.kparams = np.ascontiguousarray(self.kparams, dtype=np.float64)

    # -- scalar evaluation --------------------------------------------------

    def evaluate_xy(self, x, y):
        if self.kind < 0:
            for _ in range(self.repeat):
                x, y = self.py_eval(x, y)
            return x + self.x_offset, y
        xo, yo, st = kernels.apply_one(
            self.kind, self.kparams, self.repeat, self.x_offset, x, y
        )
        if st == kernels.UNDEFINED:
            raise OutsideDomain(f"{self.name}: point ({x}, {y}) outside domain")
        return xo, yo

    def inverse_xy(self, x, y):
        if not self.has_inverse:
            raise MissingInverse(f"{self.name} has no inverse")
        if self.kind < 0:
            x = x - self.x_offset
            for _ in range(self.repeat):
                x, y = self.py_inv(x, y)
            return x, y
        xo, yo, st = kernels.apply_inv_one(
            self.kind, self.kparams, self.repeat, self.x_offset, x, y
        )
        if st == kernels.UNDEFINED:
            raise OutsideDomain(f"{self.name}: point ({x}, {y}) outside inverse domain")
        return xo, yo

    def evaluate(self, p: LiftPoint) -> LiftPoint:
        x, y = self.evaluate_xy(p.x, p.y)
        return LiftPoint(x, y)

    # -- batched evaluation ---------------------------------------------------

    def batch(self, xs, ys):
        """Apply the map once to arrays of points; returns (xs, ys, status)."""
        lo, hi = self.chart.bounds()
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        ys = np.ascontiguousarray(ys, dtype=np.float64)
        if self.kind < 0:
            ox = np.empty_like(xs)
            oy = np.empty_like(ys)
            st = np.zeros(xs.shape, dtype=np.int64)
            for i in range(xs.size):
                x, y = xs.flat[i], ys.flat[i]
                for _ in range(self.repeat):
                    x, y = self.py_eval(x, y)
                x += self.x_offset
                ox.flat[i] = x
                oy.flat[i] = y
                if y < lo or y > hi:
                    st.flat[i] = kernels.ESCAPED
            return ox, oy, st
        return kernels.batch_apply(
            self.kind, self.kparams, self.repeat, self.x_offset, xs, ys, lo, hi
        )

    def batch_inverse(self, xs, ys):
        if not self.has_inverse:
            raise MissingInverse(f"{self.name} has no inverse")
        lo, hi = self.chart.bounds()
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        ys = np.ascontiguousarray(ys, dtype=np.float64)
        if self.kind < 0:
            ox = np.empty_like(xs)
            oy = np.empty_like(ys)
            st = np.zeros(xs.shape, dtype=np.int64)
            for i in range(xs.size):
                x, y = xs.flat[i] - self.x_offset, ys.flat[i]
                for _ in range(self.repeat):
                    x, y = self.py_inv(x, y)
                ox.flat[i] = x
                oy.flat[i] = y
                if y < lo or y > hi:
                    st.flat[i] = kernels.ESCAPED
            return ox, oy, st
        return kernels.batch_inverse(
            self.kind, self.kparams, self.repeat, self.x_offset, xs, ys, lo, hi
        )

    # -- orbits -----------------------------------------------------------

    def orbit(self, x0, y0, n):
        """Forward orbit trace (n+1 states).  Raises on escape/undefined."""
        lo, hi = self.chart.bounds()
        if self.kind < 0:
            xs = np.empty(n + 1)
            ys = np.empty(n + 1)
            xs[0], ys[0] = x0, y0
            x, y = x0, y0
            for i in range(n):
                x, y = self.evaluate_xy(x, y)
                if y < lo or y > hi:
                    raise FiberEscape(
                        f"{self.name}: fiber escape at step {i + 1}", i + 1, (x, y)
                    )
                xs[i + 1], ys[i + 1] = x, y
            return xs, ys
        xs, ys, st, steps = kernels.orbit_trace(
            self.kind, self.kparams, self.repeat, self.x_offset, x0, y0, n, lo, hi
        )
        if st == kernels.ESCAPED:
            raise FiberEscape(f"{self.name}: fiber escape at step {steps + 1}", steps + 1)
        if st == kernels.UNDEFINED:
            raise OutsideDomain(f"{self.name}: orbit left domain at step {steps + 1}")
        return xs, ys

    # -- derived maps ------------------------------------------------------

    def power_shift(self, q, p_shift=0):
        """The lift of the q-th power composed with the deck shift by -p_shift."""
        if q < 1:
            raise BadParameter("power must be >= 1")
        m = LiftMap(
            name=f"{self.name}^{q}-T{-p_shift}" if p_shift else f"{self.name}^{q}",
            params=dict(self.params, _power=q, _shift=-p_shift),
            chart=self.chart,
            kind=self.kind,
            kparams=self.kparams,
            repeat=self.repeat * q,
            x_offset=self.x_offset * q - p_shift,
            exactness=self.exactness,
            has_inverse=self.has_inverse,
            py_eval=self.py_eval,
            py_inv=self.py_inv,
        )
        return m

    def shifted_lift(self, k):
        """The alternative lift differing by the deck translation (k, 0)."""
        if k != int(k):
            raise BadParameter("lift shift must be an integer")
        m = LiftMap(
            name=f"{self.name}+({int(k)},0)",
            params=dict(self.params, _lift_shift=int(k)),
            chart=self.chart,
            kind=self.kind,
            kparams=self.kparams,
            repeat=self.repeat,
            x_offset=self.x_offset + k,
            exactness=self.exactness,
            has_inverse=self.has_inverse,
            py_eval=self.py_eval,
            py_inv=self.py_inv,
        )
        return m

    def spec_dict(self):
        """JSON-serialisable map specification {name, params, chart}."""
        params = {k: v for k, v in self.params.items() if not k.startswith("_")}
        d = {
            "name": self.name.split("^")[0].split("+(")[0],
            "params": params,
            "chart": {"kind": self.chart.kind, "margin": self.chart.margin},
        }
        if self.params.get("_power"):
            d["power"] = self.params["_power"]
        if self.params.get("_shift"):
            d["shift"] = self.params["_shift"]
        if self.params.get("_lift_shift"):
            d["lift_shift"] = self.params["_lift_shift"]
        return d


def iterate(m: LiftMap, p: LiftPoint, n: int) -> LiftPoint:
    """n-fold composition; n < 0 uses the inverse when available."""
    x, y = p.x, p.y
    lo, hi = m.chart.bounds()
    if n >= 0:
        if m.kind < 0:
            for i in range(n):
                x, y = m.evaluate_xy(x, y)
                if y < lo or y > hi:
                    raise FiberEscape(f"{m.name}: fiber escape", i + 1, (x, y))
            return LiftPoint(x, y)
        xo, yo, st = kernels.orbit_final(
            m.kind, m.kparams, m.repeat, m.x_offset, x, y, n, lo, hi
        )
    else:
        if not m.has_inverse:
            raise MissingInverse(f"{m.name} has no inverse")
        if m.kind < 0:
            for i in range(-n):
                x, y = m.inverse_xy(x, y)
                if y < lo or y > hi:
                    raise FiberEscape(f"{m.name}: fiber escape", i + 1, (x, y))
            return LiftPoint(x, y)
        xo, yo, st = kernels.inv_orbit_final(
            m.kind, m.kparams, m.repeat, m.x_offset, x, y, -n, lo, hi
        )
    if st == kernels.ESCAPED:
        raise FiberEscape(f"{m.name}: fiber escape during iterate", None, (xo, yo))
    if st == kernels.UNDEFINED:
        raise OutsideDomain(f"{m.name}: iterate left the domain")
    return LiftPoint(xo, yo)


@dataclass(frozen=True)
class EquivarianceReport:
    samples: int
    tol: float
    max_defect: float

    @property
    def passed(self):
        return self.max_defect <= self.tol


def check_equivariance(m: LiftMap, samples: int = 100, tol: float = None):
    """Max defect of f(x+1, y) - f(x, y) - (1, 0) over a deterministic grid."""
    if samples < 1:
        raise BadParameter("samples must be >= 1")
    if tol is None:
        tol = 1e-9 if m.exactness == "closed-form" else 1e-6
    g = max(2, int(math.ceil(math.sqrt(samples))))
    xs = np.linspace(0.0, 1.0, g, endpoint=False)
    ys = np.linspace(0.15, 0.85, g)
    X, Y = np.meshgrid(xs, ys)
    X = X.ravel()
    Y = Y.ravel()
    ax, ay, st0 = m.batch(X, Y)
    bx, by, st1 = m.batch(X + 1.0, Y)
    ok = (st0 != kernels.UNDEFINED) & (st1 != kernels.UNDEFINED)
    if not np.any(ok):
        raise OutsideDomain(f"{m.name}: no equivariance samples inside domain")
    defect = np.maximum(np.abs(bx - ax - 1.0), np.abs(by - ay))
    max_defect = float(np.max(defect[ok]))
    return EquivarianceReport(int(np.sum(ok)), tol, max_defect)


def orbit_csv(m: LiftMap, p: LiftPoint, n: int, path):
    """Dump the orbit as CSV columns (n, x, y)."""
    xs, ys = m.orbit(p.x, p.y, n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "x", "y"])
        for i in range(len(xs)):
            w.writerow([i, repr(float(xs[i])), repr(float(ys[i]))])
