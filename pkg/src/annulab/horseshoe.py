"""Piecewise-affine triple horseshoe on a chart rectangle.

Three vertical strips of a rectangle N map affinely onto three horizontal
bars of N, with deck translations -1, 0, +1: expansion 5x along the circle
direction, contraction 0.2x along the fiber.  The map is partial (defined on
the strips only); itineraries code orbits by strip index, realizing the full
three-shift, and cylinder rectangles realize any finite word.  Symbol j
moves the lift by j-1 per step, which is what drives the returning-disk
arithmetic.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .boxdyn import ReturningWitness, disk_self_disjoint, verify_returning
from .errors import BadParameter, ClaimFailed, OrbitLeavesN, OutsideDomain
from .geom import Rect
from .lifts import ChartSpec, LiftMap

TRANSLATIONS = (-1, 0, 1)


@dataclass(frozen=True)
class HorseshoeSpec:
    a0: float = 0.03
    a1: float = 0.12
    a2: float = 0.21
    delta: float = 0.06
    b0: float = 0.33
    b1: float = 0.46
    b2: float = 0.59
    eps: float = 0.08
    nx0: float = 0.0
    nx1: float = 0.3
    ny0: float = 0.3
    ny1: float = 0.7

    def __post_init__(self):
        strips = self.strips()
        bars = self.bars()
        if not (self.nx1 > self.nx0 and self.ny1 > self.ny0):
            raise BadParameter("degenerate rectangle")
        if self.delta <= 0 or self.eps <= 0:
            raise BadParameter("strip width and bar height must be positive")
        for lo, hi in strips:
            if lo < self.nx0 - 1e-15 or hi > self.nx1 + 1e-15:
                raise BadParameter("strip outside the rectangle")
        for lo, hi in bars:
            if lo < self.ny0 - 1e-15 or hi > self.ny1 + 1e-15:
                raise BadParameter("bar outside the rectangle")
        for (l1, h1), (l2, h2) in itertools.combinations(strips, 2):
            if l1 < h2 and l2 < h1:
                raise BadParameter("strips overlap")
        for (l1, h1), (l2, h2) in itertools.combinations(bars, 2):
            if l1 < h2 and l2 < h1:
                raise BadParameter("bars overlap")
        if self.x_slope() <= 1.0:
            raise BadParameter("branches must expand along the circle direction")
        if self.y_slope() >= 1.0:
            raise BadParameter("branches must contract along the fiber")

    def strips(self):
        return tuple((a, a + self.delta) for a in (self.a0, self.a1, self.a2))

    def bars(self):
        return tuple((b, b + self.eps) for b in (self.b0, self.b1, self.b2))

    def x_slope(self):
        return (self.nx1 - self.nx0) / self.delta

    def y_slope(self):
        return self.eps / (self.ny1 - self.ny0)

    def rect(self):
        return Rect(self.nx0, self.nx1, self.ny0, self.ny1)

    def params(self):
        return {
            "a0": self.a0, "a1": self.a1, "a2": self.a2, "delta": self.delta,
            "b0": self.b0, "b1": self.b1, "b2": self.b2, "eps": self.eps,
            "nx0": self.nx0, "nx1": self.nx1, "ny0": self.ny0, "ny1": self.ny1,
        }

    def kparams(self):
        return np.array([
            self.a0, self.a1, self.a2, self.delta,
            self.b0, self.b1, self.b2, self.eps,
            self.nx0, self.nx1, self.ny0, self.ny1,
        ])


def make_horseshoe(spec: HorseshoeSpec = None) -> LiftMap:
    """The horseshoe as a partial lift (defined on the three strips)."""
    spec = spec or HorseshoeSpec()
    return LiftMap(
        name="TH",
        params=spec.params(),
        chart=ChartSpec("open"),
        kind=kernels.HORSESHOE,
        kparams=spec.kparams(),
    )


def spec_of(m: LiftMap) -> HorseshoeSpec:
    return HorseshoeSpec(**{k: v for k, v in m.params.items() if not k.startswith("_")})


@dataclass(frozen=True)
class ItineraryWord:
    """Finite symbol word over {0,1,2}; anchor indexes the time-0 symbol."""

    symbols: tuple
    anchor: int = 0

    def __post_init__(self):
        if any(s not in (0, 1, 2) for s in self.symbols):
            raise BadParameter("symbols must be 0, 1 or 2")
        if not 0 <= self.anchor <= len(self.symbols):
            raise BadParameter("anchor outside the word")

    @property
    def future(self):
        return self.symbols[self.anchor:]

    @property
    def past(self):
        return self.symbols[: self.anchor]

    def net_translation(self):
        return sum(s - 1 for s in self.future)


@dataclass(frozen=True)
class CylinderBox:
    """Rectangle of points realizing a finite word: future symbols refine the
    circle direction, past symbols the fiber."""

    rect: Rect
    future: tuple
    past: tuple

    @property
    def depth(self):
        return (len(self.past), len(self.future))


def strip_index(spec: HorseshoeSpec, x):
    fx = x - math.floor(x)
    for j, (lo, hi) in enumerate(spec.strips()):
        if lo <= fx <= hi:
            return j
    return None


def itinerary(m: LiftMap, point, length) -> ItineraryWord:
    """Symbols visited by the first `length` steps of the orbit of an
    annulus point (theta, y)."""
    spec = spec_of(m)
    x, y = (point.theta, point.y) if hasattr(point, "theta") else (point[0], point[1])
    syms = []
    for i in range(length):
        j = strip_index(spec, x)
        if j is None or not spec.ny0 <= y <= spec.ny1:
            raise OrbitLeavesN(f"orbit leaves the strips at step {i}")
        syms.append(j)
        try:
            x, y = m.evaluate_xy(x, y)
        except OutsideDomain:
            raise OrbitLeavesN(f"orbit leaves the strips at step {i + 1}")
    return ItineraryWord(tuple(syms))


def cylinder_box(m: LiftMap, word, past=()) -> CylinderBox:
    """Rectangle realizing the future word (and optional past word).

    Always nonempty: the full shift realizes every finite word.  Verified by
    iterating the center point.
    """
    spec = spec_of(m)
    word = tuple(int(s) for s in word)
    past = tuple(int(s) for s in past)
    if any(s not in (0, 1, 2) for s in word + past):
        raise BadParameter("symbols must be 0, 1 or 2")
    offs = (spec.a0, spec.a1, spec.a2)
    bars = (spec.b0, spec.b1, spec.b2)
    sx = spec.x_slope()
    sy = spec.y_slope()
    x_lo, x_hi = spec.nx0, spec.nx1
    for s in reversed(word):
        x_lo, x_hi = offs[s] + (x_lo - spec.nx0) / sx, offs[s] + (x_hi - spec.nx0) / sx
    y_lo, y_hi = spec.ny0, spec.ny1
    for s in past:
        y_lo, y_hi = bars[s] + (y_lo - spec.ny0) * sy, bars[s] + (y_hi - spec.ny0) * sy
    box = CylinderBox(Rect(x_lo, x_hi, y_lo, y_hi), word, past)
    if word:
        cx, cy = box.rect.center
        got = itinerary(m, (cx, cy), len(word))
        if got.symbols != word:
            raise ClaimFailed("cylinder center fails to realize its word", (word, got.symbols))
    return box


def periodic_point(m: LiftMap, word):
    """The unique point whose itinerary repeats the word; its lift moves by
    the word's net translation per period (solved from the affine branches)."""
    spec = spec_of(m)
    word = tuple(int(s) for s in word)
    offs = (spec.a0, spec.a1, spec.a2)
    bars = (spec.b0, spec.b1, spec.b2)
    sx = spec.x_slope()
    sy = spec.y_slope()
    # the annulus orbit stays in [nx0, nx1], where each branch is affine;
    # deck translations accumulate separately into the net drift
    ax, bx = 1.0, 0.0
    ay, by = 1.0, 0.0
    for s in word:
        ax, bx = ax * sx, (bx - offs[s]) * sx + spec.nx0
        ay, by = ay * sy, bars[s] + (by - spec.ny0) * sy
    net = sum(s - 1 for s in word)
    x = bx / (1.0 - ax)
    y = by / (1.0 - ay)
    return x, y, net


def branch_fixed_point(m: LiftMap, j):
    """The fixed point of branch j (annulus fixed point with lift drift j-1)."""
    x, y, net = periodic_point(m, (j,))
    return x, y, net


@dataclass(frozen=True)
class HorseshoeClaims:
    base_disk: Rect
    negative: ReturningWitness
    positive: ReturningWitness
    min_positive_n: int
    words_enumerated: int
    small_disk: Rect
    small_disk_witness: ReturningWitness
    all_passed: bool

    def to_payload(self):
        return {
            "base_disk": self.base_disk.as_list(),
            "negative": self.negative.to_payload(),
            "positive": self.positive.to_payload(),
            "min_positive_n": self.min_positive_n,
            "words_enumerated": self.words_enumerated,
            "small_disk": self.small_disk.as_list(),
            "small_disk_witness": self.small_disk_witness.to_payload(),
            "all_passed": self.all_passed,
        }


def verify_example_claims(m: LiftMap) -> HorseshoeClaims:
    """Certify the returning behavior of the disk at the all-0 fixed point.

    U is the interior of H0 meet V0 (the all-0 fixed point's cylinder).  The
    checks: U returns negatively in one step with translation -1; it returns
    positively in five steps with translation +1 via the word 02220; no
    positive return exists in fewer than five steps (exhaustive enumeration:
    the first and last symbols are forced to 0, interior steps move at most
    +1); and the shrunken sub-disk still returns positively with n=7 via the
    word 0022220.
    """
    spec = spec_of(m)
    U = cylinder_box(m, (0,), past=(0,)).rect
    if not disk_self_disjoint(m, U):
        raise ClaimFailed("f(U) meets U", U)

    # one-step negative return at the all-0 fixed point
    x0, y0, net0 = branch_fixed_point(m, 0)
    ok, img = verify_returning(m, U, 1, -1, (x0, y0))
    if net0 != -1 or not ok:
        raise ClaimFailed("all-0 fixed point is not a one-step negative witness", (x0, y0))
    negative = ReturningWitness(U, 1, -1, (x0, y0), img, -1)

    # five-step positive return through the word 02220
    xp, yp, netp = periodic_point(m, (0, 2, 2, 2, 0))
    ok, img = verify_returning(m, U, 5, 1, (xp, yp))
    if netp != 1 or not ok:
        raise ClaimFailed("word 02220 failed to produce a five-step positive witness", (xp, yp))
    if itinerary(m, (xp - math.floor(xp), yp), 5).symbols != (0, 2, 2, 2, 0):
        raise ClaimFailed("positive witness itinerary mismatch", (xp, yp))
    positive = ReturningWitness(U, 5, 1, (xp, yp), img, 1)

    # exhaustive minimality: any orbit from U back to a translate of U has
    # first and last symbol 0, so its net translation is at most n - 4
    words = 0
    for n in range(1, 5):
        for word in itertools.product((0, 1, 2), repeat=n):
            if word[0] != 0 or word[-1] != 0:
                continue
            words += 1
            if sum(s - 1 for s in word) > 0:
                raise ClaimFailed("found a positive word shorter than five steps", word)
    # and at n = 5 the bound n - 4 is attained
    best5 = max(
        sum(s - 1 for s in w)
        for w in itertools.product((0, 1, 2), repeat=5)
        if w[0] == 0 and w[-1] == 0
    )
    if best5 != 1:
        raise ClaimFailed("five-step words fail to attain net translation +1", best5)

    # shrunken disk: deeper cylinder around the same fixed point, word 0022220
    W = cylinder_box(m, (0, 0), past=(0,)).rect
    xw, yw, netw = periodic_point(m, (0, 0, 2, 2, 2, 2, 0))
    ok, imgw = verify_returning(m, W, 7, 1, (xw, yw))
    if netw != 1 or not ok:
        raise ClaimFailed("word 0022220 failed on the shrunken disk", (xw, yw))
    if not disk_self_disjoint(m, W):
        raise ClaimFailed("f(W) meets W", W)
    small = ReturningWitness(W, 7, 1, (xw, yw), imgw, 1)

    return HorseshoeClaims(
        base_disk=U,
        negative=negative,
        positive=positive,
        min_positive_n=5,
        words_enumerated=words,
        small_disk=W,
        small_disk_witness=small,
        all_passed=True,
    )


def shift_conjugacy_check(m: LiftMap, depth, samples_beyond=200, seed=0):
    """Defect count for the symbolic coding up to the given word length.

    All words of length <= min(depth, 6) are enumerated (3^L each); longer
    lengths are sampled.  For each word the cylinder center must realize it,
    and the coding must intertwine the map with the symbol shift.
    """
    if depth > 12:
        raise BadParameter("depth must be <= 12")
    rng = np.random.default_rng(seed)
    defects = 0
    for L in range(1, depth + 1):
        if L <= 6:
            words = list(itertools.product((0, 1, 2), repeat=L))
        else:
            words = [tuple(int(v) for v in rng.integers(0, 3, size=L))
                     for _ in range(samples_beyond)]
        for word in words:
            try:
                box = cylinder_box(m, word)
            except ClaimFailed:
                defects += 1
                continue
            cx, cy = box.rect.center
            if L >= 2:
                fx, fy = m.evaluate_xy(cx, cy)
                got = itinerary(m, (fx - math.floor(fx), fy), L - 1)
                if got.symbols != word[1:]:
                    defects += 1
    return defects
