"""Set-oriented engine over a dyadic box cover of a fundamental domain.

Boxes live on the absolute dyadic grid at resolution 2^-d: columns index the
circle direction (wrapping mod 2^d), rows index the fiber.  The directed box
graph carries integer deck-translation labels: an edge (B, B', k) means the
sampled, inflated image of B meets B' shifted k turns.  Image enclosures are
sampled (corner/center grids plus an inflation radius), not rigorous, so all
positive findings are re-verified by direct iteration of witness points and
negative findings are resolution-qualified.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import (
    LinkVerificationFailed,
    NotFoundAtResolution,
    PreconditionFailed,
)
from .geom import Rect, dyadic_rect, point_rect_distance
from .lifts import AnnulusPoint, LiftMap, LiftPoint, iterate


def default_inflation(d):
    """Half of one box diagonal."""
    return 0.5 * math.sqrt(2.0) / (1 << d)


def _band_rows(band, d):
    s = 1 << d
    r_lo = int(math.floor(band[0] * s + 1e-12))
    r_hi = int(math.ceil(band[1] * s - 1e-12))
    if r_hi <= r_lo:
        raise PreconditionFailed("empty row band")
    return r_lo, r_hi


@dataclass(frozen=True)
class BoxSet:
    """A set of dyadic boxes (col, row) at resolution 2^-d within a row band."""

    d: int
    r_lo: int
    r_hi: int
    boxes: frozenset

    @property
    def size(self):
        return 1.0 / (1 << self.d)

    def __len__(self):
        return len(self.boxes)

    def __contains__(self, box):
        return box in self.boxes

    def sorted_boxes(self):
        return sorted(self.boxes)

    def rect_of(self, box):
        return dyadic_rect(self.d, box[0], box[1])

    def union(self, other):
        self._compat(other)
        return BoxSet(self.d, min(self.r_lo, other.r_lo), max(self.r_hi, other.r_hi),
                      self.boxes | other.boxes)

    def intersection(self, other):
        self._compat(other)
        return BoxSet(self.d, self.r_lo, self.r_hi, self.boxes & other.boxes)

    def _compat(self, other):
        if self.d != other.d:
            raise PreconditionFailed("box sets at different resolutions")

    def geometric_overlaps(self, rect: Rect):
        """Boxes whose rectangle meets the given rect (x taken mod 1)."""
        out = []
        for box in self.sorted_boxes():
            r = self.rect_of(box)
            for k in (-1, 0, 1):
                if r.translate(k).intersects(rect):
                    out.append(box)
                    break
        return out

    def connected(self):
        """One component under 4-adjacency with x wraparound?"""
        if not self.boxes:
            return False
        s = 1 << self.d
        seen = set()
        start = next(iter(sorted(self.boxes)))
        q = deque([start])
        seen.add(start)
        while q:
            c, r = q.popleft()
            for nc, nr in (((c + 1) % s, r), ((c - 1) % s, r), (c, r + 1), (c, r - 1)):
                nb = (nc, nr)
                if nb in self.boxes and nb not in seen:
                    seen.add(nb)
                    q.append(nb)
        return len(seen) == len(self.boxes)

    def separates(self):
        """Does removing these boxes disconnect the bottom row of the band
        from the top row?  Flood-fills the complement under 4-adjacency with
        x wraparound."""
        s = 1 << self.d
        bottom = [(c, self.r_lo) for c in range(s) if (c, self.r_lo) not in self.boxes]
        seen = set(bottom)
        q = deque(bottom)
        while q:
            c, r = q.popleft()
            if r == self.r_hi - 1:
                return False
            for nc, nr in (((c + 1) % s, r), ((c - 1) % s, r), (c, r + 1), (c, r - 1)):
                if not (self.r_lo <= nr < self.r_hi):
                    continue
                nb = (nc, nr)
                if nb in self.boxes or nb in seen:
                    continue
                seen.add(nb)
                q.append(nb)
        return True

    def bandify(self):
        """Fill every column to its min..max row run; None if a column is empty."""
        s = 1 << self.d
        cols = {}
        for c, r in self.boxes:
            lo, hi = cols.get(c, (r, r))
            cols[c] = (min(lo, r), max(hi, r))
        if len(cols) < s:
            return None
        filled = set()
        for c, (lo, hi) in cols.items():
            for r in range(lo, hi + 1):
                filled.add((c, r))
        return BoxSet(self.d, self.r_lo, self.r_hi, frozenset(filled))

    def to_json(self):
        return {
            "d": self.d,
            "region": [self.r_lo, self.r_hi],
            "indices": [list(b) for b in self.sorted_boxes()],
        }

    @staticmethod
    def from_json(obj):
        return BoxSet(
            int(obj["d"]),
            int(obj["region"][0]),
            int(obj["region"][1]),
            frozenset((int(a), int(b)) for a, b in obj["indices"]),
        )


def boxset_from_band(d, band):
    """All boxes of the dyadic rows covering the band."""
    r_lo, r_hi = _band_rows(band, d)
    s = 1 << d
    return BoxSet(d, r_lo, r_hi, frozenset((c, r) for r in range(r_lo, r_hi) for c in range(s)))


def box_of_point(d, x, y):
    s = 1 << d
    return (int(math.floor((x - math.floor(x)) * s)) % s, int(math.floor(y * s)))


def _sample_boxes(m: LiftMap, boxes, d, g):
    """Sampled images of the g x g grids of the given boxes.

    Returns (fx, fy, status) with shape (len(boxes), g*g).
    """
    s = 1 << d
    bs = 1.0 / s
    cols = np.array([b[0] for b in boxes], dtype=float)
    rows = np.array([b[1] for b in boxes], dtype=float)
    offs = np.linspace(0.0, 1.0, g)
    ox, oy = np.meshgrid(offs, offs)
    ox = ox.ravel()
    oy = oy.ravel()
    X = (cols[:, None] + ox[None, :]) * bs
    Y = (rows[:, None] + oy[None, :]) * bs
    fx, fy, st = m.batch(X.ravel(), Y.ravel())
    n = len(boxes)
    return fx.reshape(n, -1), fy.reshape(n, -1), st.reshape(n, -1)


def _cover_arrays(fx, fy, st, d, rho, r_lo, r_hi):
    """Inflated-cover global column/row ranges for each valid sample."""
    s = 1 << d
    valid = st == kernels.OK
    gx_lo = np.floor((fx - rho) * s).astype(np.int64)
    gx_hi = np.floor((fx + rho) * s).astype(np.int64)
    gy_lo = np.floor((fy - rho) * s).astype(np.int64)
    gy_hi = np.floor((fy + rho) * s).astype(np.int64)
    point_row = np.floor(fy * s).astype(np.int64)
    in_band = (point_row >= r_lo) & (point_row < r_hi)
    return valid, in_band, gx_lo, gx_hi, gy_lo, gy_hi


def _emit_edges(boxes, fx, fy, st, d, rho, r_lo, r_hi, kmax, n_nodes):
    """Vectorised edge emission; returns (src, dst, k, exit_nodes)."""
    s = 1 << d
    valid, in_band, gx_lo, gx_hi, gy_lo, gy_hi = _cover_arrays(fx, fy, st, d, rho, r_lo, r_hi)
    src_ids = np.broadcast_to(
        np.arange(len(boxes), dtype=np.int64)[:, None], fx.shape
    )
    exit_mask = (valid & ~in_band) | (st == kernels.ESCAPED)
    exits = set(int(i) for i in np.unique(src_ids[exit_mask]))
    emit = valid & in_band
    nk = 2 * kmax + 1
    keys = []
    if np.any(emit):
        for dc in range(int(np.max(gx_hi - gx_lo)) + 1):
            gc = gx_lo + dc
            okc = emit & (gc <= gx_hi)
            for dr in range(int(np.max(gy_hi - gy_lo)) + 1):
                gr = gy_lo + dr
                ok = okc & (gr <= gy_hi) & (gr >= r_lo) & (gr < r_hi)
                if not np.any(ok):
                    continue
                gcv = gc[ok]
                grv = gr[ok]
                sv = src_ids[ok]
                kv = np.floor_divide(gcv, s)
                keep = np.abs(kv) <= kmax
                gcv, grv, sv, kv = gcv[keep], grv[keep], sv[keep], kv[keep]
                col = gcv - kv * s
                dst = (grv - r_lo) * s + col
                keys.append((sv * n_nodes + dst) * nk + (kv + kmax))
    if keys:
        allkeys = np.unique(np.concatenate(keys))
        kk = allkeys % nk - kmax
        rest = allkeys // nk
        return rest // n_nodes, rest % n_nodes, kk, exits
    z = np.zeros(0, dtype=np.int64)
    return z, z.copy(), z.copy(), exits


@dataclass
class BoxGraph:
    """Translation-labeled directed graph over the boxes of a row band."""

    m: LiftMap
    d: int
    band: tuple
    inflation: float
    samples: int
    kmax: int
    r_lo: int = 0
    r_hi: int = 0
    edges_src: np.ndarray = None
    edges_dst: np.ndarray = None
    edges_k: np.ndarray = None
    exits: set = field(default_factory=set)

    @property
    def cols(self):
        return 1 << self.d

    @property
    def n_rows(self):
        return self.r_hi - self.r_lo

    @property
    def n_nodes(self):
        return self.cols * self.n_rows

    def node_id(self, box):
        return (box[1] - self.r_lo) * self.cols + box[0]

    def box_of(self, node):
        return (node % self.cols, node // self.cols + self.r_lo)

    def rect_of(self, box):
        return dyadic_rect(self.d, box[0], box[1])

    def all_boxes(self):
        return [(c, r) for c in range(self.cols) for r in range(self.r_lo, self.r_hi)]

    def out_degree_min(self):
        if len(self.edges_src) == 0:
            return 0
        deg = np.bincount(self.edges_src, minlength=self.n_nodes)
        return int(np.min(deg))

    def has_edge(self, src_box, dst_box, k):
        a = self.node_id(src_box)
        b = self.node_id(dst_box)
        mask = (self.edges_src == a) & (self.edges_dst == b) & (self.edges_k == k)
        return bool(np.any(mask))

    def labels(self):
        return sorted(set(int(k) for k in self.edges_k))

    def adjacency(self):
        adj = {}
        for s, t, k in zip(self.edges_src, self.edges_dst, self.edges_k):
            adj.setdefault(int(s), []).append((int(t), int(k)))
        for v in adj.values():
            v.sort()
        return adj

    def reverse_adjacency(self):
        adj = {}
        for s, t, k in zip(self.edges_src, self.edges_dst, self.edges_k):
            adj.setdefault(int(t), []).append((int(s), int(k)))
        for v in adj.values():
            v.sort()
        return adj

    def covers(self):
        """Per-box image cover (translation ignored): box -> set of boxes."""
        out = {}
        for s, t in zip(self.edges_src, self.edges_dst):
            out.setdefault(int(s), set()).add(int(t))
        return out


def build_box_graph(m: LiftMap, band, d, inflation=None, samples_per_box=3, kmax=8):
    """Sampled, inflated image graph of the band boxes under the lift."""
    rho = default_inflation(d) if inflation is None else inflation
    r_lo, r_hi = _band_rows(band, d)
    g = BoxGraph(m=m, d=d, band=tuple(band), inflation=rho, samples=samples_per_box,
                 kmax=kmax, r_lo=r_lo, r_hi=r_hi)
    boxes = [(c, r) for r in range(r_lo, r_hi) for c in range(g.cols)]
    fx, fy, st = _sample_boxes(m, boxes, d, samples_per_box)
    # boxes above are listed in node order, so sample index == node id
    src, dst, kk, exits = _emit_edges(boxes, fx, fy, st, d, rho, r_lo, r_hi, kmax, g.n_nodes)
    g.edges_src, g.edges_dst, g.edges_k = src, dst, kk
    g.exits = exits
    return g


def chain_recurrent_boxes(g: BoxGraph) -> BoxSet:
    """Union of nontrivial strongly connected components, translations ignored.

    Over-approximates the chain-recurrent set (hence the nonwandering set) at
    this resolution; the approximation shrinks under refinement.
    """
    n = g.n_nodes
    data = np.ones(len(g.edges_src), dtype=np.int8)
    adj = csr_matrix((data, (g.edges_src, g.edges_dst)), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=ncomp)
    selfloop = set(int(s) for s, t in zip(g.edges_src, g.edges_dst) if s == t)
    keep = set()
    for node in range(n):
        if sizes[labels[node]] >= 2 or node in selfloop:
            keep.add(g.box_of(node))
    return BoxSet(g.d, g.r_lo, g.r_hi, frozenset(keep))


@dataclass(frozen=True)
class WindowReport:
    boxes: BoxSet
    verified: bool
    margin: float
    counterexample: object = None
    stabilized: bool = None
    rounds: int = None
    unbounded: bool = False
    connected: bool = None
    separates: bool = None


@dataclass(frozen=True)
class AttractorReport:
    boxes: BoxSet
    depth: int
    connected: bool
    separates: bool
    contained_in_window: bool
    forward_invariant: bool


def _complement_distance(W: BoxSet, x, y, cap):
    """Exact distance from a point to the complement of the box union."""
    s = 1 << W.d
    bs = 1.0 / s
    xf = x - math.floor(x)
    c0 = int(math.floor(xf * s))
    r0 = int(math.floor(y * s))
    best = cap
    max_l = int(cap / bs) + 2
    for level in range(max_l + 1):
        if (level - 1) * bs > best:
            break
        for dc in range(-level, level + 1):
            for dr in range(-level, level + 1):
                if max(abs(dc), abs(dr)) != level:
                    continue
                c = (c0 + dc) % s
                r = r0 + dr
                if (c, r) in W.boxes:
                    continue
                rect = dyadic_rect(W.d, c0 + dc, r)
                dist = point_rect_distance(xf, y, rect)
                if dist < best:
                    best = dist
    return best


def verify_window(m: LiftMap, W: BoxSet, samples_per_box=3, inflation=None) -> WindowReport:
    """Check that the inflated image of every box lands in the window interior."""
    if not W.boxes:
        raise PreconditionFailed("empty window")
    d = W.d
    s = 1 << d
    bs = 1.0 / s
    rho = default_inflation(d) if inflation is None else inflation
    boxes = W.sorted_boxes()
    fx, fy, st = _sample_boxes(m, boxes, d, samples_per_box)

    rows = sorted(set(r for _, r in W.boxes))
    row_lo, row_hi = rows[0], rows[-1] + 1
    mask = np.zeros((row_hi - row_lo, s), dtype=bool)
    for c, r in W.boxes:
        mask[r - row_lo, c] = True

    valid = st == kernels.OK
    if not np.all(valid):
        bad = np.argwhere(~valid)[0]
        return WindowReport(W, False, -math.inf,
                            counterexample=(boxes[int(bad[0])], "image escaped or undefined"),
                            connected=W.connected(), separates=W.separates())

    gx_lo = np.floor((fx - rho) * s).astype(np.int64)
    gx_hi = np.floor((fx + rho) * s).astype(np.int64)
    gy_lo = np.floor((fy - rho) * s).astype(np.int64)
    gy_hi = np.floor((fy + rho) * s).astype(np.int64)
    covered = np.ones(fx.shape, dtype=bool)
    for dc in range(int(np.max(gx_hi - gx_lo)) + 1):
        gc = gx_lo + dc
        okc = gc <= gx_hi
        for dr in range(int(np.max(gy_hi - gy_lo)) + 1):
            gr = gy_lo + dr
            ok = okc & (gr <= gy_hi)
            inr = (gr >= row_lo) & (gr < row_hi)
            col = np.mod(gc, s)
            hit = np.zeros(fx.shape, dtype=bool)
            sel = ok & inr
            hit[sel] = mask[gr[sel] - row_lo, col[sel]]
            covered &= np.where(ok, hit, True)
    ok_all = bool(np.all(covered))

    counterexample = None
    if not ok_all:
        i, j = np.argwhere(~covered)[0]
        counterexample = (boxes[int(i)], (float(fx[i, j]), float(fy[i, j])))

    # margin: distance of image points to the window complement, minus rho.
    # The complement splits into the half-planes beyond the row span and the
    # hole boxes inside it; the latter get an exact ring search confined by
    # an edt pre-pass.
    vert = float(np.min(np.minimum(fy - row_lo * bs, row_hi * bs - fy)))
    margin = vert
    has_holes = not bool(np.all(mask))
    if has_holes:
        pad = np.zeros((mask.shape[0] + 2, mask.shape[1]), dtype=bool)
        pad[1:-1, :] = mask
        tiled = np.concatenate([pad, pad, pad], axis=1)
        edt = distance_transform_edt(tiled)[:, s:2 * s]
        prow = np.clip(np.floor(fy * s).astype(np.int64) - row_lo + 1, 0, pad.shape[0] - 1)
        pcol = np.mod(np.floor(fx * s).astype(np.int64), s)
        approx = edt[prow, pcol]
        cutoff = min(float(np.min(approx)) + 3.0, margin / bs + 2.0)
        idx = np.argwhere(approx <= cutoff)
        for i, j in idx:
            dist = _complement_distance(W, float(fx[i, j]), float(fy[i, j]),
                                        cap=margin + bs)
            if dist < margin:
                margin = dist
    margin -= rho
    verified = ok_all and margin > 0.0
    return WindowReport(W, verified, margin, counterexample=counterexample,
                        connected=W.connected(), separates=W.separates())


def _image_cover(m, boxes, d, rho, g, r_lo, r_hi):
    """Covered annulus boxes of the inflated sampled images; flags band exit."""
    fx, fy, st = _sample_boxes(m, boxes, d, g)
    src, dst, kk, exits = _emit_edges(boxes, fx, fy, st, d, rho, r_lo, r_hi,
                                      kmax=64, n_nodes=len(boxes) * 1 + (1 << d) * (r_hi - r_lo))
    s = 1 << d
    cover = set()
    for t in dst:
        t = int(t)
        cover.add((t % s, t // s + r_lo))
    valid = st == kernels.OK
    point_row = np.floor(fy * s).astype(np.int64)
    out_of_band = bool(np.any((st == kernels.ESCAPED)
                              | (valid & ((point_row < r_lo) | (point_row >= r_hi)))))
    # inflated covers that poke past the band rows also count as hitting the bound
    gy_lo = np.floor((fy - rho) * s).astype(np.int64)
    gy_hi = np.floor((fy + rho) * s).astype(np.int64)
    out_of_band |= bool(np.any(valid & ((gy_lo < r_lo) | (gy_hi >= r_hi))))
    return cover, out_of_band


def grow_window(m: LiftMap, seed: BoxSet, region_band=(0.0625, 0.9375), max_rounds=100,
                samples_per_box=3, inflation=None) -> WindowReport:
    """Union image boxes until stable, then verify; Unbounded-at-scale when
    the region bound is hit first."""
    d = seed.d
    rho = default_inflation(d) if inflation is None else inflation
    r_lo, r_hi = _band_rows(region_band, d)
    W = set(seed.boxes)
    frontier = sorted(W)
    rounds = 0
    while frontier:
        if rounds >= max_rounds:
            part = BoxSet(d, r_lo, r_hi, frozenset(W))
            return WindowReport(part, False, -math.inf, stabilized=False, rounds=rounds)
        cover, out = _image_cover(m, frontier, d, rho, samples_per_box, r_lo, r_hi)
        if out:
            part = BoxSet(d, r_lo, r_hi, frozenset(W))
            return WindowReport(part, False, -math.inf, stabilized=False,
                                rounds=rounds, unbounded=True)
        new = cover - W
        W |= new
        frontier = sorted(new)
        rounds += 1
    boxset = BoxSet(d, r_lo, r_hi, frozenset(W))
    rep = verify_window(m, boxset, samples_per_box, rho)
    return WindowReport(boxset, rep.verified, rep.margin, counterexample=rep.counterexample,
                        stabilized=True, rounds=rounds, connected=rep.connected,
                        separates=rep.separates)


def attractor_boxes(m: LiftMap, W: BoxSet, depth, samples_per_box=3, inflation=None,
                    check_window=True) -> AttractorReport:
    """Intersect iterated image covers of a verified window."""
    d = W.d
    rho = default_inflation(d) if inflation is None else inflation
    if check_window:
        rep = verify_window(m, W, samples_per_box, rho)
        if not rep.verified:
            raise PreconditionFailed("attractor_boxes needs a verified window")
    bs = 1.0 / (1 << d)
    band = (W.r_lo * bs, W.r_hi * bs)
    g = build_box_graph(m, band, d, rho, samples_per_box, kmax=8)
    cov = g.covers()
    wset = set(W.boxes)
    A = set(W.boxes)
    for _ in range(depth):
        img = set()
        for b in sorted(A):
            img |= {g.box_of(t) for t in cov.get(g.node_id(b), ())}
        nxt = img & A
        if nxt == A:
            break
        A = nxt
    final = BoxSet(d, W.r_lo, W.r_hi, frozenset(A))
    img = set()
    for b in sorted(A):
        img |= {g.box_of(t) for t in cov.get(g.node_id(b), ())}
    return AttractorReport(
        boxes=final,
        depth=depth,
        connected=final.connected(),
        separates=final.separates(),
        contained_in_window=A <= wset,
        forward_invariant=img <= A,
    )


def construct_invariant_annulus(m: LiftMap, W: BoxSet = None, d=6,
                                region_band=(0.0625, 0.9375), max_rounds=100,
                                samples_per_box=3, inflation=None) -> WindowReport:
    """A box band mapped strictly inside itself with both collars nonempty."""
    if W is None:
        seed = boxset_from_band(d, (0.45, 0.55))
        grown = grow_window(m, seed, region_band, max_rounds, samples_per_box, inflation)
        if grown.unbounded or not grown.stabilized or not grown.verified:
            raise NotFoundAtResolution(
                "no window found at this resolution (map may be unbounded at scale)"
            )
        W = grown.boxes
    band = W.bandify()
    if band is None:
        raise NotFoundAtResolution("window does not cover every column")
    reg_lo, reg_hi = _band_rows(region_band, d)
    rows = [r for _, r in band.boxes]
    if min(rows) <= reg_lo or max(rows) >= reg_hi - 1:
        raise NotFoundAtResolution("no collar left between the band and the region bound")
    band = BoxSet(d, reg_lo, reg_hi, band.boxes)
    rep = verify_window(m, band, samples_per_box, inflation)
    if not rep.verified:
        raise NotFoundAtResolution("band image is not strictly inside the band")
    return WindowReport(band, True, rep.margin, stabilized=True,
                        connected=rep.connected, separates=rep.separates)


@dataclass(frozen=True)
class ReturningWitness:
    """Certificate for a disk returning to an integer translate of itself.

    U is the disk (a rectangle in lift coordinates); the witness pair z,
    z_image satisfies z in U and f^n(z) in U + k, re-verified by direct
    iteration.  f(U) must miss U (checked at sample level).
    """

    U: Rect
    n: int
    k: int
    z: tuple
    z_image: tuple
    sign: int
    d: int = None

    def to_payload(self):
        return {
            "U": self.U.as_list(),
            "n": self.n,
            "k": self.k,
            "z": list(self.z),
            "z_image": list(self.z_image),
            "sign": self.sign,
            "d": self.d,
        }


def disk_self_disjoint(m: LiftMap, U: Rect, g=12):
    """Sampled check that f(U) does not meet U (in the lift)."""
    xs, ys = U.sample_grid(g)
    fx, fy, st = m.batch(xs, ys)
    ok = st == kernels.OK
    inside = (fx >= U.x0) & (fx <= U.x1) & (fy >= U.y0) & (fy <= U.y1)
    return not bool(np.any(inside & ok))


def batch_final(m: LiftMap, xs, ys, n):
    """n-step batched forward iteration honoring the chart bounds."""
    lo, hi = m.chart.bounds()
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if m.kind < 0:
        fx = xs.copy()
        fy = ys.copy()
        st = np.zeros(fx.shape, dtype=np.int64)
        for _ in range(n):
            fx2, fy2, s2 = m.batch(fx, fy)
            ok = st == kernels.OK
            fx = np.where(ok, fx2, fx)
            fy = np.where(ok, fy2, fy)
            st = np.where(ok, s2, st)
        return fx, fy, st
    return kernels.batch_final(m.kind, m.kparams, m.repeat, m.x_offset, xs, ys, n, lo, hi)


def verify_returning(m: LiftMap, U: Rect, n, k, z):
    """Recheck a witness point by direct iteration; returns (ok, image)."""
    x, y = z
    if not U.contains_interior(x, y):
        return False, None
    try:
        zn = iterate(m, LiftPoint(x, y), n)
    except Exception:
        return False, None
    tgt = U.translate(k)
    if not tgt.contains_interior(zn.x, zn.y):
        return False, None
    return True, (zn.x, zn.y)


def _witness_grid_search(m, region: Rect, n, target: Rect, g=21):
    xs, ys = region.sample_grid(g)
    fx, fy, st = batch_final(m, xs, ys, n)
    ok = (st == kernels.OK) & (fx > target.x0) & (fx < target.x1) \
        & (fy > target.y0) & (fy < target.y1) \
        & (xs > region.x0) & (xs < region.x1) & (ys > region.y0) & (ys < region.y1)
    idx = np.nonzero(ok)[0]
    if idx.size:
        i = int(idx[0])
        return (float(xs[i]), float(ys[i]))
    return None


class _StateSet:
    """Membership-with-slack for a set of (box, translation) corridor states."""

    def __init__(self, g: BoxGraph, states, rho):
        self.g = g
        self.rho = rho
        self.keys = set()
        for node, kk in states:
            c, r = g.box_of(node)
            self.keys.add((c, r, kk - g.kmax))

    def contains(self, x, y):
        g = self.g
        s = g.cols
        j0 = int(math.floor(x))
        fr = x - j0
        c0 = int(math.floor(fr * s))
        r0 = int(math.floor(y * s))
        for dc in (-1, 0, 1):
            cc = c0 + dc
            j = j0 + (cc // s)
            col = cc % s
            for dr in (-1, 0, 1):
                key = (col, r0 + dr, j)
                if key in self.keys:
                    rect = dyadic_rect(g.d, cc, r0 + dr).translate(j0)
                    if rect.contains(x, y, slack=self.rho):
                        return True
        return False


def _witness_beam_search(m, region: Rect, corridor, target: Rect, beam_width=24,
                         max_depth=60):
    """Quadtree beam over the start region scored by corridor following.

    corridor lists the admissible state sets at steps 1..n; cells following
    the corridor longer win, ties break on the final distance to the target
    rect.
    """
    n = len(corridor)

    def score(x, y):
        steps = 0
        cx, cy = x, y
        for i in range(n):
            try:
                cx, cy = m.evaluate_xy(cx, cy)
            except Exception:
                return steps, math.inf
            if not corridor[i].contains(cx, cy):
                return steps, point_rect_distance(cx, cy, target)
            steps += 1
        return steps, point_rect_distance(cx, cy, target)

    beam = [region]
    for _ in range(max_depth):
        scored = []
        for cell in beam:
            for sub in cell.split4():
                x, y = sub.center
                st, dist = score(x, y)
                scored.append((-st, dist, sub.x0, sub.y0, sub, (x, y)))
        scored.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
        best = scored[0]
        if -best[0] == n and best[1] == 0.0:
            x, y = best[5]
            if region.contains_interior(x, y):
                return (x, y)
        beam = [t[4] for t in scored[:beam_width]]
        if beam[0].width < 1e-13 and beam[0].height < 1e-13:
            break
    return None


def _advance_layer(adj, layer, nk):
    nxt = set()
    for node, kk in layer:
        for dst, kv in adj.get(node, ()):
            kk2 = kk + kv
            if 0 <= kk2 < nk:
                nxt.add((dst, kk2))
    return nxt


def _backward_corridor(radj, layers, target_state, nk):
    """Intersect backward reachability from the target with the forward
    layers; None when the corridor pinches off."""
    n = len(layers) - 1
    if target_state not in layers[n]:
        return None
    C = [None] * (n + 1)
    C[n] = {target_state}
    for i in range(n - 1, -1, -1):
        prev = set()
        for node, kk in C[i + 1]:
            for src, kv in radj.get(node, ()):
                kk0 = kk - kv
                if 0 <= kk0 < nk:
                    prev.add((src, kk0))
        C[i] = prev & layers[i]
        if not C[i]:
            return None
    return C


def _search_base(g: BoxGraph, adj, radj, base_rect, base_nodes, sign, horizon,
                 state_budget=500000, candidate_budget=40):
    """Witness search with U pinned to base_rect.

    Forward layers are exact reachable-at-step-n state sets, so longer true
    returns are not shadowed by shorter spurious graph paths.
    """
    m = g.m
    nk = 2 * g.kmax + 1
    if not disk_self_disjoint(m, base_rect):
        return None
    base_set = set(base_nodes)
    layers = [{(node, g.kmax) for node in base_nodes}]
    states_seen = len(layers[0])
    tried_nk = set()
    tried = 0
    for n in range(1, horizon + 1):
        layer = _advance_layer(adj, layers[-1], nk)
        layers.append(layer)
        states_seen += len(layer)
        if not layer:
            break
        hits = sorted(
            (abs(kk - g.kmax), node, kk)
            for node, kk in layer
            if node in base_set and kk != g.kmax and ((kk > g.kmax) == (sign > 0))
        )
        for _, node, kk in hits:
            k = kk - g.kmax
            if (n, k) not in tried_nk:
                tried_nk.add((n, k))
                z = _witness_grid_search(m, base_rect, n, base_rect.translate(k))
                if z is not None:
                    ok, img = verify_returning(m, base_rect, n, k, z)
                    if ok:
                        return ReturningWitness(U=base_rect, n=n, k=k, z=z, z_image=img,
                                                sign=sign, d=g.d)
            corridor_states = _backward_corridor(radj, layers, (node, kk), nk)
            tried += 1
            if corridor_states is not None:
                corridor = [_StateSet(g, cs, g.inflation) for cs in corridor_states[1:]]
                region = base_rect
                if len(corridor_states[0]) == 1:
                    (node0, _kk0) = next(iter(corridor_states[0]))
                    sb = g.rect_of(g.box_of(node0))
                    sx0, sx1 = max(region.x0, sb.x0), min(region.x1, sb.x1)
                    sy0, sy1 = max(region.y0, sb.y0), min(region.y1, sb.y1)
                    if sx1 > sx0 and sy1 > sy0:
                        region = Rect(sx0, sx1, sy0, sy1)
                z = _witness_beam_search(m, region, corridor, base_rect.translate(k))
                if z is not None:
                    ok, img = verify_returning(m, base_rect, n, k, z)
                    if ok:
                        return ReturningWitness(U=base_rect, n=n, k=k, z=z, z_image=img,
                                                sign=sign, d=g.d)
            if tried >= candidate_budget:
                return None
        if states_seen > state_budget:
            return None
    return None


def find_returning_disk(g: BoxGraph, sign, horizon=64, base: Rect = None):
    """Search the box graph for a returning disk of the requested sign.

    With `base` given, only that disk is considered: the search looks for
    orbits from the disk back to the disk shifted by k of the right sign.
    Without it, candidate boxes are scanned in lexicographic (column, row)
    order; only chain-recurrent boxes can return, so the scan is restricted
    to them.  Every hit is re-verified by direct iteration of a witness
    point; None means not found at this horizon and resolution.
    """
    if sign not in (1, -1):
        raise PreconditionFailed("sign must be +1 or -1")
    if len(g.edges_k) == 0 or not np.any(np.sign(g.edges_k) == sign):
        return None
    adj = g.adjacency()
    radj = g.reverse_adjacency()

    if base is not None:
        base_nodes = []
        for r in range(g.r_lo, g.r_hi):
            for c in range(g.cols):
                if g.rect_of((c, r)).intersects(base):
                    base_nodes.append(g.node_id((c, r)))
        if not base_nodes:
            raise PreconditionFailed("base rect misses the graph band")
        return _search_base(g, adj, radj, base, base_nodes, sign, horizon)

    recurrent = chain_recurrent_boxes(g)
    k0_self = set(
        int(s) for s, t, k in zip(g.edges_src, g.edges_dst, g.edges_k)
        if s == t and k == 0
    )
    for box in recurrent.sorted_boxes():
        node = g.node_id(box)
        if node in k0_self:
            continue
        w = _search_base(g, adj, radj, g.rect_of(box), [node], sign, horizon,
                         state_budget=120000, candidate_budget=10)
        if w is not None:
            return w
    return None


@dataclass(frozen=True)
class DiskChain:
    """Chain of pairwise equal-or-disjoint disks linked by forward iterates."""

    disks: tuple          # rects in lift coordinates; first == last when periodic
    exponents: tuple      # m_i linking disk i to disk i+1
    witnesses: tuple      # one (x, y) per link, in disk i, mapping into disk i+1
    witness_images: tuple  # the m_i-step image of each witness, pinned for replay
    periodic: bool
    base: Rect
    k_pos: int
    n_pos: int
    k_neg: int
    n_neg: int

    def to_payload(self):
        return {
            "disks": [d.as_list() for d in self.disks],
            "exponents": list(self.exponents),
            "witnesses": [list(w) for w in self.witnesses],
            "witness_images": [list(w) for w in self.witness_images],
            "periodic": self.periodic,
            "base": self.base.as_list(),
            "k_pos": self.k_pos,
            "n_pos": self.n_pos,
            "k_neg": self.k_neg,
            "n_neg": self.n_neg,
        }


def assemble_periodic_chain(m: LiftMap, w_pos: ReturningWitness, w_neg: ReturningWitness):
    """Close a periodic disk chain from a positive and a negative witness on
    the same disk: climb by k1 up to U + k1*k2, then descend by k2 back to U."""
    if w_pos.k <= 0 or w_neg.k >= 0:
        raise LinkVerificationFailed("witness signs do not match their roles")
    if any(abs(a - b) > 1e-12 for a, b in zip(w_pos.U.as_list(), w_neg.U.as_list())):
        raise LinkVerificationFailed("witnesses do not share the same base disk")
    U = w_pos.U
    if U.width >= 1.0:
        raise LinkVerificationFailed("disk wider than one turn cannot have disjoint translates")
    if not disk_self_disjoint(m, U):
        raise LinkVerificationFailed("f(U) meets U")
    k1, n1 = w_pos.k, w_pos.n
    k2, n2 = -w_neg.k, w_neg.n
    offsets = [i * k1 for i in range(k2 + 1)]
    offsets += [k1 * k2 - j * k2 for j in range(1, k1 + 1)]
    disks = [U.translate(o) for o in offsets]
    exponents = [n1] * k2 + [n2] * k1
    witnesses = []
    images = []
    for idx in range(len(offsets) - 1):
        off = offsets[idx]
        if idx < k2:
            zx, zy = w_pos.z[0] + off, w_pos.z[1]
            n_link = n1
        else:
            zx, zy = w_neg.z[0] + off, w_neg.z[1]
            n_link = n2
        expected_off = offsets[idx + 1]
        if not disks[idx].contains_interior(zx, zy):
            raise LinkVerificationFailed(f"link {idx}: witness not in its disk")
        zn = iterate(m, LiftPoint(zx, zy), n_link)
        tgt = U.translate(expected_off)
        if not tgt.contains_interior(zn.x, zn.y):
            raise LinkVerificationFailed(
                f"link {idx}: witness image ({zn.x}, {zn.y}) misses disk U+{expected_off}"
            )
        witnesses.append((zx, zy))
        images.append((zn.x, zn.y))
    return DiskChain(
        disks=tuple(disks),
        exponents=tuple(exponents),
        witnesses=tuple(witnesses),
        witness_images=tuple(images),
        periodic=True,
        base=U,
        k_pos=k1,
        n_pos=n1,
        k_neg=w_neg.k,
        n_neg=n2,
    )


def pull_back_returning(m: LiftMap, x: AnnulusPoint, w: ReturningWitness, n: int):
    """Pull a returning disk back n steps so it contains a lift of x."""
    y0 = LiftPoint(x.theta, x.y)
    if n == 0:
        fx = y0.x - math.floor(y0.x)
        if w.U.contains(fx, y0.y):
            return w
        raise PreconditionFailed("point is not in the disk")
    if n < 0:
        raise PreconditionFailed("n must be >= 0")
    zn = iterate(m, y0, n)
    j = None
    for cand in range(int(math.floor(zn.x - w.U.x1)) - 1, int(math.ceil(zn.x - w.U.x0)) + 2):
        if w.U.translate(cand).contains(zn.x, zn.y):
            j = cand
            break
    if j is None:
        raise PreconditionFailed("orbit does not meet the disk after n steps")
    shifted = w.U.translate(j)
    xs, ys = shifted.sample_grid(9)
    px, py = xs.copy(), ys.copy()
    for _ in range(n):
        px, py, st = m.batch_inverse(px, py)
        if np.any(st != kernels.OK):
            raise NotFoundAtResolution("backward images left the chart")
    px = np.append(px, y0.x)
    py = np.append(py, y0.y)
    pad = 1e-9
    V = Rect(float(np.min(px)) - pad, float(np.max(px)) + pad,
             float(np.min(py)) - pad, float(np.max(py)) + pad)
    if not disk_self_disjoint(m, V):
        raise NotFoundAtResolution("pulled-back hull is too fat: f(V) meets V")
    zx = iterate(m, LiftPoint(w.z[0] + j, w.z[1]), -n)
    ok, img = verify_returning(m, V, w.n, w.k, (zx.x, zx.y))
    if not ok:
        raise NotFoundAtResolution("pulled-back witness failed re-verification")
    return ReturningWitness(U=V, n=w.n, k=w.k, z=(zx.x, zx.y), z_image=img,
                            sign=w.sign, d=w.d)


def omega_limit_boxes(m: LiftMap, p: LiftPoint, transient, N, d=7):
    """Boxes visited by the orbit after the transient; (BoxSet, escaped)."""
    if N <= transient:
        raise PreconditionFailed("need N > transient")
    try:
        xs, ys = m.orbit(p.x, p.y, N)
    except Exception:
        return BoxSet(d, 0, 1 << d, frozenset()), True
    boxes = set()
    for i in range(transient + 1, N + 1):
        boxes.add(box_of_point(d, float(xs[i]), float(ys[i])))
    return BoxSet(d, 0, 1 << d, frozenset(boxes)), False
