"""Axis-aligned rectangles shared by the box engine and fixed-point search."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate rect {self}")

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    @property
    def center(self):
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def diag(self):
        return math.hypot(self.width, self.height)

    def contains(self, x, y, slack=0.0):
        return (
            self.x0 - slack <= x <= self.x1 + slack
            and self.y0 - slack <= y <= self.y1 + slack
        )

    def contains_interior(self, x, y):
        return self.x0 < x < self.x1 and self.y0 < y < self.y1

    def translate(self, k):
        return Rect(self.x0 + k, self.x1 + k, self.y0, self.y1)

    def intersects(self, other):
        return (
            self.x0 < other.x1
            and other.x0 < self.x1
            and self.y0 < other.y1
            and other.y0 < self.y1
        )

    def split4(self):
        cx, cy = self.center
        return (
            Rect(self.x0, cx, self.y0, cy),
            Rect(cx, self.x1, self.y0, cy),
            Rect(self.x0, cx, cy, self.y1),
            Rect(cx, self.x1, cy, self.y1),
        )

    def sample_grid(self, g):
        """g x g inclusive grid (corners, edges, center for g=3)."""
        xs = np.linspace(self.x0, self.x1, g)
        ys = np.linspace(self.y0, self.y1, g)
        X, Y = np.meshgrid(xs, ys)
        return X.ravel(), Y.ravel()

    def boundary_points(self, per_edge):
        """Counterclockwise boundary loop, per_edge points per side (open)."""
        t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
        bx = np.concatenate(
            [
                self.x0 + t * self.width,
                np.full_like(t, self.x1),
                self.x1 - t * self.width,
                np.full_like(t, self.x0),
            ]
        )
        by = np.concatenate(
            [
                np.full_like(t, self.y0),
                self.y0 + t * self.height,
                np.full_like(t, self.y1),
                self.y1 - t * self.height,
            ]
        )
        return bx, by

    def as_list(self):
        return [self.x0, self.x1, self.y0, self.y1]


def rect_from_list(vals):
    return Rect(float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]))


def dyadic_rect(d, ix, iy):
    """The dyadic box [ix, ix+1] x [iy, iy+1] / 2^d."""
    s = 1.0 / (1 << d)
    return Rect(ix * s, (ix + 1) * s, iy * s, (iy + 1) * s)


def point_rect_distance(x, y, r: Rect):
    dx = max(r.x0 - x, 0.0, x - r.x1)
    dy = max(r.y0 - y, 0.0, y - r.y1)
    return math.hypot(dx, dy)
