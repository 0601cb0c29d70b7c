"""Finite-horizon rotation-number estimation with liminf/limsup brackets."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter
from .lifts import LiftMap, LiftPoint


def worker_count():
    """Worker cap from ANNULAB_THREADS (default 1)."""
    try:
        n = int(os.environ.get("ANNULAB_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


@dataclass(frozen=True)
class RotationEstimate:
    """Averaged horizontal displacement of a lift orbit.

    mean is the N-step average; liminf_est/limsup_est bracket the running
    averages over the tail window n in [N/2, N], which suppresses transient
    bias for maps with an attractor.
    """

    N: int
    mean: float
    liminf_est: float
    limsup_est: float
    tol: float

    @property
    def converged(self):
        return (self.limsup_est - self.liminf_est) < self.tol

    def brackets(self, value, slack=0.0):
        return self.liminf_est - slack <= value <= self.limsup_est + slack


def rotation_estimate(m: LiftMap, p: LiftPoint, N: int, tol: float = 1e-6):
    """Estimate the rotation number of the orbit of p under the lift m."""
    if N < 10:
        raise BadParameter("N must be >= 10")
    xs, _ = m.orbit(p.x, p.y, N)
    disp = xs - xs[0]
    n0 = N // 2
    ns = np.arange(n0, N + 1, dtype=float)
    window = disp[n0:] / ns
    return RotationEstimate(
        N=N,
        mean=float(disp[N] / N),
        liminf_est=float(np.min(window)),
        limsup_est=float(np.max(window)),
        tol=tol,
    )


def rotation_interval(m: LiftMap, points, N: int, tol: float = 1e-6):
    """Hull [min liminf_est, max limsup_est] over a sample of points."""
    points = list(points)
    if not points:
        raise BadParameter("empty point sample")
    workers = worker_count()
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ests = list(pool.map(lambda p: rotation_estimate(m, p, N, tol), points))
    else:
        ests = [rotation_estimate(m, p, N, tol) for p in points]
    lo = min(e.liminf_est for e in ests)
    hi = max(e.limsup_est for e in ests)
    return (lo, hi), ests
