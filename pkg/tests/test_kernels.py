"""Parity between the jitted kernels and the pure numpy fallback."""

import numpy as np
import pytest

from annulab import kernels as K

CASES = [
    (K.RIGID, np.array([0.25, 0.5])),
    (K.TWIST, np.zeros(0)),
    (K.PERT, np.array([0.05, 0.2, 0.4, 0.7])),
    (K.FLOW_IZ, np.array([1.0, 1.0 / 64.0, 64.0])),
    (
        K.HORSESHOE,
        np.array([0.03, 0.12, 0.21, 0.06, 0.33, 0.46, 0.59, 0.08, 0.0, 0.3, 0.3, 0.7]),
    ),
    (K.BILL_CIRCLE, np.zeros(0)),
    (K.BILL_ELLIPSE, np.array([2.0, 1.0])),
]


def _grid(kind):
    if kind == K.HORSESHOE:
        xs = np.array([0.05, 0.14, 0.23, 0.45, 1.06])
        ys = np.array([0.45, 0.35, 0.62, 0.5, 0.4])
    else:
        xs = np.array([0.0, 0.21, 0.5, 0.87, 1.45, -0.3])
        ys = np.array([0.31, 0.5, 0.62, 0.18, 0.74, 0.42])
    return xs, ys


@pytest.mark.parametrize("kind,params", CASES)
def test_batch_apply_matches_numpy_fallback(kind, params):
    xs, ys = _grid(kind)
    a = K.batch_apply(kind, params, 1, 0.0, xs.copy(), ys.copy(), 1e-12, 1 - 1e-12)
    b = K._np_batch_apply(kind, params, 1, 0.0, xs.copy(), ys.copy(), 1e-12, 1 - 1e-12)
    assert np.array_equal(a[2], b[2])
    ok = a[2] == K.OK
    assert np.allclose(a[0][ok], b[0][ok], atol=1e-12, rtol=0)
    assert np.allclose(a[1][ok], b[1][ok], atol=1e-12, rtol=0)


@pytest.mark.parametrize("kind,params", CASES)
def test_batch_inverse_matches_numpy_fallback(kind, params):
    xs, ys = _grid(kind)
    # forward first so inverse arguments are in range for partial maps
    fx, fy, st = K.batch_apply(kind, params, 1, 0.0, xs.copy(), ys.copy(), 1e-12, 1 - 1e-12)
    ok = st == K.OK
    a = K.batch_inverse(kind, params, 1, 0.0, fx[ok], fy[ok], 1e-12, 1 - 1e-12)
    b = K._np_batch_inverse(kind, params, 1, 0.0, fx[ok], fy[ok], 1e-12, 1 - 1e-12)
    assert np.array_equal(a[2], b[2])
    good = a[2] == K.OK
    assert np.allclose(a[0][good], b[0][good], atol=1e-10, rtol=0)
    assert np.allclose(a[1][good], b[1][good], atol=1e-10, rtol=0)
    # and the inverse actually inverts
    assert np.allclose(a[0][good], xs[ok][good], atol=1e-7, rtol=0)


def test_orbit_trace_matches_numpy_fallback():
    kind, params = K.PERT, np.array([0.05, 0.2, 0.4, 0.7])
    a = K.orbit_trace(kind, params, 1, 0.0, 0.2, 0.6, 200, 1e-12, 1 - 1e-12)
    b = K._np_orbit_trace(kind, params, 1, 0.0, 0.2, 0.6, 200, 1e-12, 1 - 1e-12)
    assert a[2] == b[2] and a[3] == b[3]
    assert np.allclose(a[0], b[0], atol=1e-11, rtol=0)
    assert np.allclose(a[1], b[1], atol=1e-11, rtol=0)


def test_batch_final_matches_numpy_fallback():
    kind, params = K.RIGID, np.array([0.31, 0.8])
    xs = np.array([0.0, 0.4, 0.9])
    ys = np.array([0.3, 0.5, 0.7])
    a = K.batch_final(kind, params, 1, 0.0, xs, ys, 100, 1e-12, 1 - 1e-12)
    b = K._np_batch_final(kind, params, 1, 0.0, xs, ys, 100, 1e-12, 1 - 1e-12)
    assert np.allclose(a[0], b[0], atol=1e-10, rtol=0)
    assert np.allclose(a[1], b[1], atol=1e-10, rtol=0)


def test_horseshoe_outside_domain_status():
    kind, params = CASES[4]
    x, y, st = K.apply_one(kind, params, 1, 0.0, 0.10, 0.5)
    assert st == K.UNDEFINED


def test_escape_status_flagged():
    kind, params = K.TWIST, np.zeros(0)
    ox, oy, st = K.batch_apply(kind, params, 1, 0.0, np.array([0.2]), np.array([0.5]),
                               0.49, 0.51)
    assert st[0] == K.OK
    ox, oy, st = K.batch_apply(kind, params, 1, 0.0, np.array([0.2]), np.array([0.6]),
                               0.49, 0.51)
    assert st[0] == K.ESCAPED
