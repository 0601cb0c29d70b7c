"""Constructors for the example map families, each delivered as a LiftMap.

Families
--------
RIGID(alpha, lam)       rotation by alpha with fiber contraction toward 1/2
TW                      shear twist (x, y) -> (x + y - 1/2, y), volume preserving
DISS_ROT(alpha, lam)    alias of RIGID with alpha != 0
PT(alpha, gamma, beta, lam)
                        circle perturbation + height-coupled drift + contraction
RNF(alpha, beta, lam)   PT family with gamma = 0: small uniform drift, strong
                        shear, no fixed point
IZ(mu)                  time-one map of a flow with a single semi-stable rest
                        point at (0, 1/2); integrated, not closed form
"""

import math

import numpy as np

from . import kernels
from .errors import BadParameter
from .lifts import ChartSpec, LiftMap

DEFAULT_RIGID_LAM = 0.5
IZ_STEP = 1.0 / 64.0


def _check_lam(lam):
    if not 0.0 < lam < 1.0:
        raise BadParameter(f"lam={lam} outside (0,1)")


def rigid(alpha, lam=DEFAULT_RIGID_LAM):
    _check_lam(lam)
    return LiftMap(
        name="RIGID",
        params={"alpha": alpha, "lam": lam},
        chart=ChartSpec("open"),
        kind=kernels.RIGID,
        kparams=np.array([alpha, lam]),
    )


def twist():
    return LiftMap(
        name="TW",
        params={},
        chart=ChartSpec("open"),
        kind=kernels.TWIST,
    )


def diss_rot(alpha, lam):
    if alpha == 0.0:
        raise BadParameter("DISS_ROT needs alpha != 0")
    _check_lam(lam)
    m = rigid(alpha, lam)
    m.name = "DISS_ROT"
    return m


def pert_twist(alpha, gamma, beta, lam):
    if abs(gamma) >= 1.0:
        raise BadParameter(f"gamma={gamma} must satisfy |gamma| < 1")
    _check_lam(lam)
    return LiftMap(
        name="PT",
        params={"alpha": alpha, "gamma": gamma, "beta": beta, "lam": lam},
        chart=ChartSpec("open"),
        kind=kernels.PERT,
        kparams=np.array([alpha, gamma, beta, lam]),
    )


def rot_no_fixed(alpha, beta, lam):
    """Drifting shear: x advances by alpha + beta*(y - 1/2), fiber contracts."""
    _check_lam(lam)
    m = LiftMap(
        name="RNF",
        params={"alpha": alpha, "beta": beta, "lam": lam},
        chart=ChartSpec("open"),
        kind=kernels.PERT,
        kparams=np.array([alpha, 0.0, beta, lam]),
    )
    return m


def flow_one_fixed(mu):
    """Time-one map of the planar field with a single rest point at (0, 1/2)."""
    if mu <= 0.0:
        raise BadParameter(f"mu={mu} must be positive")
    nsteps = int(round(1.0 / IZ_STEP))
    return LiftMap(
        name="IZ",
        params={"mu": mu},
        chart=ChartSpec("open", margin=1e-9),
        kind=kernels.FLOW_IZ,
        kparams=np.array([mu, IZ_STEP, float(nsteps)]),
        exactness=f"integrated(step=1/{nsteps})",
    )


def iz_field(mu):
    """The vector field integrated by IZ, for cross checks."""

    def field(x, y):
        s = math.sin(math.pi * (x - math.floor(x)))
        return s * s + (y - 0.5) ** 2, mu * (0.5 - y) * y * (1.0 - y)

    return field


def vector_field_time_one(field, step=IZ_STEP, name="FLOW", invertible=True):
    """Time-one map of a 1-periodic planar field via fixed-step RK4.

    Accepts any python callable field(x, y) -> (vx, vy); the orientation of
    time is reversed for the inverse.
    """
    if step <= 0 or step > 0.5:
        raise BadParameter(f"step={step} outside (0, 0.5]")
    nsteps = int(round(1.0 / step))

    def rk4(x, y, h):
        for _ in range(nsteps):
            k1x, k1y = field(x, y)
            k2x, k2y = field(x + 0.5 * h * k1x, y + 0.5 * h * k1y)
            k3x, k3y = field(x + 0.5 * h * k2x, y + 0.5 * h * k2y)
            k4x, k4y = field(x + h * k3x, y + h * k3y)
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            y = y + (h / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
        return x, y

    return LiftMap(
        name=name,
        params={"step": step},
        chart=ChartSpec("open", margin=1e-9),
        kind=-1,
        exactness=f"integrated(step=1/{nsteps})",
        has_inverse=invertible,
        py_eval=lambda x, y: rk4(x, y, step),
        py_inv=(lambda x, y: rk4(x, y, -step)) if invertible else None,
    )


def make_map(variant, **params):
    """Build a zoo map by variant name (RIGID, TW, DISS_ROT, PT, RNF, IZ, TH)."""
    variant = variant.upper()
    if variant == "RIGID":
        return rigid(params["alpha"], params.get("lam", DEFAULT_RIGID_LAM))
    if variant == "TW":
        return twist()
    if variant == "DISS_ROT":
        return diss_rot(params["alpha"], params["lam"])
    if variant == "PT":
        return pert_twist(params["alpha"], params["gamma"], params["beta"], params["lam"])
    if variant == "RNF":
        return rot_no_fixed(params["alpha"], params["beta"], params["lam"])
    if variant == "IZ":
        return flow_one_fixed(params["mu"])
    if variant == "TH":
        from .horseshoe import HorseshoeSpec, make_horseshoe

        return make_horseshoe(HorseshoeSpec(**params) if params else HorseshoeSpec())
    if variant in ("BILLIARD_CIRCLE", "BILLIARD-CIRCLE"):
        from .billiards import billiard_chart_map, circle_table

        return billiard_chart_map(circle_table(params.get("radius", 1.0)))
    if variant in ("BILLIARD_ELLIPSE", "BILLIARD-ELLIPSE"):
        from .billiards import billiard_chart_map, ellipse_table

        return billiard_chart_map(ellipse_table(params["a"], params["b"]))
    raise BadParameter(f"unknown map variant {variant!r}")


def map_from_spec(spec):
    """Rebuild a LiftMap from its JSON specification {name, params, ...}."""
    m = make_map(spec["name"], **spec.get("params", {}))
    if spec.get("power") or spec.get("shift"):
        m = m.power_shift(spec.get("power", 1), -spec.get("shift", 0))
    if spec.get("lift_shift"):
        m = m.shifted_lift(spec["lift_shift"])
    return m


def parse_map_flag(text):
    """Parse a --map flag like RIGID:alpha=0.25,lam=0.5 or billiard-ellipse:a=2,b=1."""
    text = text.strip()
    if ":" in text:
        head, tail = text.split(":", 1)
        params = {}
        for piece in tail.split(","):
            if not piece:
                continue
            if "=" in piece:
                k, v = piece.split("=", 1)
                params[k.strip()] = float(v)
            else:
                # positional shorthand for billiard-ellipse:2,1
                params.setdefault("a", None)
                if params["a"] is None:
                    params["a"] = float(piece)
                else:
                    params["b"] = float(piece)
        return make_map(head.replace("-", "_").upper(), **params)
    return make_map(text.replace("-", "_").upper())
