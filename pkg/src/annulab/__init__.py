"""Annulus dynamics at desk scale.

Lifts of annulus homeomorphisms, rotation-number estimation, set-oriented
windows/attractors/returning disks, fixed points with winding-number
indices, convex billiards, and a symbolic triple horseshoe, all wired to a
CLI that emits re-verifiable certificates.
"""

from .errors import (
    AnnulabError,
    BadParameter,
    BoundaryZero,
    ClaimFailed,
    DegenerateChord,
    FiberEscape,
    LinkVerificationFailed,
    MissingInverse,
    NotFoundAtResolution,
    OrbitLeavesN,
    OutsideDomain,
    OverlapError,
    PreconditionFailed,
    SchemaError,
)
from .lifts import (
    AnnulusPoint,
    ChartSpec,
    LiftMap,
    LiftPoint,
    check_equivariance,
    iterate,
    project,
)
from .zoo import make_map, parse_map_flag, vector_field_time_one

__version__ = "0.1.0"

__all__ = [
    "AnnulabError", "BadParameter", "BoundaryZero", "ClaimFailed",
    "DegenerateChord", "FiberEscape", "LinkVerificationFailed",
    "MissingInverse", "NotFoundAtResolution", "OrbitLeavesN", "OutsideDomain",
    "OverlapError", "PreconditionFailed", "SchemaError",
    "AnnulusPoint", "ChartSpec", "LiftMap", "LiftPoint",
    "check_equivariance", "iterate", "project",
    "make_map", "parse_map_flag", "vector_field_time_one",
    "__version__",
]
