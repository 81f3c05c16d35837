"""Heisenberg group structure, causal cones, and the control Hamiltonian.

The state space is R^3 with the nonabelian product that makes the frame

    X1 = d/dx - (y/2) d/dz,   X2 = d/dy + (x/2) d/dz,   X3 = d/dz

left-invariant.  Two Lorentzian problems live on top of this structure,
distinguished by which axis carries the cone:

* P1: admissible controls satisfy u1^2 + u2^2 - u3^2 <= 0, u3 >= 0, and the
  length rate is sqrt(u3^2 - u1^2 - u2^2);
* P2: admissible controls satisfy -u1^2 + u2^2 + u3^2 <= 0, u1 >= 0, and the
  length rate is sqrt(u1^2 - u2^2 - u3^2).

The two cones are mapped onto each other by swapping axes 1 and 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "TAU_CONE",
    "TAU_NORM",
    "Problem",
    "ConeClass",
    "ConeViolationError",
    "GroupPoint",
    "Covector",
    "Control",
    "ORIGIN",
    "identity",
    "multiply",
    "inverse",
    "frame_at",
    "left_translation_differential",
    "classify_control",
    "length_integrand",
    "pontryagin_value",
    "covector_from_canonical",
    "canonical_components",
]

# Relative slack for cone-boundary classification: analytically lightlike
# controls satisfy the equality exactly, so this only absorbs round-off.
TAU_CONE = 1e-9
# Slack for covector level-set (normalization) checks.
TAU_NORM = 1e-9


class Problem(Enum):
    """Selects which causal cone / length form is in force."""

    P1 = 1
    P2 = 2


class ConeClass(Enum):
    INADMISSIBLE = "inadmissible"
    LIGHTLIKE = "lightlike"
    TIMELIKE = "timelike"


class ConeViolationError(ValueError):
    """Control lies strictly outside the admissible cone."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must have finite coordinates, got {values}")


@dataclass(frozen=True)
class GroupPoint:
    """Element (x, y, z) of the group in canonical coordinates."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        _require_finite("GroupPoint", self.x, self.y, self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Covector:
    """Adjoint variables in frame components, h_i = <p, X_i>."""

    h1: float
    h2: float
    h3: float

    def __post_init__(self):
        _require_finite("Covector", self.h1, self.h2, self.h3)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.h1, self.h2, self.h3)


@dataclass(frozen=True)
class Control:
    u1: float
    u2: float
    u3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.u1, self.u2, self.u3)


ORIGIN = GroupPoint(0.0, 0.0, 0.0)


def identity() -> GroupPoint:
    """Group identity (0, 0, 0)."""
    return ORIGIN


def multiply(g: GroupPoint, h: GroupPoint) -> GroupPoint:
    """Group product.

    (x, y, z) * (x', y', z') = (x + x', y + y', z + z' + (x y' - y x')/2).
    This is the unique product for which X1, X2, X3 are left-invariant.
    """
    return GroupPoint(
        g.x + h.x,
        g.y + h.y,
        g.z + h.z + 0.5 * (g.x * h.y - g.y * h.x),
    )


def inverse(g: GroupPoint) -> GroupPoint:
    """Group inverse, (x, y, z)^-1 = (-x, -y, -z)."""
    return GroupPoint(-g.x, -g.y, -g.z)


def frame_at(q: GroupPoint) -> tuple[tuple[float, float, float], ...]:
    """Values of the left-invariant frame at q, as coordinate triples."""
    return (
        (1.0, 0.0, -0.5 * q.y),
        (0.0, 1.0, 0.5 * q.x),
        (0.0, 0.0, 1.0),
    )


def left_translation_differential(g: GroupPoint, v: tuple[float, float, float]) -> tuple[float, float, float]:
    """Pushforward of the tangent vector v by left translation L_g.

    The product is affine in the right factor, so the differential does not
    depend on the base point.
    """
    return (v[0], v[1], v[2] + 0.5 * (g.x * v[1] - g.y * v[0]))


def _cone_split(problem: Problem, u: Control) -> tuple[float, float]:
    """Return (axial component, radial magnitude) for the problem's cone."""
    if problem is Problem.P1:
        return u.u3, math.hypot(u.u1, u.u2)
    return u.u1, math.hypot(u.u2, u.u3)


def classify_control(problem: Problem, u: Control) -> ConeClass:
    """Total classification of a control against the problem's cone.

    Timelike means strictly inside the cone (positive length rate),
    lightlike means on the boundary within the relative slack TAU_CONE,
    everything else is inadmissible.
    """
    axial, radial = _cone_split(problem, u)
    tol = TAU_CONE * max(abs(axial), radial)
    if axial < -tol:
        return ConeClass.INADMISSIBLE
    if abs(axial - radial) <= tol:
        return ConeClass.LIGHTLIKE
    if axial > radial:
        return ConeClass.TIMELIKE
    return ConeClass.INADMISSIBLE


def length_integrand(problem: Problem, u: Control) -> float:
    """Lorentzian length rate of an admissible control.

    Returns sqrt of the problem's quadratic form; exactly 0.0 for controls
    classified lightlike.  Raises ConeViolationError for inadmissible input.
    """
    cls = classify_control(problem, u)
    if cls is ConeClass.INADMISSIBLE:
        raise ConeViolationError(
            f"control {u.as_tuple()} is outside the {problem.name} cone"
        )
    if cls is ConeClass.LIGHTLIKE:
        return 0.0
    axial, radial = _cone_split(problem, u)
    return math.sqrt(axial * axial - radial * radial)


def pontryagin_value(problem: Problem, h: Covector, u: Control, nu: float) -> float:
    """Control Hamiltonian u.h - nu * length_integrand(u), nu <= 0."""
    dot = u.u1 * h.h1 + u.u2 * h.h2 + u.u3 * h.h3
    if nu == 0.0:
        # Still validates admissibility.
        length_integrand(problem, u)
        return dot
    return dot - nu * length_integrand(problem, u)


def covector_from_canonical(a: float, b: float, c: float, q: GroupPoint) -> Covector:
    """Frame components of the covector with canonical components (a, b, c) at q."""
    return Covector(a - 0.5 * c * q.y, b + 0.5 * c * q.x, c)


def canonical_components(h: Covector, q: GroupPoint) -> tuple[float, float, float]:
    """Canonical components (a, b, c) of a frame covector at q."""
    return (h.h1 + 0.5 * h.h3 * q.y, h.h2 - 0.5 * h.h3 * q.x, h.h3)
