"""Attainable-set queries for P2 and constructive controllability for P1.

The P2 attainable set from the origin (free nonnegative time) is

    { 0 < |z| <= (t + sinh t)/2,  t = arcosh((x^2 - y^2)/2 + 1) }
      union  { x >= |y|, z = 0 },

implemented literally; endpoints of lightlike (abnormal) extremals land
exactly on the |z| = (t + sinh t)/2 shell.

P1 is globally controllable; ``plan_reach_p1`` witnesses this with a
constructive schedule (lightlike straight leg, then a vertical timelike
segment if z must rise, or clockwise lightlike loops if it must drop:
a full loop of radius R changes z by 2*pi*R - pi*R^2, which is negative
for R > 2 and unbounded below).  ``closed_timelike_loop_p1`` returns
closed trajectories of arbitrarily large Lorentzian length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from scipy.optimize import brentq

from .group import Control, GroupPoint, Problem
from .oracle import ArcPiece, ConstantPiece, ControlSchedule

__all__ = [
    "TAU_BND",
    "EPS_PLAN",
    "Verdict",
    "Membership",
    "PlannerError",
    "boundary_time",
    "shell_height",
    "membership_p2",
    "loop_delta_z",
    "plan_reach_p1",
    "closed_timelike_loop_p1",
]

# Absolute slack on boundary comparisons.
TAU_BND = 1e-9
# Endpoint budget for planner constructions.
EPS_PLAN = 1e-6


class Verdict(Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


class PlannerError(RuntimeError):
    """Loop-radius root finding failed (should not occur)."""


@dataclass(frozen=True)
class Membership:
    """Verdict plus the signed slack that produced it.

    For points off the z = 0 plane the witness is |z| - (t + sinh t)/2;
    on the plane it is the cone slack x - |y|.  It is None when the shell
    time is undefined (x^2 < y^2 with z != 0).
    """

    verdict: Verdict
    witness: Optional[float]


def boundary_time(x: float, y: float) -> Optional[float]:
    """Shell parameter t = arcosh((x^2 - y^2)/2 + 1); None when x^2 < y^2."""
    w = x * x - y * y
    if w < 0.0:
        return None
    return math.acosh(0.5 * w + 1.0)


def shell_height(t: float) -> float:
    """Height (t + sinh t)/2 of the attainable shell at parameter t."""
    return 0.5 * (t + math.sinh(t))


def membership_p2(q: GroupPoint, tol: float = TAU_BND) -> Membership:
    """Classify q against the P2 attainable set from the origin."""
    if abs(q.z) <= tol:
        slack = q.x - abs(q.y)
        if abs(slack) <= tol:
            return Membership(Verdict.BOUNDARY, slack)
        if slack > 0.0:
            return Membership(Verdict.INTERIOR, slack)
        return Membership(Verdict.OUTSIDE, slack)
    t = boundary_time(q.x, q.y)
    if t is None:
        return Membership(Verdict.OUTSIDE, None)
    diff = abs(q.z) - shell_height(t)
    if abs(diff) <= tol:
        return Membership(Verdict.BOUNDARY, diff)
    if diff < 0.0:
        return Membership(Verdict.INTERIOR, diff)
    return Membership(Verdict.OUTSIDE, diff)


def loop_delta_z(radius: float, clockwise: bool) -> float:
    """Net z change of one full lightlike loop of the given radius."""
    area = math.pi * radius * radius
    return 2.0 * math.pi * radius + (-area if clockwise else area)


def _clockwise_loop_radius(drop: float) -> float:
    """Radius R > 2 whose clockwise loop changes z by exactly -drop."""
    if drop <= 0.0:
        raise ValueError("drop must be positive")

    def gap(radius: float) -> float:
        return -loop_delta_z(radius, clockwise=True) - drop

    hi = 3.0 + math.sqrt(drop / math.pi)
    try:
        return float(brentq(gap, 2.0, hi, xtol=1e-13, maxiter=200))
    except (RuntimeError, ValueError) as exc:
        raise PlannerError(f"loop radius search failed for drop={drop}") from exc


def _clockwise_loop(drop: float) -> ArcPiece:
    radius = _clockwise_loop_radius(drop)
    return ArcPiece(
        duration=2.0 * math.pi * radius,
        speed=1.0,
        omega=-1.0 / radius,
        phase=0.0,
    )


def plan_reach_p1(q1: GroupPoint) -> ControlSchedule:
    """Admissible P1 schedule from the origin whose endpoint is q1.

    Piece 1 (if needed) is the lightlike straight segment
    u = (cos phi, sin phi, 1) toward (x1, y1), which raises z by the
    horizontal distance r1.  The remaining z gap is closed by a vertical
    timelike segment (gap > 0) or one clockwise lightlike loop (gap < 0).
    The construction is exact up to the loop-radius root-find tolerance.
    """
    pieces: list = []
    r1 = math.hypot(q1.x, q1.y)
    if r1 > 0.0:
        pieces.append(
            ConstantPiece(duration=r1, u=Control(q1.x / r1, q1.y / r1, 1.0))
        )
    gap = q1.z - r1
    scale = max(1.0, r1, abs(q1.z))
    if gap > 1e-14 * scale:
        pieces.append(ConstantPiece(duration=gap, u=Control(0.0, 0.0, 1.0)))
    elif gap < -1e-14 * scale:
        pieces.append(_clockwise_loop(-gap))
    return ControlSchedule(Problem.P1, tuple(pieces))


def closed_timelike_loop_p1(J_min: float) -> ControlSchedule:
    """Closed P1 schedule through the origin with Lorentzian length >= J_min.

    Repeats a unit block (vertical timelike segment of length 1, then a
    clockwise lightlike loop canceling its z gain) ceil(J_min) times, so
    the total length scales exactly linearly with the repetition count.
    """
    if not (J_min > 0.0 and math.isfinite(J_min)):
        raise ValueError(f"J_min must be positive and finite, got {J_min}")
    reps = max(1, math.ceil(J_min))
    block = (
        ConstantPiece(duration=1.0, u=Control(0.0, 0.0, 1.0)),
        _clockwise_loop(1.0),
    )
    return ControlSchedule(Problem.P1, block * reps)
