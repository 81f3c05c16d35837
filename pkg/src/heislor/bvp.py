"""Shooting inversion of the P2 exponential map and Lorentzian distance.

Interior targets are reached by a unique normal extremal (the endpoint map
is a diffeomorphism onto the interior of the attainable set); its duration
t1 is the Lorentzian distance, since normal extremals run at unit length
rate.  Boundary targets are reached only by lightlike (abnormal)
trajectories and have distance 0.  Targets outside the attainable set have
no admissible trajectory at all ("undefined").  For P1 the distance
between any two points is +infinity: closed timelike loops of arbitrary
length can be spliced into any plan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ._kernels import p2_normal_endpoint
from .extremals import ExtremalKind, ExtremalSpec, eval_spec
from .group import GroupPoint, Problem
from .reachability import TAU_BND, Verdict, boundary_time, membership_p2

__all__ = [
    "EPS_SHOOT",
    "ShootingResult",
    "ShootingError",
    "TargetOutsideError",
    "DistanceVerdict",
    "DistanceResult",
    "boundary_abnormal_spec",
    "shoot_p2",
    "lorentz_distance_p2",
    "lorentz_distance",
]

# Endpoint acceptance budget for the shooting solver.
EPS_SHOOT = 1e-8

# Multi-start grid over the covector chart w = r (cos psi, sin psi) and t1.
_GRID_R = (0.0, 0.5, 1.0, 2.0, 4.0)
_GRID_PSI = tuple(k * math.pi / 4.0 for k in range(8))
_GRID_T1 = (0.5, 1.0, 2.0, 5.0, 10.0)

_FD_STEP = 1e-6
_MAX_ITER = 100


class ShootingError(RuntimeError):
    """No Newton start converged to the target."""


class TargetOutsideError(ValueError):
    """Target is outside the attainable set."""


@dataclass(frozen=True)
class ShootingResult:
    """Recovered extremal, its endpoint error, and the distance (= t1)."""

    spec: ExtremalSpec
    endpoint_error: float
    distance: float
    iterations: int
    distinct_t1: tuple[float, ...] = ()


class DistanceVerdict(Enum):
    FINITE = "finite"
    UNDEFINED = "undefined"
    INFINITE = "+infinity"


@dataclass(frozen=True)
class DistanceResult:
    verdict: DistanceVerdict
    value: Optional[float] = None
    spec: Optional[ExtremalSpec] = None


def _endpoint_error(spec: ExtremalSpec, q1: GroupPoint) -> float:
    q, _, _ = eval_spec(spec, spec.t1)
    return math.dist(q.as_tuple(), q1.as_tuple())


def boundary_abnormal_spec(q1: GroupPoint) -> ExtremalSpec:
    """Closed-form lightlike extremal reaching a boundary point q1.

    Uses the scale freedom of the abnormal parametrization to fix |h3| = 1
    (respectively h3 = 0 on the z = 0 face), then solves the hyperbolic
    phase linearly.
    """
    if abs(q1.z) <= TAU_BND:
        if q1.x <= TAU_BND:
            # origin: the trivial trajectory
            return ExtremalSpec.p2_abnormal(1.0, 0.0, 0.0)
        return ExtremalSpec.p2_abnormal(math.copysign(1.0, q1.y), 0.0, q1.x)
    T = boundary_time(q1.x, q1.y)
    if T is None or T <= 0.0:
        raise TargetOutsideError(f"{q1.as_tuple()} is not a boundary point")
    sigma = math.copysign(1.0, q1.z)
    c, s = math.cosh(T), math.sinh(T)
    det = -2.0 * (c - 1.0)
    sinh_c0 = (q1.x * (c - 1.0) - sigma * q1.y * s) / det
    cosh_c0 = (sigma * q1.y * (c - 1.0) - q1.x * s) / det
    if abs(cosh_c0 * cosh_c0 - sinh_c0 * sinh_c0 - 1.0) > 1e-6:
        raise TargetOutsideError(
            f"{q1.as_tuple()} does not lie on the lightlike shell"
        )
    return ExtremalSpec.p2_abnormal(sigma * sinh_c0, sigma, T)


def _residual(v: np.ndarray, target: np.ndarray) -> np.ndarray:
    x, y, z = p2_normal_endpoint(v[0], v[1], v[2])
    return np.array([x - target[0], y - target[1], z - target[2]])


def _jacobian(v: np.ndarray, target: np.ndarray) -> np.ndarray:
    jac = np.empty((3, 3))
    for j in range(3):
        step = _FD_STEP * max(1.0, abs(v[j]))
        vp = v.copy()
        vm = v.copy()
        vp[j] += step
        vm[j] -= step
        if j == 2 and vm[j] <= 0.0:
            vm[j] = v[j]
            step = vp[j] - vm[j]
            jac[:, j] = (_residual(vp, target) - _residual(vm, target)) / step
        else:
            jac[:, j] = (_residual(vp, target) - _residual(vm, target)) / (2.0 * step)
    return jac


def _newton(target: np.ndarray, v0: np.ndarray, tol: float):
    """Damped Newton with backtracking; returns (v, residual_norm, iters)."""
    v = v0.copy()
    f = _residual(v, target)
    fn = float(np.linalg.norm(f))
    for it in range(1, _MAX_ITER + 1):
        if fn <= tol:
            return v, fn, it - 1
        jac = _jacobian(v, target)
        try:
            dv = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            dv = np.linalg.lstsq(jac, -f, rcond=None)[0]
        if not np.all(np.isfinite(dv)):
            return v, fn, it - 1
        lam = 1.0
        accepted = False
        for _ in range(30):
            vt = v + lam * dv
            if vt[2] <= 1e-12 or not np.all(np.isfinite(vt)):
                lam *= 0.5
                continue
            ft = _residual(vt, target)
            fnt = float(np.linalg.norm(ft))
            if fnt < fn * (1.0 - 1e-4 * lam) or fnt <= tol:
                v, f, fn = vt, ft, fnt
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            return v, fn, it
    return v, fn, _MAX_ITER


def _shoot_interior(q1: GroupPoint, eps_shoot: float) -> ShootingResult:
    target = np.array(q1.as_tuple())
    tol = 1e-10 * max(1.0, float(np.linalg.norm(target)))
    starts = []
    for r in _GRID_R:
        psis = (0.0,) if r == 0.0 else _GRID_PSI
        for psi in psis:
            for t1 in _GRID_T1:
                starts.append(np.array([r * math.cos(psi), r * math.sin(psi), t1]))

    converged = []
    best_fn = math.inf
    for v0 in starts:
        v, fn, its = _newton(target, v0, tol)
        best_fn = min(best_fn, fn)
        if fn <= eps_shoot:
            converged.append((v, fn, its))
    if not converged:
        raise ShootingError(
            f"shooting failed for target {q1.as_tuple()}: best residual {best_fn:.3e}"
        )

    v, fn, its = max(converged, key=lambda item: item[0][2])
    t1s = sorted({round(float(c[0][2]), 9) for c in converged})
    distinct = []
    for t1 in t1s:
        if not distinct or abs(t1 - distinct[-1]) > 1e-6 * max(1.0, t1):
            distinct.append(t1)
    w2, w3, t1 = float(v[0]), float(v[1]), float(v[2])
    spec = ExtremalSpec.p2_normal_from(w2, w3, t1)
    return ShootingResult(
        spec=spec,
        endpoint_error=fn,
        distance=t1,
        iterations=its,
        distinct_t1=tuple(distinct),
    )


def shoot_p2(q1: GroupPoint, eps_shoot: float = EPS_SHOOT) -> ShootingResult:
    """Invert the P2 exponential map at q1 (multi-start damped Newton).

    Interior targets on the z = 0 face and boundary targets are handled in
    closed form; other interior targets go through the Newton solver, and
    the converged solution with maximal t1 is returned (the distance is
    the supremum of length over trajectories).
    """
    mem = membership_p2(q1)
    if mem.verdict is Verdict.OUTSIDE:
        raise TargetOutsideError(
            f"target {q1.as_tuple()} is outside the attainable set"
        )
    if mem.verdict is Verdict.BOUNDARY:
        spec = boundary_abnormal_spec(q1)
        return ShootingResult(
            spec=spec,
            endpoint_error=_endpoint_error(spec, q1),
            distance=0.0,
            iterations=0,
        )
    if abs(q1.z) <= TAU_BND:
        # z = 0, x > |y|: straight normal extremal with h3 = 0.
        t1 = math.sqrt(q1.x * q1.x - q1.y * q1.y)
        spec = ExtremalSpec.p2_normal(-q1.x / t1, q1.y / t1, 0.0, t1)
        return ShootingResult(
            spec=spec,
            endpoint_error=_endpoint_error(spec, q1),
            distance=t1,
            iterations=0,
        )
    return _shoot_interior(q1, eps_shoot)


def lorentz_distance_p2(q1: GroupPoint) -> DistanceResult:
    """Lorentzian distance from the origin to q1 for P2.

    Outside the attainable set the causal future never reaches q1 and the
    distance is undefined; on the boundary it is 0 (lightlike maximizer);
    in the interior it equals the duration of the normal maximizer.
    """
    mem = membership_p2(q1)
    if mem.verdict is Verdict.OUTSIDE:
        return DistanceResult(DistanceVerdict.UNDEFINED)
    res = shoot_p2(q1)
    return DistanceResult(DistanceVerdict.FINITE, value=res.distance, spec=res.spec)


def lorentz_distance(problem: Problem, q1: GroupPoint) -> DistanceResult:
    """Distance query for either problem; P1 is +infinity for every target."""
    if problem is Problem.P1:
        return DistanceResult(DistanceVerdict.INFINITE)
    return lorentz_distance_p2(q1)
