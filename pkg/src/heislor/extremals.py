"""Extremal trajectories of the two Lorentzian problems.

Pointwise maximization of the control Hamiltonian over the causal cone,
the coupled state/covector flow it induces, and closed-form evaluation of
all four extremal families (P1/P2 x normal/abnormal).

Conventions (oracle-validated; see ``heislor.discrepancies``):

* vertical subsystem, any control: dh1 = -h3 u2, dh2 = h3 u1, dh3 = 0;
* P1 normal: u = (h1, h2, -h3) on the level set h3^2 - h1^2 - h2^2 = 1
  with h3 < 0 (so u3 = -h3 > 0 and the length rate is identically 1);
* P1 abnormal: lightlike u = (h1, h2, 1)/sqrt(h1^2 + h2^2) with the phase
  running clockwise, theta(t) = theta0 - t, and h3 = -1;
* P2 normal: u = (-h1, h2, h3) on the level set h1^2 - h2^2 - h3^2 = 1
  with h1 < 0; the induced vertical equations are dh1 = -h2 h3,
  dh2 = -h1 h3, and the conserved quadratic is h1^2 - h2^2 - h3^2;
* P2 abnormal: lightlike u = (sqrt(h2^2 + h3^2), h2, h3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .group import (
    TAU_NORM,
    ConeClass,
    Control,
    Covector,
    GroupPoint,
    Problem,
    classify_control,
    length_integrand,
)

__all__ = [
    "ExtremalKind",
    "DecisionKind",
    "ControlDecision",
    "NormalizationError",
    "DegenerateCovectorError",
    "maximize_control",
    "extremal_control",
    "covector_flow",
    "eval_abnormal_p1",
    "eval_normal_p1",
    "eval_abnormal_p2",
    "eval_normal_p2",
    "ExtremalSpec",
    "Trajectory",
    "sample_extremal",
    "eval_spec",
    "eval_spec_arrays",
    "restarted_spec",
    "conserved_form",
]


class ExtremalKind(Enum):
    NORMAL = "normal"
    ABNORMAL = "abnormal"


class DecisionKind(Enum):
    NO_MAXIMUM = "no_maximum"
    TRIVIAL_ONLY = "trivial_only"
    MAXIMIZER = "maximizer"
    RAY_OF_MAXIMIZERS = "ray_of_maximizers"


class NormalizationError(ValueError):
    """Covector parameters violate the required level-set normalization."""


class DegenerateCovectorError(ValueError):
    """Covector where the extremal control direction is undefined."""


@dataclass(frozen=True)
class ControlDecision:
    """Outcome of maximizing the control Hamiltonian over the cone.

    For MAXIMIZER, ``control`` is the unit-rate representative of the
    maximizing ray and ``value`` is its Lorentzian length rate (equal to
    sqrt|Q(h)|, hence 1.0 on the unit level set).  The maximum of the
    Hamiltonian itself is 0, attained along the whole ray; see
    ``heislor.discrepancies`` entry ``normal-max-on-ray``.

    For RAY_OF_MAXIMIZERS (abnormal case), ``direction`` spans the
    lightlike ray on which the maximum 0 is attained.
    """

    kind: DecisionKind
    control: Optional[Control] = None
    value: Optional[float] = None
    direction: Optional[Control] = None


def _swap13_covector(h: Covector) -> Covector:
    return Covector(h.h3, h.h2, h.h1)


def _swap13_control(u: Control) -> Control:
    return Control(u.u3, u.u2, u.u1)


def _maximize_p1(h: Covector, nu: float) -> ControlDecision:
    h1, h2, h3 = h.h1, h.h2, h.h3
    quad = h3 * h3 - h1 * h1 - h2 * h2
    scale = h1 * h1 + h2 * h2 + h3 * h3
    if nu == 0.0:
        if h3 < 0.0 and abs(quad) <= TAU_NORM * scale:
            return ControlDecision(
                DecisionKind.RAY_OF_MAXIMIZERS,
                direction=Control(h1, h2, -h3),
            )
        if h3 < 0.0 and quad > 0.0:
            return ControlDecision(DecisionKind.TRIVIAL_ONLY)
        return ControlDecision(DecisionKind.NO_MAXIMUM)
    if nu == -1.0:
        if quad > 0.0 and h3 < 0.0:
            radius = math.sqrt(quad)
            if abs(radius - 1.0) <= TAU_NORM:
                u = Control(h1, h2, -h3)
                return ControlDecision(
                    DecisionKind.MAXIMIZER,
                    control=u,
                    value=length_integrand(Problem.P1, u),
                )
            if radius > 1.0:
                return ControlDecision(DecisionKind.TRIVIAL_ONLY)
            return ControlDecision(DecisionKind.NO_MAXIMUM)
        return ControlDecision(DecisionKind.NO_MAXIMUM)
    raise ValueError(f"nu must be 0 or -1, got {nu}")


def maximize_control(problem: Problem, h: Covector, nu: float) -> ControlDecision:
    """Full case split of the Hamiltonian maximization over the cone.

    nu = 0 is the abnormal multiplier, nu = -1 the normal one.  The P2 case
    is the image of the P1 case under swapping axes 1 and 3.
    """
    if problem is Problem.P1:
        return _maximize_p1(h, nu)
    dec = _maximize_p1(_swap13_covector(h), nu)
    return ControlDecision(
        dec.kind,
        control=None if dec.control is None else _swap13_control(dec.control),
        value=dec.value,
        direction=None if dec.direction is None else _swap13_control(dec.direction),
    )


def extremal_control(problem: Problem, kind: ExtremalKind, h: Covector) -> Control:
    """Control selected along an extremal of the given family at covector h."""
    if problem is Problem.P1:
        if kind is ExtremalKind.NORMAL:
            return Control(h.h1, h.h2, -h.h3)
        rho = math.hypot(h.h1, h.h2)
        if rho < 1e-300:
            raise DegenerateCovectorError(
                "P1 abnormal control direction undefined at h1 = h2 = 0"
            )
        return Control(h.h1 / rho, h.h2 / rho, 1.0)
    if kind is ExtremalKind.NORMAL:
        return Control(-h.h1, h.h2, h.h3)
    return Control(math.hypot(h.h2, h.h3), h.h2, h.h3)


def covector_flow(
    problem: Problem, kind: ExtremalKind
) -> Callable[[GroupPoint, Covector], tuple[tuple[float, float, float], tuple[float, float, float]]]:
    """Right-hand side of the coupled (q, h) system for the given family.

    Substitutes the family's extremal control into q' = sum u_i X_i(q) and
    the vertical equations h1' = -h3 u2, h2' = h3 u1, h3' = 0.  This
    frame-coordinate form is the single source of truth for the dynamics;
    the compiled integrator kernels mirror it and are cross-checked in the
    test suite.
    """

    def rhs(q: GroupPoint, h: Covector):
        u = extremal_control(problem, kind, h)
        qdot = (
            u.u1,
            u.u2,
            -0.5 * q.y * u.u1 + 0.5 * q.x * u.u2 + u.u3,
        )
        hdot = (-h.h3 * u.u2, h.h3 * u.u1, 0.0)
        return qdot, hdot

    return rhs


def conserved_form(problem: Problem, h1, h2, h3):
    """Quadratic form conserved along the problem's extremal flow.

    P1: h1^2 + h2^2 - h3^2.  P2: h1^2 - h2^2 - h3^2 (the sum form is NOT
    conserved for P2; see discrepancy entry ``p2-conserved-form``).
    """
    if problem is Problem.P1:
        return h1 * h1 + h2 * h2 - h3 * h3
    return h1 * h1 - h2 * h2 - h3 * h3


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def _cosh_m1(s):
    # cosh(s) - 1 without cancellation near s = 0
    sh = np.sinh(0.5 * np.asarray(s, dtype=float))
    return 2.0 * sh * sh


def _sinh_sub(s):
    # sinh(s) - s, stable near s = 0
    s = np.asarray(s, dtype=float)
    s2 = s * s
    series = (s * s2 / 6.0) * (
        1.0 + (s2 / 20.0) * (1.0 + (s2 / 42.0) * (1.0 + s2 / 72.0))
    )
    return np.where(np.abs(s) < 0.05, series, np.sinh(s) - s)


def _p1_abnormal_arrays(theta0: float, ts: np.ndarray):
    chi = theta0 - ts
    sin_chi, cos_chi = np.sin(chi), np.cos(chi)
    q = np.column_stack(
        [
            math.sin(theta0) - sin_chi,
            cos_chi - math.cos(theta0),
            0.5 * (ts + np.sin(ts)),
        ]
    )
    h = np.column_stack([cos_chi, sin_chi, np.full_like(ts, -1.0)])
    u = np.column_stack([cos_chi, sin_chi, np.ones_like(ts)])
    return q, h, u


def _p1_normal_arrays(theta0: float, a: float, ts: np.ndarray):
    w = math.cosh(a)
    th = math.tanh(a)
    sh = math.sinh(a)
    chi = theta0 - w * ts
    sin_chi, cos_chi = np.sin(chi), np.cos(chi)
    q = np.column_stack(
        [
            th * (math.sin(theta0) - sin_chi),
            th * (cos_chi - math.cos(theta0)),
            0.5 * ts * (1.0 / w + w) + 0.5 * th * th * np.sin(w * ts),
        ]
    )
    h = np.column_stack([sh * cos_chi, sh * sin_chi, np.full_like(ts, -w)])
    u = np.column_stack([sh * cos_chi, sh * sin_chi, np.full_like(ts, w)])
    return q, h, u


def _p2_abnormal_arrays(h2_0: float, h3: float, ts: np.ndarray):
    if h3 == 0.0:
        h1_0 = -abs(h2_0)
        q = np.column_stack([-h1_0 * ts, h2_0 * ts, np.zeros_like(ts)])
        h = np.column_stack(
            [np.full_like(ts, h1_0), np.full_like(ts, h2_0), np.zeros_like(ts)]
        )
        u = np.column_stack(
            [np.full_like(ts, -h1_0), np.full_like(ts, h2_0), np.zeros_like(ts)]
        )
        return q, h, u
    sgn = 1.0 if h3 > 0.0 else -1.0
    big_c = math.asinh(h2_0 / h3)
    tau = big_c + abs(h3) * ts
    # sinh(tau) - sinh(C) and cosh(tau) - cosh(C) via product identities,
    # stable for small |h3| t.
    half_sum = 0.5 * (tau + big_c)
    half_dif = 0.5 * (tau - big_c)
    x = 2.0 * np.cosh(half_sum) * np.sinh(half_dif)
    y = sgn * 2.0 * np.sinh(half_sum) * np.sinh(half_dif)
    s = h3 * ts
    z = 0.5 * (s + np.sinh(s))
    h1 = -abs(h3) * np.cosh(tau)
    h2 = h3 * np.sinh(tau)
    q = np.column_stack([x, y, z])
    h = np.column_stack([h1, h2, np.full_like(ts, h3)])
    u = np.column_stack([-h1, h2, np.full_like(ts, h3)])
    return q, h, u


def _p2_normal_arrays(h1_0: float, h2_0: float, h3: float, ts: np.ndarray):
    if h3 == 0.0:
        q = np.column_stack([-h1_0 * ts, h2_0 * ts, np.zeros_like(ts)])
        h = np.column_stack(
            [np.full_like(ts, h1_0), np.full_like(ts, h2_0), np.zeros_like(ts)]
        )
        u = np.column_stack(
            [np.full_like(ts, -h1_0), np.full_like(ts, h2_0), np.zeros_like(ts)]
        )
        return q, h, u
    s = h3 * ts
    cm1 = _cosh_m1(s)
    sinh_s = np.sinh(s)
    cosh_s = cm1 + 1.0
    x = (h2_0 * cm1 - h1_0 * sinh_s) / h3
    y = (h2_0 * sinh_s - h1_0 * cm1) / h3
    z = s + (h1_0 * h1_0 - h2_0 * h2_0) * _sinh_sub(s) / (2.0 * h3 * h3)
    h1 = h1_0 * cosh_s - h2_0 * sinh_s
    h2 = h2_0 * cosh_s - h1_0 * sinh_s
    q = np.column_stack([x, y, z])
    h = np.column_stack([h1, h2, np.full_like(ts, h3)])
    u = np.column_stack([-h1, h2, np.full_like(ts, h3)])
    return q, h, u


def _single(arrays) -> tuple[GroupPoint, Covector, Control]:
    q, h, u = arrays
    return (
        GroupPoint(float(q[0, 0]), float(q[0, 1]), float(q[0, 2])),
        Covector(float(h[0, 0]), float(h[0, 1]), float(h[0, 2])),
        Control(float(u[0, 0]), float(u[0, 1]), float(u[0, 2])),
    )


def eval_abnormal_p1(theta0: float, t: float) -> tuple[GroupPoint, Covector, Control]:
    """Closed-form P1 abnormal extremal: unit circle in (x, y), z = (t + sin t)/2."""
    _check_time(t)
    return _single(_p1_abnormal_arrays(theta0, np.array([t], dtype=float)))


def eval_normal_p1(theta0: float, a: float, t: float) -> tuple[GroupPoint, Covector, Control]:
    """Closed-form P1 normal extremal with hyperbolic parameter a."""
    _check_time(t)
    return _single(_p1_normal_arrays(theta0, a, np.array([t], dtype=float)))


def eval_abnormal_p2(h2_0: float, h3: float, t: float) -> tuple[GroupPoint, Covector, Control]:
    """Closed-form P2 abnormal (lightlike) extremal.

    For h3 = 0 this is the straight line x = |h2_0| t, y = h2_0 t, z = 0;
    for h3 != 0 the hyperbolic arc with z = (h3 t + sinh(h3 t))/2.
    """
    _check_time(t)
    return _single(_p2_abnormal_arrays(h2_0, h3, np.array([t], dtype=float)))


def eval_normal_p2(
    h1_0: float, h2_0: float, h3: float, t: float
) -> tuple[GroupPoint, Covector, Control]:
    """Closed-form P2 normal extremal from a unit-normalized covector.

    Requires h1_0^2 - h2_0^2 - h3^2 = 1 with h1_0 < 0 (within TAU_NORM).
    """
    _check_time(t)
    _check_p2_normalization(h1_0, h2_0, h3)
    return _single(_p2_normal_arrays(h1_0, h2_0, h3, np.array([t], dtype=float)))


def _check_time(t: float) -> None:
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValueError(f"time must be finite and >= 0, got {t}")


def _check_p2_normalization(h1_0: float, h2_0: float, h3: float) -> None:
    scale = max(1.0, h1_0 * h1_0 + h2_0 * h2_0 + h3 * h3)
    if h1_0 >= 0.0 or abs(h1_0 * h1_0 - h2_0 * h2_0 - h3 * h3 - 1.0) > TAU_NORM * scale:
        raise NormalizationError(
            "P2 normal covector must satisfy h1^2 - h2^2 - h3^2 = 1 with h1 < 0, "
            f"got ({h1_0}, {h2_0}, {h3})"
        )


# ---------------------------------------------------------------------------
# Extremal specifications and sampled trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremalSpec:
    """Parameters identifying one extremal trajectory of one family.

    Required parameters by family:

    * P1 abnormal:  theta0
    * P1 normal:    theta0, a          (h3 = -cosh a implicitly)
    * P2 abnormal:  h2_0, h3           (h1_0 = -sqrt(h2_0^2 + h3^2) implicitly)
    * P2 normal:    h1_0, h2_0, h3     (unit-normalized, h1_0 < 0)
    """

    problem: Problem
    kind: ExtremalKind
    t1: float
    theta0: Optional[float] = None
    a: Optional[float] = None
    h1_0: Optional[float] = None
    h2_0: Optional[float] = None
    h3: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.t1) and self.t1 >= 0.0):
            raise ValueError(f"duration t1 must be finite and >= 0, got {self.t1}")
        required = {
            (Problem.P1, ExtremalKind.ABNORMAL): ("theta0",),
            (Problem.P1, ExtremalKind.NORMAL): ("theta0", "a"),
            (Problem.P2, ExtremalKind.ABNORMAL): ("h2_0", "h3"),
            (Problem.P2, ExtremalKind.NORMAL): ("h1_0", "h2_0", "h3"),
        }[(self.problem, self.kind)]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(
                    f"{self.problem.name} {self.kind.value} extremal requires "
                    f"parameter {name!r}"
                )
        if self.problem is Problem.P2 and self.kind is ExtremalKind.NORMAL:
            _check_p2_normalization(self.h1_0, self.h2_0, self.h3)

    # -- convenience constructors ------------------------------------------

    @classmethod
    def p1_abnormal(cls, theta0: float, t1: float) -> "ExtremalSpec":
        return cls(Problem.P1, ExtremalKind.ABNORMAL, t1, theta0=theta0)

    @classmethod
    def p1_normal(cls, theta0: float, a: float, t1: float) -> "ExtremalSpec":
        return cls(Problem.P1, ExtremalKind.NORMAL, t1, theta0=theta0, a=a)

    @classmethod
    def p2_abnormal(cls, h2_0: float, h3: float, t1: float) -> "ExtremalSpec":
        return cls(Problem.P2, ExtremalKind.ABNORMAL, t1, h2_0=h2_0, h3=h3)

    @classmethod
    def p2_normal(cls, h1_0: float, h2_0: float, h3: float, t1: float) -> "ExtremalSpec":
        return cls(Problem.P2, ExtremalKind.NORMAL, t1, h1_0=h1_0, h2_0=h2_0, h3=h3)

    @classmethod
    def p2_normal_from(cls, h2_0: float, h3: float, t1: float) -> "ExtremalSpec":
        """P2 normal spec with h1_0 derived from the unit normalization."""
        h1_0 = -math.sqrt(1.0 + h2_0 * h2_0 + h3 * h3)
        return cls.p2_normal(h1_0, h2_0, h3, t1)

    def initial_covector(self) -> Covector:
        if self.problem is Problem.P1:
            if self.kind is ExtremalKind.ABNORMAL:
                return Covector(math.cos(self.theta0), math.sin(self.theta0), -1.0)
            sh = math.sinh(self.a)
            return Covector(
                sh * math.cos(self.theta0), sh * math.sin(self.theta0), -math.cosh(self.a)
            )
        if self.kind is ExtremalKind.ABNORMAL:
            return Covector(-math.hypot(self.h2_0, self.h3), self.h2_0, self.h3)
        return Covector(self.h1_0, self.h2_0, self.h3)

    def params_dict(self) -> dict:
        names = {
            (Problem.P1, ExtremalKind.ABNORMAL): ("theta0",),
            (Problem.P1, ExtremalKind.NORMAL): ("theta0", "a"),
            (Problem.P2, ExtremalKind.ABNORMAL): ("h2_0", "h3"),
            (Problem.P2, ExtremalKind.NORMAL): ("h1_0", "h2_0", "h3"),
        }[(self.problem, self.kind)]
        return {name: getattr(self, name) for name in names}


def eval_spec_arrays(spec: ExtremalSpec, ts: np.ndarray):
    """Closed-form (q, h, u) arrays for the spec's family at the given times."""
    ts = np.asarray(ts, dtype=float)
    if spec.problem is Problem.P1:
        if spec.kind is ExtremalKind.ABNORMAL:
            return _p1_abnormal_arrays(spec.theta0, ts)
        return _p1_normal_arrays(spec.theta0, spec.a, ts)
    if spec.kind is ExtremalKind.ABNORMAL:
        return _p2_abnormal_arrays(spec.h2_0, spec.h3, ts)
    return _p2_normal_arrays(spec.h1_0, spec.h2_0, spec.h3, ts)


def eval_spec(spec: ExtremalSpec, t: float) -> tuple[GroupPoint, Covector, Control]:
    """Closed-form single-time evaluation of the spec's extremal."""
    _check_time(t)
    return _single(eval_spec_arrays(spec, np.array([t], dtype=float)))


def restarted_spec(spec: ExtremalSpec, t_mid: float) -> ExtremalSpec:
    """Spec of the same extremal re-parametrized to start at time t_mid.

    Left translation by the inverse of q(t_mid) maps the tail of the
    original trajectory onto the restarted one.
    """
    if not 0.0 <= t_mid <= spec.t1:
        raise ValueError("t_mid must lie in [0, t1]")
    rest = spec.t1 - t_mid
    if spec.problem is Problem.P1:
        if spec.kind is ExtremalKind.ABNORMAL:
            return ExtremalSpec.p1_abnormal(spec.theta0 - t_mid, rest)
        return ExtremalSpec.p1_normal(
            spec.theta0 - t_mid * math.cosh(spec.a), spec.a, rest
        )
    _, h_mid, _ = eval_spec(spec, t_mid)
    if spec.kind is ExtremalKind.ABNORMAL:
        return ExtremalSpec.p2_abnormal(h_mid.h2, h_mid.h3, rest)
    return ExtremalSpec.p2_normal(h_mid.h1, h_mid.h2, h_mid.h3, rest)


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled extremal or controlled trajectory.

    Columns: times t (strictly increasing from 0), states q (N, 3),
    controls u (N, 3), accumulated Lorentzian length J (N,), and covectors
    h (N, 3) when the trajectory carries adjoint variables.
    """

    problem: Problem
    t: np.ndarray
    q: np.ndarray
    u: np.ndarray
    J: np.ndarray
    h: Optional[np.ndarray] = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("trajectory needs a 1-D, nonempty time grid")
        if t[0] != 0.0:
            raise ValueError("trajectory time grid must start at 0")
        if t.size > 1 and not np.all(np.diff(t) > 0.0):
            raise ValueError("trajectory time grid must be strictly increasing")
        if abs(float(self.J[0])) > 1e-12:
            raise ValueError("accumulated length must start at 0")
        if np.any(np.diff(self.J) < -1e-12):
            raise ValueError("accumulated length must be nondecreasing")
        for name in ("t", "q", "u", "J", "h"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self) -> int:
        return self.t.size

    @property
    def endpoint(self) -> GroupPoint:
        return GroupPoint(*self.q[-1])

    @property
    def endpoint_covector(self) -> Optional[Covector]:
        return None if self.h is None else Covector(*self.h[-1])

    @property
    def total_length(self) -> float:
        return float(self.J[-1])


def sample_extremal(spec: ExtremalSpec, n_samples: int) -> Trajectory:
    """Sample the closed-form extremal on a uniform grid over [0, t1].

    J is accumulated analytically: identically t for normal extremals
    (unit length rate under the normalizations above), identically 0 for
    abnormal (lightlike) ones.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    ts = np.linspace(0.0, spec.t1, n_samples)
    q, h, u = eval_spec_arrays(spec, ts)
    J = ts.copy() if spec.kind is ExtremalKind.NORMAL else np.zeros_like(ts)
    return Trajectory(problem=spec.problem, t=ts, q=q, u=u, J=J, h=h)
