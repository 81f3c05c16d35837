"""Fixed-step RK4 integration of the extremal system and of control schedules.

This is the independent referee for every closed form in
``heislor.extremals``: trajectories are integrated from the canonical
frame-coordinate dynamics alone, never from the closed forms themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels
from .extremals import (
    DegenerateCovectorError,
    ExtremalKind,
    Trajectory,
    conserved_form,
    extremal_control,
)
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
    "IntegratorConfig",
    "ConstantPiece",
    "ArcPiece",
    "FuncPiece",
    "ControlSchedule",
    "AdmissibilityError",
    "GridMismatchError",
    "RegionExitError",
    "integrate_pontryagin",
    "integrate_schedule",
    "DeviationReport",
    "compare_trajectories",
    "max_deviation",
    "schedule_to_jsonable",
    "schedule_from_jsonable",
]


class AdmissibilityError(ValueError):
    """A schedule piece leaves the admissible cone."""


class GridMismatchError(ValueError):
    """Trajectories do not share a common time grid."""


class RegionExitError(RuntimeError):
    """Integrated covector left its invariant region (numerical failure)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 configuration.

    ``record_every`` thins the stored samples; the final point is always
    recorded.  ``max_steps * step`` bounds the total integration time.
    """

    step: float = 1e-3
    order: str = "rk4"
    max_steps: int = 50_000_000
    record_every: int = 1

    def __post_init__(self):
        if not (self.step > 0.0 and math.isfinite(self.step)):
            raise ValueError(f"step must be positive and finite, got {self.step}")
        if self.order.lower() != "rk4":
            raise ValueError(f"only RK4 is supported, got {self.order!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def check_span(self, T: float) -> None:
        if T / self.step > self.max_steps:
            raise ValueError(
                f"integration span {T} at step {self.step} exceeds "
                f"max_steps={self.max_steps}"
            )


# ---------------------------------------------------------------------------
# Control schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantPiece:
    """Constant control held for a fixed duration."""

    duration: float
    u: Control

    def __post_init__(self):
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise ValueError("piece duration must be positive and finite")

    def control(self, t: float) -> Control:
        return self.u


@dataclass(frozen=True)
class ArcPiece:
    """Lightlike circular-arc control.

    u(t) = speed * (cos(phase + omega t), sin(phase + omega t), 1); the
    third component equals the horizontal speed, so the control rides the
    P1 cone boundary at all times.  omega < 0 turns clockwise.  A full
    turn (duration 2*pi/|omega|) returns (x, y) to its starting value and
    changes z by 2*pi*R + sign(omega)*pi*R^2 with R = speed/|omega|.
    """

    duration: float
    speed: float
    omega: float
    phase: float = 0.0

    def __post_init__(self):
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise ValueError("piece duration must be positive and finite")
        if not (self.speed > 0.0 and self.omega != 0.0):
            raise ValueError("arc needs positive speed and nonzero omega")

    @property
    def radius(self) -> float:
        return self.speed / abs(self.omega)

    def control(self, t: float) -> Control:
        ang = self.phase + self.omega * t
        return Control(self.speed * math.cos(ang), self.speed * math.sin(ang), self.speed)


@dataclass(frozen=True)
class FuncPiece:
    """Arbitrary time-parametrized control handle (not serializable)."""

    duration: float
    fn: Callable[[float], tuple[float, float, float]]

    def __post_init__(self):
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise ValueError("piece duration must be positive and finite")

    def control(self, t: float) -> Control:
        return Control(*self.fn(t))


SchedulePiece = Union[ConstantPiece, ArcPiece, FuncPiece]


@dataclass(frozen=True)
class ControlSchedule:
    """Ordered admissible control pieces for one problem."""

    problem: Problem
    pieces: tuple[SchedulePiece, ...]

    @property
    def total_duration(self) -> float:
        return sum(p.duration for p in self.pieces)

    def check_admissible(self) -> None:
        """Reject any piece that leaves the cone (sampled for non-constant)."""
        for i, piece in enumerate(self.pieces):
            if isinstance(piece, ConstantPiece):
                probes = (0.0,)
            else:
                probes = tuple(np.linspace(0.0, piece.duration, 17))
            for tp in probes:
                u = piece.control(tp)
                if classify_control(self.problem, u) is ConeClass.INADMISSIBLE:
                    raise AdmissibilityError(
                        f"piece {i} is inadmissible for {self.problem.name} "
                        f"at local time {tp}: u = {u.as_tuple()}"
                    )


def schedule_to_jsonable(sched: ControlSchedule) -> dict:
    pieces = []
    for piece in sched.pieces:
        if isinstance(piece, ConstantPiece):
            pieces.append(
                {"kind": "constant", "duration": piece.duration, "u": list(piece.u.as_tuple())}
            )
        elif isinstance(piece, ArcPiece):
            pieces.append(
                {
                    "kind": "arc",
                    "duration": piece.duration,
                    "speed": piece.speed,
                    "omega": piece.omega,
                    "phase": piece.phase,
                }
            )
        else:
            raise ValueError("function-handle pieces are not serializable")
    return {"problem": sched.problem.value, "pieces": pieces}


def schedule_from_jsonable(obj: dict) -> ControlSchedule:
    pieces = []
    for spec in obj["pieces"]:
        if spec["kind"] == "constant":
            pieces.append(ConstantPiece(spec["duration"], Control(*spec["u"])))
        elif spec["kind"] == "arc":
            pieces.append(
                ArcPiece(spec["duration"], spec["speed"], spec["omega"], spec["phase"])
            )
        else:
            raise ValueError(f"unknown piece kind {spec['kind']!r}")
    return ControlSchedule(Problem(obj["problem"]), tuple(pieces))


# ---------------------------------------------------------------------------
# Pontryagin-system integration
# ---------------------------------------------------------------------------

_FAMILY_CODE = {
    (Problem.P1, ExtremalKind.NORMAL): _kernels.P1_NORMAL,
    (Problem.P1, ExtremalKind.ABNORMAL): _kernels.P1_ABNORMAL,
    (Problem.P2, ExtremalKind.NORMAL): _kernels.P2_NORMAL,
    (Problem.P2, ExtremalKind.ABNORMAL): _kernels.P2_ABNORMAL,
}


def _check_covector_region(problem: Problem, kind: ExtremalKind, h: Covector) -> None:
    h1, h2, h3 = h.as_tuple()
    scale = max(1.0, h1 * h1 + h2 * h2 + h3 * h3)
    axial = h3 if problem is Problem.P1 else h1
    quad = conserved_form(problem, h1, h2, h3)
    past_quad = -quad if problem is Problem.P1 else quad
    # past_quad = (axial component)^2 - (rotating components)^2 in both cases
    if kind is ExtremalKind.NORMAL:
        if not (axial < 0.0 and past_quad > TAU_NORM * scale):
            raise ValueError(
                f"covector {h.as_tuple()} is not strictly past-timelike for "
                f"{problem.name} normal flow"
            )
    else:
        if problem is Problem.P1 and h1 * h1 + h2 * h2 < 1e-300:
            raise DegenerateCovectorError(
                "P1 abnormal flow undefined at h1 = h2 = 0"
            )
        if abs(past_quad) > 1e-9 * scale or axial > 0.0:
            raise ValueError(
                f"covector {h.as_tuple()} is not past-lightlike for "
                f"{problem.name} abnormal flow"
            )


def _controls_from_covectors(problem: Problem, kind: ExtremalKind, h: np.ndarray) -> np.ndarray:
    h1, h2, h3 = h[:, 0], h[:, 1], h[:, 2]
    if problem is Problem.P1:
        if kind is ExtremalKind.NORMAL:
            return np.column_stack([h1, h2, -h3])
        rho = np.hypot(h1, h2)
        return np.column_stack([h1 / rho, h2 / rho, np.ones_like(h1)])
    if kind is ExtremalKind.NORMAL:
        return np.column_stack([-h1, h2, h3])
    return np.column_stack([np.hypot(h2, h3), h2, h3])


def integrate_pontryagin(
    problem: Problem,
    kind: ExtremalKind,
    h0: Covector,
    T: float,
    cfg: IntegratorConfig,
) -> Trajectory:
    """RK4 trajectory of the coupled system from q = origin, h = h0.

    Controls are recorded at the sample times and J is accumulated by the
    same RK4 stages (augmented state).
    """
    if not (T >= 0.0 and math.isfinite(T)):
        raise ValueError(f"T must be finite and >= 0, got {T}")
    cfg.check_span(T)
    _check_covector_region(problem, kind, h0)
    case = _FAMILY_CODE[(problem, kind)]
    ts, ys = _kernels.rk4_extremal(
        case, h0.h1, h0.h2, h0.h3, float(T), cfg.step, cfg.record_every
    )
    q = ys[:, 0:3].copy()
    h = ys[:, 3:6].copy()
    J = ys[:, 6].copy()
    u = _controls_from_covectors(problem, kind, h)

    # The admissible region is invariant, so a genuine exit (sign flip,
    # blow-up, NaN) marks an integration failure.  Coarse steps merely
    # drift within the region and are reported through max_deviation, not
    # here.
    if not np.all(np.isfinite(ys)):
        raise RegionExitError("integration produced non-finite values")
    h1e, h2e, h3e = (float(v) for v in h[-1])
    axial = h3e if problem is Problem.P1 else h1e
    quad = conserved_form(problem, h1e, h2e, h3e)
    past_quad = -quad if problem is Problem.P1 else quad
    scale = max(1.0, h1e * h1e + h2e * h2e + h3e * h3e)
    if kind is ExtremalKind.NORMAL:
        exited = not (axial < 0.0 and past_quad > 0.0)
    else:
        exited = abs(past_quad) > 1e-2 * scale or axial > 0.0
    if exited:
        raise RegionExitError(
            f"covector left the admissible {problem.name} {kind.value} region: "
            f"h(T) = {(h1e, h2e, h3e)}"
        )
    return Trajectory(problem=problem, t=ts, q=q, u=u, J=J, h=h)


# ---------------------------------------------------------------------------
# Schedule integration
# ---------------------------------------------------------------------------


def _integrate_func_piece(problem, x0, y0, z0, J0, piece, step, record_every):
    """Pure-Python RK4 for function-handle pieces (test/diagnostic use)."""
    T = piece.duration
    n_full = int(math.floor(T / step + 1e-9))
    rem = T - n_full * step
    if rem <= 1e-12 * max(1.0, T):
        rem = 0.0
    n_total = n_full + (1 if rem > 0.0 else 0)

    def rate(u: Control) -> float:
        return length_integrand(problem, u)

    def rhs(state, tloc):
        u = piece.control(tloc)
        x, y, _, _ = state
        return np.array(
            [
                u.u1,
                u.u2,
                -0.5 * y * u.u1 + 0.5 * x * u.u2 + u.u3,
                rate(u),
            ]
        )

    y = np.array([x0, y0, z0, J0])
    ts = [0.0]
    ys = [y.copy()]
    for i in range(n_total):
        h = step if i < n_full else rem
        t = i * step
        k1 = rhs(y, t)
        k2 = rhs(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = rhs(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(y + h * k3, t + h)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        done = i + 1
        if (done <= n_full and done % record_every == 0) or done == n_total:
            ts.append(done * step if done <= n_full else T)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


def integrate_schedule(
    problem: Problem,
    q0: GroupPoint,
    schedule: ControlSchedule,
    cfg: IntegratorConfig,
) -> Trajectory:
    """Integrate the control system from q0 under an admissible schedule."""
    if schedule.problem is not problem:
        raise ValueError(
            f"schedule is for {schedule.problem.name}, asked to integrate {problem.name}"
        )
    schedule.check_admissible()
    cfg.check_span(schedule.total_duration)

    ts_out = [np.array([0.0])]
    q_out = [np.array([[q0.x, q0.y, q0.z]])]
    u_out = [np.array([schedule.pieces[0].control(0.0).as_tuple()]) if schedule.pieces else np.zeros((1, 3))]
    J_out = [np.array([0.0])]

    t_base = 0.0
    x, y, z, J = q0.x, q0.y, q0.z, 0.0
    for piece in schedule.pieces:
        if isinstance(piece, ConstantPiece):
            jrate = length_integrand(problem, piece.u)
            ts, ys = _kernels.rk4_schedule_piece(
                x, y, z, J,
                _kernels.PIECE_CONSTANT,
                piece.u.u1, piece.u.u2, piece.u.u3,
                jrate, piece.duration, cfg.step, cfg.record_every,
            )
        elif isinstance(piece, ArcPiece):
            jrate = length_integrand(problem, piece.control(0.0))
            ts, ys = _kernels.rk4_schedule_piece(
                x, y, z, J,
                _kernels.PIECE_ARC,
                piece.speed, piece.omega, piece.phase,
                jrate, piece.duration, cfg.step, cfg.record_every,
            )
        else:
            ts, ys = _integrate_func_piece(
                problem, x, y, z, J, piece, cfg.step, cfg.record_every
            )
        u_rows = np.array([piece.control(tl).as_tuple() for tl in ts[1:]])
        ts_out.append(t_base + ts[1:])
        q_out.append(ys[1:, 0:3])
        u_out.append(u_rows)
        J_out.append(ys[1:, 3])
        x, y, z, J = ys[-1, 0], ys[-1, 1], ys[-1, 2], ys[-1, 3]
        t_base += piece.duration

    return Trajectory(
        problem=problem,
        t=np.concatenate(ts_out),
        q=np.vstack(q_out),
        u=np.vstack(u_out),
        J=np.concatenate(J_out),
        h=None,
    )


# ---------------------------------------------------------------------------
# Trajectory comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeviationReport:
    """Max pointwise deviations between two trajectories on a shared grid."""

    state: float
    covector: Optional[float]


def compare_trajectories(a: Trajectory, b: Trajectory) -> DeviationReport:
    if a.problem is not b.problem:
        raise GridMismatchError("trajectories belong to different problems")
    if len(a) != len(b):
        raise GridMismatchError(f"grid sizes differ: {len(a)} vs {len(b)}")
    span = max(1.0, float(a.t[-1]))
    if float(np.max(np.abs(a.t - b.t))) > 1e-9 * span:
        raise GridMismatchError("time grids differ")
    state = float(np.max(np.linalg.norm(a.q - b.q, axis=1)))
    covector = None
    if a.h is not None and b.h is not None:
        covector = float(np.max(np.linalg.norm(a.h - b.h, axis=1)))
    return DeviationReport(state=state, covector=covector)


def max_deviation(a: Trajectory, b: Trajectory) -> float:
    """Max Euclidean state distance over a shared time grid."""
    return compare_trajectories(a, b).state
