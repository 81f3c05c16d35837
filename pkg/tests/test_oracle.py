import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from heislor import (
    AdmissibilityError,
    ArcPiece,
    ConstantPiece,
    Control,
    ControlSchedule,
    Covector,
    ExtremalKind,
    ExtremalSpec,
    FuncPiece,
    GridMismatchError,
    GroupPoint,
    IntegratorConfig,
    ORIGIN,
    Problem,
    RegionExitError,
    Trajectory,
    compare_trajectories,
    conserved_form,
    covector_flow,
    eval_abnormal_p1,
    eval_abnormal_p2,
    eval_normal_p1,
    integrate_pontryagin,
    integrate_schedule,
    max_deviation,
    multiply,
    schedule_from_jsonable,
    schedule_to_jsonable,
)
from heislor import _kernels
from heislor.verification import closed_form_on_grid

FINE = IntegratorConfig(step=1e-4, record_every=100)


# -- integrate_pontryagin ------------------------------------------------------


def test_vertical_line_endpoint():
    traj = integrate_pontryagin(
        Problem.P1, ExtremalKind.NORMAL, Covector(0, 0, -1), 1.0, FINE
    )
    assert_allclose(traj.endpoint.as_tuple(), (0.0, 0.0, 1.0), rtol=0, atol=1e-10)
    assert_allclose(traj.total_length, 1.0, rtol=0, atol=1e-12)


def test_oracle_matches_p1_normal_closed_form():
    spec = ExtremalSpec.p1_normal(0.0, 1.0, 1.0)
    traj = integrate_pontryagin(
        Problem.P1, ExtremalKind.NORMAL, spec.initial_covector(), 1.0, FINE
    )
    q, _, _ = (closed_form_on_grid(spec, traj.t).endpoint, None, None)
    end = eval_normal_p1(0.0, 1.0, 1.0)[0]
    assert math.dist(traj.endpoint.as_tuple(), end.as_tuple()) <= 1e-8


def test_oracle_matches_p2_abnormal_closed_form():
    traj = integrate_pontryagin(
        Problem.P2, ExtremalKind.ABNORMAL, Covector(-1, 0, 1), 1.0, FINE
    )
    end = eval_abnormal_p2(0.0, 1.0, 1.0)[0]
    assert math.dist(traj.endpoint.as_tuple(), end.as_tuple()) <= 1e-8


def test_pontryagin_rejects_wrong_region():
    with pytest.raises(ValueError):
        # future-pointing covector is outside the normal region
        integrate_pontryagin(Problem.P1, ExtremalKind.NORMAL, Covector(0, 0, 1), 1.0, FINE)
    with pytest.raises(ValueError):
        # lightlike covector is not in the normal (strictly timelike) region
        integrate_pontryagin(Problem.P1, ExtremalKind.NORMAL, Covector(1, 0, -1), 1.0, FINE)
    with pytest.raises(ValueError):
        # timelike covector is not in the abnormal (lightlike) region
        integrate_pontryagin(Problem.P1, ExtremalKind.ABNORMAL, Covector(0.1, 0, -1), 1.0, FINE)


def test_pontryagin_respects_max_steps():
    cfg = IntegratorConfig(step=1e-4, max_steps=100)
    with pytest.raises(ValueError):
        integrate_pontryagin(Problem.P1, ExtremalKind.NORMAL, Covector(0, 0, -1), 1.0, cfg)


def test_kernel_matches_python_flow_single_step():
    # the compiled RHS and the reference covector_flow must agree exactly
    rng = np.random.default_rng(12)
    for problem, kind, case in [
        (Problem.P1, ExtremalKind.NORMAL, _kernels.P1_NORMAL),
        (Problem.P1, ExtremalKind.ABNORMAL, _kernels.P1_ABNORMAL),
        (Problem.P2, ExtremalKind.NORMAL, _kernels.P2_NORMAL),
        (Problem.P2, ExtremalKind.ABNORMAL, _kernels.P2_ABNORMAL),
    ]:
        rhs = covector_flow(problem, kind)
        for _ in range(20):
            state = rng.uniform(-2, 2, size=6)
            state[5] = -abs(state[5]) if problem is Problem.P1 else state[5]
            q = GroupPoint(*state[:3])
            h = Covector(*state[3:])
            if problem is Problem.P1 and abs(h.h1) + abs(h.h2) < 1e-6:
                continue
            qdot, hdot = rhs(q, h)
            dy = np.empty(7)
            y = np.concatenate([state, [0.0]])
            _kernels._extremal_rhs(case, y, dy)
            assert_allclose(dy[:3], qdot, rtol=0, atol=1e-14)
            assert_allclose(dy[3:6], hdot, rtol=0, atol=1e-14)


# -- integrate_schedule ---------------------------------------------------------


def test_constant_vertical_schedule():
    sched = ControlSchedule(Problem.P1, (ConstantPiece(2.0, Control(0, 0, 1)),))
    traj = integrate_schedule(Problem.P1, ORIGIN, sched, IntegratorConfig(step=1e-3))
    assert_allclose(traj.endpoint.as_tuple(), (0.0, 0.0, 2.0), rtol=0, atol=1e-12)
    assert_allclose(traj.total_length, 2.0, rtol=0, atol=1e-12)


def test_constant_lightlike_schedule():
    sched = ControlSchedule(Problem.P1, (ConstantPiece(1.0, Control(1, 0, 1)),))
    traj = integrate_schedule(Problem.P1, ORIGIN, sched, IntegratorConfig(step=1e-3))
    assert_allclose(traj.endpoint.as_tuple(), (1.0, 0.0, 1.0), rtol=0, atol=1e-12)
    assert traj.total_length == 0.0


def test_schedule_traces_abnormal_circle():
    # feeding the closed-form abnormal control into the plain control
    # system reproduces the closed-form trajectory
    def u_of_t(t):
        return eval_abnormal_p1(0.3, t)[2].as_tuple()

    sched = ControlSchedule(Problem.P1, (FuncPiece(2.0, u_of_t),))
    traj = integrate_schedule(Problem.P1, ORIGIN, sched, IntegratorConfig(step=1e-3))
    end = eval_abnormal_p1(0.3, 2.0)[0]
    assert math.dist(traj.endpoint.as_tuple(), end.as_tuple()) <= 1e-8
    assert traj.total_length <= 1e-12


def test_schedule_rejects_inadmissible_piece():
    sched = ControlSchedule(Problem.P1, (ConstantPiece(1.0, Control(2, 0, 1)),))
    with pytest.raises(AdmissibilityError):
        integrate_schedule(Problem.P1, ORIGIN, sched, IntegratorConfig())
    # an arc is lightlike for P1 but not for P2
    arc = ArcPiece(1.0, speed=1.0, omega=1.0, phase=0.3)
    with pytest.raises(AdmissibilityError):
        integrate_schedule(Problem.P2, ORIGIN, ControlSchedule(Problem.P2, (arc,)), IntegratorConfig())


def test_schedule_problem_mismatch():
    sched = ControlSchedule(Problem.P1, (ConstantPiece(1.0, Control(0, 0, 1)),))
    with pytest.raises(ValueError):
        integrate_schedule(Problem.P2, ORIGIN, sched, IntegratorConfig())


def test_schedule_concatenation_is_group_translation():
    # endpoint of (s1 then s2 from origin) = endpoint(s1) * endpoint(s2)
    rng = np.random.default_rng(8)
    cfg = IntegratorConfig(step=1e-3)
    for _ in range(10):
        u1 = _random_timelike(rng)
        u2 = _random_timelike(rng)
        d1, d2 = rng.uniform(0.3, 1.5, size=2)
        s1 = ControlSchedule(Problem.P1, (ConstantPiece(d1, u1),))
        s2 = ControlSchedule(Problem.P1, (ConstantPiece(d2, u2),))
        s12 = ControlSchedule(Problem.P1, (ConstantPiece(d1, u1), ConstantPiece(d2, u2)))
        e1 = integrate_schedule(Problem.P1, ORIGIN, s1, cfg).endpoint
        e2 = integrate_schedule(Problem.P1, ORIGIN, s2, cfg).endpoint
        e12 = integrate_schedule(Problem.P1, ORIGIN, s12, cfg).endpoint
        assert_allclose(
            e12.as_tuple(), multiply(e1, e2).as_tuple(), rtol=0, atol=1e-9
        )


def _random_timelike(rng):
    a, b = rng.uniform(-1, 1, size=2)
    return Control(a, b, math.hypot(a, b) + rng.uniform(0.1, 1.0))


def test_schedule_json_roundtrip():
    sched = ControlSchedule(
        Problem.P1,
        (
            ConstantPiece(1.5, Control(0.0, 0.0, 1.0)),
            ArcPiece(6.0, speed=1.0, omega=-0.5, phase=0.25),
        ),
    )
    doc = schedule_to_jsonable(sched)
    back = schedule_from_jsonable(doc)
    assert back == sched
    with pytest.raises(ValueError):
        schedule_to_jsonable(
            ControlSchedule(Problem.P1, (FuncPiece(1.0, lambda t: (0, 0, 1)),))
        )


# -- deviation measurement ------------------------------------------------------


def test_max_deviation_identical_is_zero():
    spec = ExtremalSpec.p1_normal(0.2, 0.7, 2.0)
    traj = integrate_pontryagin(
        Problem.P1, ExtremalKind.NORMAL, spec.initial_covector(), 2.0, FINE
    )
    assert max_deviation(traj, traj) == 0.0


def test_max_deviation_reports_covectors():
    spec = ExtremalSpec.p2_normal_from(0.5, 1.0, 2.0)
    traj = integrate_pontryagin(
        Problem.P2, ExtremalKind.NORMAL, spec.initial_covector(), 2.0, FINE
    )
    closed = closed_form_on_grid(spec, traj.t)
    report = compare_trajectories(traj, closed)
    assert report.state <= 1e-10
    assert report.covector is not None and report.covector <= 1e-10


def test_max_deviation_time_reversal_positive():
    spec = ExtremalSpec.p1_normal(0.0, 1.0, 2.0)
    traj = closed_form_on_grid(spec, np.linspace(0.0, 2.0, 21))
    reversed_traj = Trajectory(
        problem=traj.problem,
        t=traj.t.copy(),
        q=traj.q[::-1].copy(),
        u=traj.u[::-1].copy(),
        J=np.zeros_like(traj.J),
        h=None,
    )
    assert max_deviation(traj, reversed_traj) > 0.1


def test_max_deviation_grid_mismatch():
    a = closed_form_on_grid(ExtremalSpec.p1_abnormal(0.0, 1.0), np.linspace(0, 1, 11))
    b = closed_form_on_grid(ExtremalSpec.p1_abnormal(0.0, 1.0), np.linspace(0, 1, 12))
    with pytest.raises(GridMismatchError):
        max_deviation(a, b)
    c = closed_form_on_grid(ExtremalSpec.p2_abnormal(0.0, 1.0, 1.0), np.linspace(0, 1, 11))
    with pytest.raises(GridMismatchError):
        max_deviation(a, c)


# -- integrator quality ----------------------------------------------------------


def test_rk4_order_under_step_halving():
    spec = ExtremalSpec.p2_normal_from(0.8, 1.2, 3.0)
    devs = []
    for step, rec in ((0.04, 1), (0.02, 2), (0.01, 4)):
        cfg = IntegratorConfig(step=step, record_every=rec)
        traj = integrate_pontryagin(
            Problem.P2, ExtremalKind.NORMAL, spec.initial_covector(), spec.t1, cfg
        )
        devs.append(max_deviation(traj, closed_form_on_grid(spec, traj.t)))
    for coarse, fine in zip(devs, devs[1:]):
        assert 12.0 <= coarse / fine <= 20.0


@pytest.mark.parametrize(
    "spec,problem,kind",
    [
        (ExtremalSpec.p1_normal(0.3, 2.0, 10.0), Problem.P1, ExtremalKind.NORMAL),
        (ExtremalSpec.p2_normal_from(0.3, 0.55, 10.0), Problem.P2, ExtremalKind.NORMAL),
        (ExtremalSpec.p1_abnormal(0.4, 10.0), Problem.P1, ExtremalKind.ABNORMAL),
        (ExtremalSpec.p2_abnormal(0.5, 0.5, 10.0), Problem.P2, ExtremalKind.ABNORMAL),
    ],
)
def test_conserved_form_drift_over_long_run(spec, problem, kind):
    cfg = IntegratorConfig(step=1e-3, record_every=100)
    traj = integrate_pontryagin(problem, kind, spec.initial_covector(), 10.0, cfg)
    form = conserved_form(problem, traj.h[:, 0], traj.h[:, 1], traj.h[:, 2])
    assert np.max(np.abs(form - form[0])) <= 1e-9
    assert np.max(np.abs(traj.h[:, 2] - traj.h[0, 2])) == 0.0


def test_partial_final_step_hits_duration():
    # T not a multiple of the step still ends exactly at T
    cfg = IntegratorConfig(step=1e-3, record_every=10)
    traj = integrate_pontryagin(
        Problem.P1, ExtremalKind.NORMAL, Covector(0, 0, -1), 0.12345, cfg
    )
    assert traj.t[-1] == pytest.approx(0.12345, abs=1e-15)
    assert_allclose(traj.endpoint.as_tuple(), (0, 0, 0.12345), rtol=0, atol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(order="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(record_every=0)
