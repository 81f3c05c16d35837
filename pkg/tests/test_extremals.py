import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from heislor import (
    Control,
    Covector,
    DecisionKind,
    DegenerateCovectorError,
    ExtremalKind,
    ExtremalSpec,
    GroupPoint,
    NormalizationError,
    Problem,
    Trajectory,
    classify_control,
    conserved_form,
    covector_flow,
    eval_abnormal_p1,
    eval_abnormal_p2,
    eval_normal_p1,
    eval_normal_p2,
    eval_spec,
    extremal_control,
    inverse,
    length_integrand,
    maximize_control,
    multiply,
    pontryagin_value,
    restarted_spec,
    sample_extremal,
)
from heislor.verification import draw_spec

FAMILIES = [
    (Problem.P1, ExtremalKind.NORMAL),
    (Problem.P1, ExtremalKind.ABNORMAL),
    (Problem.P2, ExtremalKind.NORMAL),
    (Problem.P2, ExtremalKind.ABNORMAL),
]


# -- Hamiltonian maximization ---------------------------------------------------


def test_maximize_p1_normal_unit_shell():
    dec = maximize_control(Problem.P1, Covector(0, 0, -1), -1.0)
    assert dec.kind is DecisionKind.MAXIMIZER
    assert dec.control == Control(0.0, 0.0, 1.0)
    assert dec.value == pytest.approx(1.0, abs=1e-12)


def test_maximize_p1_normal_inside_shell_trivial():
    dec = maximize_control(Problem.P1, Covector(0, 0, -2), -1.0)
    assert dec.kind is DecisionKind.TRIVIAL_ONLY


def test_maximize_p1_normal_future_covector_unbounded():
    dec = maximize_control(Problem.P1, Covector(0, 0, 1), -1.0)
    assert dec.kind is DecisionKind.NO_MAXIMUM


def test_maximize_p2_abnormal_ray():
    dec = maximize_control(Problem.P2, Covector(-1, 0, 1), 0.0)
    assert dec.kind is DecisionKind.RAY_OF_MAXIMIZERS
    assert dec.direction == Control(1.0, 0.0, 1.0)
    assert classify_control(Problem.P2, dec.direction) is not None


def test_maximize_p1_abnormal_spacelike_no_max():
    dec = maximize_control(Problem.P1, Covector(1, 0, 0), 0.0)
    assert dec.kind is DecisionKind.NO_MAXIMUM


def test_maximize_p1_abnormal_timelike_trivial():
    dec = maximize_control(Problem.P1, Covector(0.2, 0.1, -1.0), 0.0)
    assert dec.kind is DecisionKind.TRIVIAL_ONLY


def test_maximize_p2_normal_unit_shell():
    h = Covector(-math.sqrt(2.0), 1.0, 0.0)
    dec = maximize_control(Problem.P2, h, -1.0)
    assert dec.kind is DecisionKind.MAXIMIZER
    assert dec.control == Control(math.sqrt(2.0), 1.0, 0.0)
    assert dec.value == pytest.approx(1.0, abs=1e-12)


def _random_admissible(problem, rng, magnitude):
    # random controls in the problem's cone, boundary included
    beta = rng.uniform(0.0, 2.0 * math.pi)
    frac = rng.uniform(0.0, 1.0)
    axial = magnitude
    radial = frac * magnitude
    if problem is Problem.P1:
        return Control(radial * math.cos(beta), radial * math.sin(beta), axial)
    return Control(axial, radial * math.cos(beta), radial * math.sin(beta))


@pytest.mark.parametrize("problem", list(Problem))
def test_maximizer_attains_supremum_zero(problem):
    # independent check of the case analysis: the claimed maximum of the
    # Pontryagin function on the unit shell is 0, attained on the ray of
    # the returned control.
    rng = np.random.default_rng(11)
    for _ in range(20):
        w2, w3 = rng.uniform(-2, 2, size=2)
        head = -math.sqrt(1.0 + w2 * w2 + w3 * w3)
        h = Covector(w3, w2, head) if problem is Problem.P1 else Covector(head, w2, w3)
        dec = maximize_control(problem, h, -1.0)
        assert dec.kind is DecisionKind.MAXIMIZER
        at_max = pontryagin_value(problem, h, dec.control, -1.0)
        assert abs(at_max) <= 1e-12
        for _ in range(200):
            u = _random_admissible(problem, rng, rng.uniform(0.0, 8.0))
            assert pontryagin_value(problem, h, u, -1.0) <= 1e-12
        # positive multiples of the maximizer also attain the maximum
        for lam in (0.25, 3.0):
            scaled = Control(
                lam * dec.control.u1, lam * dec.control.u2, lam * dec.control.u3
            )
            assert abs(pontryagin_value(problem, h, scaled, -1.0)) <= 1e-12


def test_no_maximum_is_genuinely_unbounded():
    # in the NO_MAXIMUM cases a family of admissible controls drives the
    # Pontryagin function to +infty
    cases = [
        (Problem.P1, Covector(0, 0, 1), -1.0, Control(0, 0, 1)),
        (Problem.P1, Covector(2, 0, 1), -1.0, Control(2, 0, 2)),
        (Problem.P1, Covector(1, 0, 0), 0.0, Control(1, 0, 1)),
        (Problem.P2, Covector(0.5, 0, 0), -1.0, Control(1, 0, 0)),
    ]
    for problem, h, nu, direction in cases:
        assert maximize_control(problem, h, nu).kind is DecisionKind.NO_MAXIMUM
        small = pontryagin_value(problem, h, direction, nu)
        big_u = Control(1e6 * direction.u1, 1e6 * direction.u2, 1e6 * direction.u3)
        assert pontryagin_value(problem, h, big_u, nu) > max(1.0, small) * 1e5


def test_maximize_rejects_bad_multiplier():
    with pytest.raises(ValueError):
        maximize_control(Problem.P1, Covector(0, 0, -1), -0.5)


# -- covector flow ---------------------------------------------------------------


def test_flow_p1_normal_vertical_line():
    rhs = covector_flow(Problem.P1, ExtremalKind.NORMAL)
    qdot, hdot = rhs(GroupPoint(0, 0, 0), Covector(0, 0, -1))
    assert qdot == (0.0, 0.0, 1.0)
    assert hdot == (0.0, 0.0, 0.0)


def test_flow_p2_normal_horizontal_line():
    rhs = covector_flow(Problem.P2, ExtremalKind.NORMAL)
    qdot, hdot = rhs(GroupPoint(0, 0, 0), Covector(-1, 0, 0))
    assert qdot == (1.0, 0.0, 0.0)
    assert hdot == (0.0, 0.0, 0.0)


def test_flow_p2_abnormal_example():
    rhs = covector_flow(Problem.P2, ExtremalKind.ABNORMAL)
    u = extremal_control(Problem.P2, ExtremalKind.ABNORMAL, Covector(-1, 0, 1))
    assert_allclose(u.as_tuple(), (1.0, 0.0, 1.0), rtol=0, atol=1e-15)
    _, hdot = rhs(GroupPoint(0, 0, 0), Covector(-1, 0, 1))
    assert_allclose(hdot, (0.0, 1.0, 0.0), rtol=0, atol=1e-15)


def test_flow_p1_abnormal_degenerate_rejected():
    with pytest.raises(DegenerateCovectorError):
        extremal_control(Problem.P1, ExtremalKind.ABNORMAL, Covector(0, 0, -1))


@pytest.mark.parametrize("problem,kind", FAMILIES)
def test_closed_form_solves_flow(problem, kind):
    # finite-difference time derivative of the closed form must match the
    # flow's right-hand side
    rng = np.random.default_rng(hash((problem.value, kind.value)) % 2**32)
    rhs = covector_flow(problem, kind)
    eps = 1e-6
    for _ in range(50):
        spec = draw_spec(problem, kind, rng, t_max=5.0)
        t = rng.uniform(0.1, max(0.2, spec.t1 - 0.1))
        q, h, _ = eval_spec(spec, t)
        qp, hp, _ = eval_spec(spec, t + eps)
        qm, hm, _ = eval_spec(spec, t - eps)
        qdot_fd = [(p - m) / (2 * eps) for p, m in zip(qp.as_tuple(), qm.as_tuple())]
        hdot_fd = [(p - m) / (2 * eps) for p, m in zip(hp.as_tuple(), hm.as_tuple())]
        qdot, hdot = rhs(q, h)
        scale = 1.0 + max(abs(v) for v in (*q.as_tuple(), *h.as_tuple()))
        assert_allclose(qdot_fd, qdot, rtol=0, atol=1e-5 * scale)
        assert_allclose(hdot_fd, hdot, rtol=0, atol=1e-5 * scale)


# -- closed-form families ----------------------------------------------------------


def test_p1_abnormal_start_and_period():
    q0, h0, u0 = eval_abnormal_p1(0.0, 0.0)
    assert q0 == GroupPoint(0.0, 0.0, 0.0)
    assert h0 == Covector(1.0, 0.0, -1.0)
    assert u0 == Control(1.0, 0.0, 1.0)
    q, _, _ = eval_abnormal_p1(0.0, 2.0 * math.pi)
    assert_allclose((q.x, q.y), (0.0, 0.0), rtol=0, atol=1e-12)
    assert_allclose(q.z, math.pi, rtol=1e-15)


def test_p1_abnormal_height_any_phase():
    rng = np.random.default_rng(1)
    for _ in range(20):
        theta0 = rng.uniform(0, 2 * math.pi)
        t = rng.uniform(0, 10)
        q, _, u = eval_abnormal_p1(theta0, t)
        assert_allclose(q.z, 0.5 * (t + math.sin(t)), rtol=1e-13, atol=1e-13)
        # unit circle in (x, y)
        r = math.hypot(q.x - math.sin(theta0), q.y + math.cos(theta0))
        assert_allclose(r, 1.0, rtol=1e-12)
        assert length_integrand(Problem.P1, u) == 0.0


def test_p1_normal_vertical_line_at_a0():
    for t in (0.0, 1.3, 5.0):
        q, h, u = eval_normal_p1(0.7, 0.0, t)
        assert_allclose((q.x, q.y, q.z), (0.0, 0.0, t), rtol=0, atol=1e-15)
        assert u == Control(0.0, 0.0, 1.0)
        assert h == Covector(0.0, 0.0, -1.0)


def test_p1_normal_covector_normalization_exact():
    rng = np.random.default_rng(2)
    for _ in range(30):
        theta0, a, t = rng.uniform(0, 6), rng.uniform(-2, 2), rng.uniform(0, 10)
        _, h, _ = eval_normal_p1(theta0, a, t)
        assert_allclose(h.h3**2 - h.h1**2 - h.h2**2, 1.0, rtol=0, atol=1e-12)


def test_p2_abnormal_examples():
    q, _, u = eval_abnormal_p2(0.0, 1.0, 1.0)
    assert_allclose(
        q.as_tuple(),
        (math.sinh(1.0), math.cosh(1.0) - 1.0, 0.5 * (1.0 + math.sinh(1.0))),
        rtol=1e-15,
    )
    assert length_integrand(Problem.P2, u) == 0.0
    q, _, _ = eval_abnormal_p2(1.0, 0.0, 2.0)
    assert q == GroupPoint(2.0, 2.0, 0.0)


def test_p2_abnormal_lightlike_all_times():
    rng = np.random.default_rng(3)
    for _ in range(30):
        h2_0, h3 = rng.uniform(-2, 2), rng.uniform(-2, 2)
        t = rng.uniform(0, 4)
        _, h, u = eval_abnormal_p2(h2_0, h3, t)
        assert_allclose(u.u1, math.hypot(u.u2, u.u3), rtol=1e-14)
        assert length_integrand(Problem.P2, u) == 0.0
        # covector stays lightlike with h1 < 0
        assert_allclose(h.h1, -math.hypot(h.h2, h.h3), rtol=1e-13)


def test_p2_normal_straight_line():
    q, _, u = eval_normal_p2(-1.0, 0.0, 0.0, 3.0)
    assert q == GroupPoint(3.0, 0.0, 0.0)
    assert u == Control(1.0, 0.0, 0.0)


def test_p2_normal_small_h3_limit():
    h2_0 = 1.0
    h1_0 = -math.sqrt(2.0)
    qs, _, _ = eval_normal_p2(h1_0, h2_0, 1e-6 * math.sqrt(1.0 - 1e-12), 1.0)
    # the tiny-h3 covector is renormalized onto the unit shell
    h3 = math.sqrt(h1_0**2 - h2_0**2 - 1.0)
    assert h3 == pytest.approx(0.0, abs=2e-6)
    assert_allclose((qs.x, qs.y), (math.sqrt(2.0), 1.0), rtol=0, atol=1e-5)


def test_p2_normal_rejects_bad_normalization():
    with pytest.raises(NormalizationError):
        eval_normal_p2(-2.0, 0.0, 0.0, 1.0)
    with pytest.raises(NormalizationError):
        eval_normal_p2(1.0, 0.0, 0.0, 1.0)  # h1 must be negative


# -- sampling ---------------------------------------------------------------------


def test_sample_vertical_line_length():
    traj = sample_extremal(ExtremalSpec.p1_normal(0.0, 0.0, 5.0), 6)
    assert len(traj) == 6
    assert traj.total_length == 5.0
    assert_allclose(traj.q[-1], (0.0, 0.0, 5.0), rtol=0, atol=1e-15)


def test_sample_abnormal_zero_length():
    traj = sample_extremal(ExtremalSpec.p2_abnormal(0.7, -1.2, 3.0), 50)
    assert np.all(traj.J == 0.0)


def test_sample_p1_normal_hamiltonian_level():
    traj = sample_extremal(ExtremalSpec.p1_normal(0.0, 1.0, 2.0), 33)
    ham = 0.5 * (traj.h[:, 0] ** 2 + traj.h[:, 1] ** 2 - traj.h[:, 2] ** 2)
    assert_allclose(ham, -0.5, rtol=0, atol=1e-12)


def test_sample_requires_two_points():
    with pytest.raises(ValueError):
        sample_extremal(ExtremalSpec.p1_abnormal(0.0, 1.0), 1)


@pytest.mark.parametrize("problem,kind", FAMILIES)
def test_conservation_along_samples(problem, kind):
    rng = np.random.default_rng(hash(("cons", problem.value, kind.value)) % 2**32)
    for _ in range(20):
        spec = draw_spec(problem, kind, rng)
        traj = sample_extremal(spec, 101)
        h1, h2, h3 = traj.h[:, 0], traj.h[:, 1], traj.h[:, 2]
        assert np.max(np.abs(h3 - h3[0])) <= 1e-10
        form = conserved_form(problem, h1, h2, h3)
        assert np.max(np.abs(form - form[0])) <= 1e-10 * max(1.0, abs(form[0]))


@pytest.mark.parametrize("problem", list(Problem))
def test_normal_samples_stay_on_unit_shell_for_maximization(problem):
    rng = np.random.default_rng(4)
    for _ in range(5):
        spec = draw_spec(problem, ExtremalKind.NORMAL, rng, t_max=5.0)
        traj = sample_extremal(spec, 41)
        for row in traj.h:
            dec = maximize_control(problem, Covector(*row), -1.0)
            assert dec.kind is DecisionKind.MAXIMIZER
            assert dec.value == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("problem,kind", FAMILIES)
def test_restart_translates_tail(problem, kind):
    rng = np.random.default_rng(hash(("restart", problem.value, kind.value)) % 2**32)
    for _ in range(10):
        spec = draw_spec(problem, kind, rng, t_max=4.0)
        t_mid = 0.5 * spec.t1
        tail_spec = restarted_spec(spec, t_mid)
        q_mid, _, _ = eval_spec(spec, t_mid)
        for frac in (0.25, 0.7, 1.0):
            s = frac * tail_spec.t1
            q_tail, _, _ = eval_spec(tail_spec, s)
            q_expected, _, _ = eval_spec(spec, t_mid + s)
            q_glued = multiply(q_mid, q_tail)
            assert_allclose(
                q_glued.as_tuple(), q_expected.as_tuple(), rtol=0, atol=1e-8
            )


def test_p2_abnormal_endpoints_on_shell_identity():
    rng = np.random.default_rng(5)
    for _ in range(50):
        h2_0 = rng.uniform(-3, 3)
        h3 = rng.uniform(0.2, 3) * (1 if rng.uniform() < 0.5 else -1)
        t = rng.uniform(0.1, 5.0 / abs(h3))
        q, _, _ = eval_abnormal_p2(h2_0, h3, t)
        big_t = math.acosh(0.5 * (q.x**2 - q.y**2) + 1.0)
        assert_allclose(abs(q.z), 0.5 * (big_t + math.sinh(big_t)), rtol=0, atol=1e-9)


# -- spec and trajectory validation --------------------------------------------


def test_spec_requires_family_parameters():
    with pytest.raises(ValueError):
        ExtremalSpec(Problem.P1, ExtremalKind.NORMAL, 1.0, theta0=0.0)  # no a
    with pytest.raises(ValueError):
        ExtremalSpec(Problem.P2, ExtremalKind.ABNORMAL, 1.0, h2_0=0.0)  # no h3
    with pytest.raises(NormalizationError):
        ExtremalSpec.p2_normal(-1.0, 1.0, 1.0, 1.0)


def test_spec_initial_covector_matches_eval():
    rng = np.random.default_rng(6)
    for problem, kind in FAMILIES:
        spec = draw_spec(problem, kind, rng)
        _, h0, _ = eval_spec(spec, 0.0)
        assert_allclose(
            spec.initial_covector().as_tuple(), h0.as_tuple(), rtol=0, atol=1e-12
        )


def test_trajectory_rejects_bad_grids():
    t = np.array([0.0, 1.0, 0.5])
    q = np.zeros((3, 3))
    u = np.zeros((3, 3))
    J = np.zeros(3)
    with pytest.raises(ValueError):
        Trajectory(problem=Problem.P1, t=t, q=q, u=u, J=J)
    with pytest.raises(ValueError):
        Trajectory(
            problem=Problem.P1,
            t=np.array([0.0, 1.0, 2.0]),
            q=q,
            u=u,
            J=np.array([0.0, 1.0, 0.5]),
        )


def test_trajectory_is_immutable():
    traj = sample_extremal(ExtremalSpec.p1_abnormal(0.0, 1.0), 5)
    with pytest.raises(ValueError):
        traj.q[0, 0] = 1.0
