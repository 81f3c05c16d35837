"""Left-invariant Lorentzian optimal control on the Heisenberg group.

Two problems share the group structure and differ by which axis carries
the causal cone (vertical for P1, first horizontal for P2).  The package
provides closed-form normal/abnormal extremals for both, a fixed-step RK4
oracle that re-derives every trajectory from the canonical dynamics, the
P2 attainable set in closed form, a constructive global-controllability
planner for P1, and a shooting solver that inverts the P2 exponential map
to compute Lorentzian distance.
"""

__version__ = "1.0.0"

from .group import (
    TAU_CONE,
    TAU_NORM,
    ConeClass,
    ConeViolationError,
    Control,
    Covector,
    GroupPoint,
    ORIGIN,
    Problem,
    canonical_components,
    classify_control,
    covector_from_canonical,
    frame_at,
    identity,
    inverse,
    left_translation_differential,
    length_integrand,
    multiply,
    pontryagin_value,
)
from .extremals import (
    ControlDecision,
    DecisionKind,
    DegenerateCovectorError,
    ExtremalKind,
    ExtremalSpec,
    NormalizationError,
    Trajectory,
    conserved_form,
    covector_flow,
    eval_abnormal_p1,
    eval_abnormal_p2,
    eval_normal_p1,
    eval_normal_p2,
    eval_spec,
    eval_spec_arrays,
    extremal_control,
    maximize_control,
    restarted_spec,
    sample_extremal,
)
from .oracle import (
    AdmissibilityError,
    ArcPiece,
    ConstantPiece,
    ControlSchedule,
    DeviationReport,
    FuncPiece,
    GridMismatchError,
    IntegratorConfig,
    RegionExitError,
    compare_trajectories,
    integrate_pontryagin,
    integrate_schedule,
    max_deviation,
    schedule_from_jsonable,
    schedule_to_jsonable,
)
from .reachability import (
    EPS_PLAN,
    Membership,
    PlannerError,
    TAU_BND,
    Verdict,
    boundary_time,
    closed_timelike_loop_p1,
    loop_delta_z,
    membership_p2,
    plan_reach_p1,
    shell_height,
)
from .bvp import (
    DistanceResult,
    DistanceVerdict,
    EPS_SHOOT,
    ShootingError,
    ShootingResult,
    TargetOutsideError,
    boundary_abnormal_spec,
    lorentz_distance,
    lorentz_distance_p2,
    shoot_p2,
)
from .verification import (
    DEVIATION_BUDGET,
    P2_LOG_RANGE,
    SweepResult,
    closed_form_on_grid,
    draw_spec,
    run_sweep,
)
from .discrepancies import LEDGER, entry_ids_for, ledger_jsonable
