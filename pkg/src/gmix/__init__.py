"""Exact-recovery experiments for Gaussian mixture community models."""

from __future__ import annotations

from .assignment import (
    Assignment,
    ConfusionMatrix,
    confusion,
    cycle_swap,
    distance,
    find_cycle,
    greedy_move_path,
    in_omega_c,
    is_equivalent,
    label_bijection,
    triple_confusion,
)
from .errors import BudgetExceeded, ConfigError, DimensionMismatch, GmixError, ModelError
from .experiment import ExperimentConfig, TrialRecord, report, run, wilson_interval
from .gaussmax import GaussMaxBound, bound, lower_condition_holds, normal_sf, tail_bounds, verify_mc
from .mle import FixedSizes, FractionFloor, MleResult, MleSolver, recovered, solve_check, solve_hat
from .model import (
    CommunityIndicator,
    CommunitySigma,
    ConstantSigma,
    HypergraphPhi,
    LabelDifference,
    MatrixSigma,
    ModelSpec,
    TableDriven,
    VertexIndicator,
    build_signal,
    is_theta_preserving,
    phi_field,
)
from .observation import (
    ObservationMatrix,
    ObservationShape,
    RngSeed,
    l_phi,
    objective,
    objective_gap,
    observe,
    residual_norm,
    sample_noise,
)
from .thresholds import (
    BEpsilonParams,
    PerturbedAssignment,
    ThresholdReport,
    b_epsilon_membership,
    single_move_drops,
    delta_hypergraph,
    impossibility_margin_check,
    impossibility_margin_hat,
    recovery_report,
    t_n_hypergraph,
)

__version__ = "0.1.0"
