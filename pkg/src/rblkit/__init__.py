"""Rigid body localization and tracking toolkit.

Simulates wireless range/angle/range-rate measurements between anchors and
multi-node rigid bodies, estimates 6D pose and velocity via algebraic,
iterative least-squares, and message-passing methods, completes partially
observed distance matrices, and benchmarks everything against Cramer-Rao
lower bounds.
"""

from .bounds import (
    CrlbReport,
    PlacementScore,
    crlb_sweep,
    fim_ranges,
    frame_potential,
    placement_score,
)
from .completion import CompletionReport, complete_edm, gram_from_edm, zero_imputed
from .estimators import (
    NodeFix,
    PoseEstimate,
    SemanticHeading,
    estimate_pose_gabp,
    estimate_pose_mds,
    estimate_pose_nls,
    estimate_relative_pose,
    multilaterate_node,
    procrustes,
    semantic_error,
    semantic_transform,
)
from .geometry import (
    Conformation,
    Pose,
    RigidBodyState,
    Twist,
    apply_pose,
    compose_poses,
    inverse_pose,
    node_velocities,
    propagate_state,
    rotation_error_deg,
    so3_exp,
    so3_log,
    so3_project,
)
from .harness import (
    BlockageSpec,
    ExperimentConfig,
    PoseDistribution,
    ResultRow,
    ScenarioConfig,
    derive_seed,
    generate_trajectory,
    load_experiment,
    load_scenario,
    preset,
    rows_to_csv,
    run_benchmark,
    run_scenario_once,
    run_trial,
)
from .measurement import (
    AnchorSet,
    BernoulliBlockage,
    ConvexHullBlockage,
    Edm,
    ExplicitBlockage,
    MeasurementSet,
    NoiseModel,
    apply_blockage,
    assemble_edm,
    simulate_adoa,
    simulate_aoa,
    simulate_measurements,
    simulate_range_rates,
    simulate_ranges,
)
from .tracking import (
    MeasurementFrame,
    TrackConfig,
    TrackFrame,
    estimate_twist,
    track_sequence,
)

__version__ = "0.1.0"
