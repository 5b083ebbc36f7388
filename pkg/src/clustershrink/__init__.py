"""Cluster-based shrinkage estimation for Gaussian sequence data.

Estimators that shrink an observation vector toward data-driven attracting
vectors: the classical spherical and mean-centered shrinkers, their
positive-part versions, cluster-mean shrinkage with a power-of-two number of
clusters, and a hybrid that picks the cluster count by estimated loss.
Companion modules compute the matching asymptotic theory, run seeded Monte
Carlo experiments, and emit the report figures.
"""

from .clustering import (
    AttractorSet,
    ClusterAssignment,
    ClusterEstimate,
    Partition,
    assign_clusters,
    build_partition,
    compute_attractors,
    default_delta,
    estimate_cluster_js,
    estimate_with_partition,
    partition_two,
    refine_partition,
)
from .estimators import (
    EstimatorOutput,
    check_observation,
    estimate_js,
    estimate_js_positive,
    estimate_lindley,
    estimate_ml,
    estimate_subspace_js,
    shrink_toward,
    variance_floor,
)
from .selection import (
    EmptyClusterError,
    HybridSelection,
    LossEstimate,
    loss_estimate_cluster,
    loss_estimate_lindley,
    select_hybrid,
)
from .simulate import (
    AggregateResult,
    ConcentrationReport,
    ConfigError,
    EstimatorStats,
    ExperimentConfig,
    SweepSpec,
    ThetaSpec,
    check_concentration,
    config_from_dict,
    generate_theta,
    load_config,
    run_experiment,
    sweep_experiment,
    write_csv,
)
from .theory import (
    TheoryConstants,
    asymptotic_loss,
    gamma_value,
    js_exact_risk_mc,
    q_complement,
    q_function,
    refine_separators,
    rho_value,
    theory_L_cluster,
    theory_two_cluster,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "AttractorSet",
    "ClusterAssignment",
    "ClusterEstimate",
    "ConcentrationReport",
    "ConfigError",
    "EmptyClusterError",
    "EstimatorOutput",
    "EstimatorStats",
    "ExperimentConfig",
    "HybridSelection",
    "LossEstimate",
    "Partition",
    "SweepSpec",
    "TheoryConstants",
    "ThetaSpec",
    "assign_clusters",
    "asymptotic_loss",
    "build_partition",
    "check_concentration",
    "check_observation",
    "compute_attractors",
    "config_from_dict",
    "default_delta",
    "estimate_cluster_js",
    "estimate_js",
    "estimate_js_positive",
    "estimate_lindley",
    "estimate_ml",
    "estimate_subspace_js",
    "estimate_with_partition",
    "gamma_value",
    "generate_theta",
    "js_exact_risk_mc",
    "load_config",
    "loss_estimate_cluster",
    "loss_estimate_lindley",
    "partition_two",
    "q_complement",
    "q_function",
    "refine_partition",
    "refine_separators",
    "rho_value",
    "run_experiment",
    "select_hybrid",
    "shrink_toward",
    "sweep_experiment",
    "theory_L_cluster",
    "theory_two_cluster",
    "variance_floor",
    "write_csv",
]
