"""Data-driven clustering of observations and the cluster shrinkage estimators.

A partition of the real line is given by strictly descending separators
s_1 > ... > s_{L-1} (with implicit s_0 = +inf and s_L = -inf); cluster j is
the half-open interval (s_j, s_{j-1}]. Each cluster is shrunk toward an
attractor a_j that approximates the within-cluster mean of theta via a
delta-window bias correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorOutput, check_observation, estimate_lindley, shrink_toward


@dataclass(frozen=True)
class Partition:
    """Strictly descending separators defining L = len(separators) + 1 clusters."""

    separators: np.ndarray

    def __post_init__(self):
        sep = np.asarray(self.separators, dtype=float)
        object.__setattr__(self, "separators", sep)
        if sep.ndim != 1:
            raise ValueError("separators must be a one-dimensional sequence")
        if sep.size > 1 and not np.all(np.diff(sep) < 0):
            raise ValueError("separators must be strictly descending")

    @property
    def n_clusters(self) -> int:
        return self.separators.size + 1


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster labels in 1..L for each observation plus per-cluster counts."""

    labels: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class AttractorSet:
    """Per-cluster attractors and the assembled attracting vector nu.

    boundary_counts[j-1] is B_j = #{i : |y_i - s_j| <= delta} for the j-th
    separator; the windows at the sentinels s_0 = +inf and s_L = -inf are
    empty. empty_clusters flags clusters with no observations (their
    attractor is 0 by convention and nu is unaffected).
    """

    attractors: np.ndarray
    delta: float
    boundary_counts: np.ndarray
    attracting_vector: np.ndarray
    empty_clusters: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def has_empty_cluster(self) -> bool:
        return bool(self.empty_clusters.any())


def default_delta(n: int) -> float:
    """Default half-width of the attractor bias-correction window, 5/sqrt(n)."""
    return 5.0 / np.sqrt(n)


def partition_two(y) -> Partition:
    """Two-cluster partition separated at the empirical mean of y."""
    y = np.asarray(y, dtype=float)
    return Partition(np.array([y.mean()]))


def assign_clusters(y, partition: Partition) -> ClusterAssignment:
    """Assign each y_i to the interval (s_j, s_{j-1}] containing it.

    A boundary value y_i = s_j joins the lower cluster j+1 (the "<=" side).
    """
    y = np.asarray(y, dtype=float)
    # separators are strictly descending, so negation is ascending
    ascending = -partition.separators
    labels = np.searchsorted(ascending, -y, side="right") + 1
    counts = np.bincount(labels, minlength=partition.n_clusters + 1)[1:]
    return ClusterAssignment(labels=labels, counts=counts)


def refine_partition(y, partition: Partition) -> Partition:
    """Double a partition by inserting each nonempty cluster's mean of y.

    The old separators are kept; the new separator for cluster j is the mean
    of the y_i falling in (s_j, s_{j-1}]. Empty clusters contribute no new
    separator, and coincident separators are deduplicated so the result stays
    strictly descending.
    """
    y = np.asarray(y, dtype=float)
    assignment = assign_clusters(y, partition)
    old = partition.separators
    refined = []
    for j in range(1, partition.n_clusters + 1):
        members = y[assignment.labels == j]
        if members.size > 0:
            refined.append(members.mean())
        if j <= old.size:
            refined.append(old[j - 1])
    deduped = np.unique(np.asarray(refined, dtype=float))[::-1]
    return Partition(deduped)


def build_partition(y, n_clusters: int) -> Partition:
    """Power-of-two partition: ybar for L=2, then repeated doubling refinement.

    L = 1 yields the trivial single-cluster partition. Degenerate inputs can
    produce fewer than n_clusters clusters after deduplication.
    """
    L = int(n_clusters)
    if L < 1 or (L & (L - 1)) != 0:
        raise ValueError("cluster count must be a power of two (1, 2, 4, 8, ...)")
    partition = Partition(np.array([]))
    while partition.n_clusters < L:
        refined = refine_partition(y, partition)
        if refined.n_clusters == partition.n_clusters:
            break  # degenerate data; refinement cannot split further
        partition = refined
    return partition


def compute_attractors(
    y, sigma: float, partition: Partition, assignment: ClusterAssignment, delta: float
) -> AttractorSet:
    """Attractors a_j = [sum_{C_j} y_i - (sigma^2/2delta)(B_j - B_{j-1})] / |C_j|.

    B_j counts observations within delta of separator s_j (B_0 = B_L = 0).
    An empty cluster gets attractor 0 and is flagged; its indicator column is
    all-zero so the attracting vector is unaffected.
    """
    y = check_observation(y, sigma)
    if delta <= 0:
        raise ValueError("delta must be positive")
    L = partition.n_clusters
    boundary_counts = np.array(
        [np.count_nonzero(np.abs(y - s) <= delta) for s in partition.separators], dtype=float
    )
    window = np.concatenate(([0.0], boundary_counts, [0.0]))  # B_0 .. B_L
    correction = sigma * sigma / (2.0 * delta)
    sums = np.bincount(assignment.labels, weights=y, minlength=L + 1)[1:]
    counts = assignment.counts.astype(float)
    empty = counts == 0
    attractors = np.zeros(L)
    occupied = ~empty
    attractors[occupied] = (
        sums[occupied] - correction * (window[1:] - window[:-1])[occupied]
    ) / counts[occupied]
    nu = attractors[assignment.labels - 1]
    return AttractorSet(
        attractors=attractors,
        delta=float(delta),
        boundary_counts=boundary_counts,
        attracting_vector=nu,
        empty_clusters=empty,
    )


@dataclass(frozen=True)
class ClusterEstimate:
    """Full cluster-estimator state: output plus the pieces that produced it."""

    output: EstimatorOutput
    partition: Partition
    assignment: ClusterAssignment
    attractors: AttractorSet


def estimate_with_partition(y, sigma: float, partition: Partition, delta: float) -> ClusterEstimate:
    """Cluster shrinkage estimator for an arbitrary explicit partition."""
    y = check_observation(y, sigma)
    assignment = assign_clusters(y, partition)
    attractors = compute_attractors(y, sigma, partition, assignment, delta)
    output = shrink_toward(y, sigma, attractors.attracting_vector)
    return ClusterEstimate(output, partition, assignment, attractors)


def estimate_cluster_js(y, sigma: float, n_clusters: int, delta: float | None = None) -> EstimatorOutput:
    """L-cluster James-Stein estimator for a power-of-two cluster count.

    L = 1 delegates to the positive-part Lindley estimator; L = 2 separates at
    ybar; larger powers of two refine by cluster-mean doubling. delta defaults
    to 5/sqrt(n).
    """
    y = check_observation(y, sigma)
    if int(n_clusters) == 1:
        return estimate_lindley(y, sigma, positive_part=True)
    if np.ptp(y) == 0.0:
        # All observations identical: no cluster structure exists, and the
        # delta-window correction would push the attractor off the data.
        return EstimatorOutput(estimate=y.copy(), shrinkage_factor=0.0, attracting_vector=y.copy())
    if delta is None:
        delta = default_delta(y.size)
    partition = build_partition(y, n_clusters)
    return estimate_with_partition(y, sigma, partition, delta).output
