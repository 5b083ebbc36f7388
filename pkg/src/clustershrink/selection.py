"""Data-driven loss estimates and hybrid selection among cluster estimators.

Each candidate L-cluster estimator gets a plug-in estimate of its normalized
loss computed from y alone; the hybrid estimator evaluates every candidate on
the same observation and returns the one with the smallest estimated loss
(ties go to the smallest L).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import (
    ClusterEstimate,
    build_partition,
    default_delta,
    estimate_with_partition,
)
from .estimators import EstimatorOutput, check_observation, estimate_lindley, variance_floor


class EmptyClusterError(ValueError):
    """Raised when a cluster loss estimate is undefined because a cluster is empty."""


@dataclass(frozen=True)
class LossEstimate:
    """Estimated normalized loss per candidate L, plus ineligible candidates."""

    per_candidate: dict[int, float]
    ineligible: frozenset[int]


@dataclass(frozen=True)
class HybridSelection:
    """Outcome of hybrid selection: the chosen L and its 0/1 candidate weights."""

    chosen: int
    gamma_weights: dict[int, int]
    losses: LossEstimate


def loss_estimate_lindley(y, sigma: float) -> float:
    """Estimated normalized loss of the positive-part Lindley estimator.

    sigma^2 (1 - sigma^2 / g(||y - ybar 1||^2 / n)), always in [0, sigma^2).
    """
    y = check_observation(y, sigma)
    centered = y - y.mean()
    mean_sq = float(centered @ centered) / y.size
    return sigma * sigma * (1.0 - sigma * sigma / variance_floor(mean_sq, sigma))


def loss_estimate_cluster(y, sigma: float, n_clusters: int, delta: float | None = None) -> float:
    """Estimated normalized loss of the L-cluster estimator (L >= 2).

    sigma^2 (||y - nu||^2/n - sigma^2 + (sigma^2/(n delta)) sum_j a_j (B_j -
    B_{j-1})) / g(||y - nu||^2/n), clamped to >= 0. Raises EmptyClusterError
    when any cluster is empty (the candidate is then ineligible).
    """
    y = check_observation(y, sigma)
    if int(n_clusters) < 2:
        raise ValueError("cluster loss estimates require L >= 2")
    if delta is None:
        delta = default_delta(y.size)
    partition = build_partition(y, n_clusters)
    state = estimate_with_partition(y, sigma, partition, delta)
    return _loss_from_state(y, sigma, state, delta)


def _loss_from_state(y: np.ndarray, sigma: float, state: ClusterEstimate, delta: float) -> float:
    att = state.attractors
    if att.has_empty_cluster:
        raise EmptyClusterError("loss estimate undefined: a cluster is empty")
    n = y.size
    residual = y - att.attracting_vector
    mean_sq = float(residual @ residual) / n
    window = np.concatenate(([0.0], att.boundary_counts, [0.0]))
    window_sum = float(att.attractors @ (window[1:] - window[:-1]))
    s2 = sigma * sigma
    raw = s2 * (mean_sq - s2 + s2 / (n * delta) * window_sum) / variance_floor(mean_sq, sigma)
    # The concentrating value is nonnegative; negativity is finite-n noise.
    return max(0.0, raw)


def select_hybrid(
    y, sigma: float, candidates=(1, 2, 4), delta: float | None = None
) -> tuple[HybridSelection, EstimatorOutput]:
    """Hybrid estimator: evaluate all candidate loss estimates, pick the argmin.

    Candidates are cluster counts (1 means the positive-part Lindley
    estimator). Ties favor the smallest L. Candidates whose partition has an
    empty cluster are ineligible; if every candidate is ineligible the
    selection falls back to L = 1.
    """
    y = check_observation(y, sigma)
    labels = sorted({int(c) for c in candidates})
    if not labels:
        raise ValueError("candidates must be nonempty")
    if labels[0] < 1:
        raise ValueError("candidates must be >= 1")
    if delta is None:
        delta = default_delta(y.size)

    estimates: dict[int, float] = {}
    outputs: dict[int, EstimatorOutput] = {}
    ineligible: set[int] = set()
    for L in labels:
        if L == 1:
            estimates[1] = loss_estimate_lindley(y, sigma)
            outputs[1] = estimate_lindley(y, sigma, positive_part=True)
            continue
        state = estimate_with_partition(y, sigma, build_partition(y, L), delta)
        try:
            estimates[L] = _loss_from_state(y, sigma, state, delta)
        except EmptyClusterError:
            ineligible.add(L)
            continue
        outputs[L] = state.output

    eligible = [L for L in labels if L not in ineligible]
    if eligible:
        chosen = min(eligible, key=lambda L: (estimates[L], L))
    else:
        chosen = 1
        estimates[1] = loss_estimate_lindley(y, sigma)
        outputs[1] = estimate_lindley(y, sigma, positive_part=True)
    weights = {L: int(L == chosen) for L in sorted(set(labels) | {chosen})}
    selection = HybridSelection(
        chosen=chosen,
        gamma_weights=weights,
        losses=LossEstimate(per_candidate=dict(estimates), ineligible=frozenset(ineligible)),
    )
    return selection, outputs[chosen]
