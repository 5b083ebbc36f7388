"""Tests for the asymptotic risk constants and the Q-function numerics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clustershrink.clustering import build_partition
from clustershrink.theory import (
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

# Gaussian upper-tail value at 1.96, frozen from high-precision quadrature
Q_196 = 0.024997895148216577


def theta_vectors(min_n=3, max_n=12):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.lists(
            st.floats(-8.0, 8.0, allow_nan=False, allow_infinity=False),
            min_size=n,
            max_size=n,
        ).map(np.array)
    )


def oracle_two_cluster_beta(theta, sigma):
    """Independent beta evaluation: mass-weighted variance of theta around the
    attractor limits, computed with math.erfc elementwise."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    q = np.array([0.5 * math.erfc((theta.mean() - t) / (sigma * math.sqrt(2.0))) for t in theta])
    qc = 1.0 - q
    c1 = float(theta @ q) / q.sum() if q.sum() > 0 else 0.0
    c2 = float(theta @ qc) / qc.sum() if qc.sum() > 0 else 0.0
    return float(np.sum(q * (theta - c1) ** 2 + qc * (theta - c2) ** 2)) / n


class TestQFunction:
    def test_symmetry_point(self):
        assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_deep_tail_underflow_safe(self):
        v = q_function(40.0)
        assert 0.0 <= v < 1e-300

    def test_reference_value(self):
        assert q_function(1.96) == pytest.approx(Q_196, abs=1e-6)

    def test_complement(self):
        for x in (-2.0, 0.0, 1.3):
            assert q_function(x) + q_complement(x) == pytest.approx(1.0, abs=1e-14)

    def test_reflection(self):
        assert q_function(-1.5) == pytest.approx(1.0 - q_function(1.5), abs=1e-14)


class TestTwoCluster:
    def test_homogeneous_theta_collapses(self):
        const = theory_two_cluster(3.0 * np.ones(50), 1.0)
        assert const.beta == pytest.approx(0.0, abs=1e-12)
        assert const.alpha == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(const.c, [3.0, 3.0])

    def test_zero_theta(self):
        const = theory_two_cluster(np.zeros(20), 1.0)
        assert const.beta == 0.0
        assert const.alpha == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(const.c, [0.0, 0.0], atol=1e-15)

    def test_separated_two_point_beta_vanishes(self):
        theta = np.repeat([8.0, -8.0], 500)
        const = theory_two_cluster(theta, 1.0)
        assert const.beta < 1e-6
        assert const.c[0] == pytest.approx(8.0, abs=1e-6)
        assert const.c[1] == pytest.approx(-8.0, abs=1e-6)

    def test_rates(self):
        theta = np.array([2.0, 0.0, -2.0, 0.0])
        assert gamma_value(theta) == pytest.approx(2.0)
        assert rho_value(theta) == pytest.approx(2.0)  # mean is zero here
        shifted = theta + 5.0
        assert gamma_value(shifted) > rho_value(shifted)

    @settings(max_examples=150, deadline=None)
    @given(theta_vectors())
    def test_attractor_order_and_beta_alpha(self, theta):
        const = theory_two_cluster(theta, 1.0)
        assert np.all(np.isfinite([const.beta, const.alpha]))
        assert const.c[0] >= const.c[1] - 1e-12
        assert const.beta >= const.alpha - 1e-12
        assert const.gamma >= const.rho >= 0.0

    @settings(max_examples=120, deadline=None)
    @given(theta_vectors())
    def test_beta_matches_variance_form(self, theta):
        const = theory_two_cluster(theta, 1.0)
        oracle = oracle_two_cluster_beta(theta, 1.0)
        assert const.beta == pytest.approx(oracle, rel=1e-9, abs=1e-11)
        assert const.beta >= -1e-12

    def test_scale_consistency(self):
        theta = np.array([3.0, 1.0, -2.0, 0.5, -4.0])
        base = theory_two_cluster(theta, 1.0)
        scaled = theory_two_cluster(3.0 * theta, 3.0)
        assert scaled.beta == pytest.approx(9.0 * base.beta, rel=1e-10)
        assert scaled.alpha == pytest.approx(9.0 * base.alpha, rel=1e-10, abs=1e-12)
        assert scaled.gamma == pytest.approx(9.0 * base.gamma, rel=1e-12)
        assert scaled.rho == pytest.approx(9.0 * base.rho, rel=1e-12)


class TestLCluster:
    @settings(max_examples=150, deadline=None)
    @given(theta_vectors())
    def test_two_cluster_specialization(self, theta):
        direct = theory_two_cluster(theta, 1.0)
        via_L = theory_L_cluster(theta, 1.0, np.array([theta.mean()]))
        assert via_L.beta == pytest.approx(direct.beta, abs=1e-12)
        assert via_L.alpha == pytest.approx(direct.alpha, abs=1e-12)
        np.testing.assert_allclose(via_L.c, direct.c, atol=1e-12)

    def test_homogeneous_theta_any_partition(self):
        theta = 2.0 * np.ones(30)
        const = theory_L_cluster(theta, 1.0, np.array([4.0, 2.0, -1.0]))
        assert const.beta == pytest.approx(0.0, abs=1e-10)

    def test_four_valued_separated_beta_vanishes(self):
        # adjacent values sit 10 sigma from the refined separators, so the
        # cross-cluster mass (and with it beta) is negligible
        theta = np.repeat([30.0, 10.0, -10.0, -30.0], 250)
        mu = refine_separators(theta, 1.0, refine_separators(theta, 1.0, np.array([])))
        const = theory_L_cluster(theta, 1.0, mu)
        assert len(const.c) == 4
        assert const.beta < 1e-4

    def test_four_valued_moderate_separation_leaks_mass(self):
        # at 6 sigma between adjacent values the tail leakage across the
        # separators keeps beta visibly positive
        theta = np.repeat([9.0, 3.0, -3.0, -9.0], 250)
        mu = refine_separators(theta, 1.0, refine_separators(theta, 1.0, np.array([])))
        const = theory_L_cluster(theta, 1.0, mu)
        assert 1e-3 < const.beta < 0.2

    def test_massless_cluster_flagged_and_dropped(self):
        theta = -100.0 * np.ones(10)
        const = theory_L_cluster(theta, 1.0, np.array([100.0]))
        assert const.empty_clusters[0]
        assert const.c[0] == 0.0
        assert const.beta == pytest.approx(0.0, abs=1e-9)

    def test_single_cluster_reduces_to_mean_centering(self):
        theta = np.array([4.0, 2.0, -1.0, -5.0])
        const = theory_L_cluster(theta, 1.0, np.array([]))
        assert const.beta == pytest.approx(rho_value(theta), rel=1e-12)
        assert const.alpha == pytest.approx(const.beta, rel=1e-12)
        assert const.c[0] == pytest.approx(theta.mean(), rel=1e-12)


class TestRefineSeparators:
    def test_first_refinement_is_population_mean(self):
        theta = np.array([5.0, 1.0, -2.0])
        mu = refine_separators(theta, 1.0, np.array([]))
        assert mu.shape == (1,)
        assert mu[0] == pytest.approx(theta.mean(), rel=1e-12)

    def test_tracks_empirical_refinement_at_scale(self):
        rng = np.random.default_rng(17)
        theta = np.repeat([3.0, -3.0], 50000)
        y = theta + rng.standard_normal(100000)
        empirical = np.array(build_partition(y, 4).separators)
        population = refine_separators(theta, 1.0, refine_separators(theta, 1.0, np.array([])))
        assert empirical.shape == population.shape
        np.testing.assert_allclose(empirical, population, atol=0.05)


class TestAsymptoticLoss:
    def test_lindley_limit(self):
        const = theory_two_cluster(np.array([1.0, -1.0]), 1.0)
        assert const.rho == pytest.approx(1.0)
        assert asymptotic_loss("lindley", const, 1.0) == pytest.approx(0.5)

    def test_jsplus_zero_signal(self):
        const = theory_two_cluster(np.zeros(5), 1.0)
        assert asymptotic_loss("jsplus", const, 1.0) == 0.0

    def test_cluster_loss_takes_min(self):
        # beta = alpha = 2 at sigma = 1 gives min(2, 2/3)
        const = theory_two_cluster(np.zeros(4), 1.0)
        forced = type(const)(
            beta=2.0, alpha=2.0, c=const.c, mu=const.mu,
            gamma=const.gamma, rho=const.rho, empty_clusters=const.empty_clusters,
        )
        assert asymptotic_loss("cluster", forced, 1.0) == pytest.approx(2.0 / 3.0)
        assert asymptotic_loss("cluster", forced, 1.0) <= forced.beta

    def test_unknown_kind_rejected(self):
        const = theory_two_cluster(np.zeros(4), 1.0)
        with pytest.raises(ValueError):
            asymptotic_loss("bogus", const, 1.0)


class TestExactRiskMC:
    def test_zero_theta_matches_chi_square_identity(self):
        # E[1 / chi^2_10] = 1/8, so the risk is 10 - 64/8 = 2
        risk, se = js_exact_risk_mc(np.zeros(10), 1.0, 200000, seed=0)
        assert risk == pytest.approx(2.0, abs=max(3 * se, 0.02))

    def test_dominates_ml(self):
        for seed, scale in ((1, 0.0), (2, 1.0), (3, 5.0)):
            theta = scale * np.arange(1.0, 9.0)
            risk, _ = js_exact_risk_mc(theta, 1.0, 50000, seed=seed)
            assert risk < theta.size * 1.0

    def test_far_signal_approaches_ml_risk(self):
        risk, _ = js_exact_risk_mc(200.0 * np.ones(10), 1.0, 50000, seed=4)
        assert risk == pytest.approx(10.0, abs=0.01)

    def test_deterministic_for_fixed_seed(self):
        a = js_exact_risk_mc(np.ones(6), 1.0, 20000, seed=9)
        b = js_exact_risk_mc(np.ones(6), 1.0, 20000, seed=9)
        assert a == b
