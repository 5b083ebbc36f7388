"""Deterministic asymptotic risk constants for the shrinkage estimators.

For a fixed parameter vector theta and noise level sigma, these functions
evaluate the limiting normalized losses: gamma (positive-part JS), rho
(positive-part Lindley), and the cluster constants beta, alpha, c_j for a
partition of the real line at deterministic separators mu_1 > ... > mu_{L-1}
(sentinels mu_0 = +inf, mu_L = -inf). Cluster j collects the Gaussian mass of
each coordinate on (mu_j, mu_{j-1}].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

_SQRT2 = np.sqrt(2.0)
_SQRT_2PI = np.sqrt(2.0 * np.pi)


def q_function(x):
    """Upper-tail standard normal probability Q(x) = P(Z > x), via erfc."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)


def q_complement(x):
    """Lower-tail probability Q^c(x) = 1 - Q(x) = P(Z <= x), via erfc."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / _SQRT2)


@dataclass(frozen=True)
class TheoryConstants:
    """Limiting loss constants for one (theta, sigma, partition) triple.

    beta is the concentrating value of ||theta - nu||^2 / n, alpha that of
    ||y - nu||^2 / n minus sigma^2; c holds the per-cluster attractor limits
    and mu the deterministic separators. gamma and rho are the squared-norm
    rates ||theta||^2/n and ||theta - thetabar 1||^2/n. empty_clusters flags
    clusters carrying no Gaussian mass (their c_j is undefined and the
    corresponding terms are dropped).
    """

    beta: float
    alpha: float
    c: np.ndarray
    mu: np.ndarray
    gamma: float
    rho: float
    empty_clusters: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def _check_theta(theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("theta must be a one-dimensional vector with n >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("theta contains non-finite values")
    return arr


def gamma_value(theta) -> float:
    """gamma_n = ||theta||^2 / n."""
    theta = _check_theta(theta)
    return float(theta @ theta) / theta.size


def rho_value(theta) -> float:
    """rho_n = ||theta - thetabar 1||^2 / n."""
    theta = _check_theta(theta)
    centered = theta - theta.mean()
    return float(centered @ centered) / theta.size


def _mass_matrices(theta: np.ndarray, sigma: float, mu: np.ndarray):
    """Per-coordinate interval masses and Gaussian-kernel differences.

    Returns (dq, kern) with shape (n, L): dq[i, j-1] is the mass of
    N(theta_i, sigma^2) on (mu_j, mu_{j-1}], and kern[i, j-1] is
    exp(-(mu_j - theta_i)^2 / 2 sigma^2) - exp(-(mu_{j-1} - theta_i)^2 /
    2 sigma^2). The sentinel separators contribute 0 to both, so the edge
    columns use one-sided tails rather than floating infinities.
    """
    n = theta.size
    L = mu.size + 1
    if L == 1:
        return np.ones((n, 1)), np.zeros((n, 1))
    args = (mu[None, :] - theta[:, None]) / sigma
    q = q_function(args)
    kern_at = np.exp(-0.5 * args * args)
    dq = np.empty((n, L))
    dq[:, 0] = q[:, 0]
    dq[:, 1:-1] = q[:, 1:] - q[:, :-1]
    dq[:, -1] = q_complement(args[:, -1])
    kern = np.empty((n, L))
    kern[:, 0] = kern_at[:, 0]
    kern[:, 1:-1] = kern_at[:, 1:] - kern_at[:, :-1]
    kern[:, -1] = -kern_at[:, -1]
    return dq, kern


def theory_two_cluster(theta, sigma: float) -> TheoryConstants:
    """Theorem constants for the two-cluster estimator separated at thetabar.

    c_1 and c_2 are Q- and Q^c-weighted means of theta; beta is the
    theta-to-attractor rate and alpha subtracts the Gaussian-kernel cross
    term, so beta >= alpha always (c_1 >= c_2).
    """
    theta = _check_theta(theta)
    if sigma <= 0 or not np.isfinite(sigma):
        raise ValueError("sigma must be a positive finite number")
    n = theta.size
    args = (theta.mean() - theta) / sigma
    q = q_function(args)
    qc = q_complement(args)
    mass_1, mass_2 = float(q.sum()), float(qc.sum())
    c1 = float(theta @ q) / mass_1 if mass_1 > 0 else 0.0
    c2 = float(theta @ qc) / mass_2 if mass_2 > 0 else 0.0
    beta = gamma_value(theta) - (c1 * c1 * mass_1 + c2 * c2 * mass_2) / n
    kernel_sum = float(np.exp(-0.5 * args * args).sum())
    alpha = beta - (2.0 * sigma / (n * _SQRT_2PI)) * kernel_sum * (c1 - c2)
    return TheoryConstants(
        beta=float(beta),
        alpha=float(alpha),
        c=np.array([c1, c2]),
        mu=np.array([theta.mean()]),
        gamma=gamma_value(theta),
        rho=rho_value(theta),
        empty_clusters=np.array([mass_1 == 0, mass_2 == 0]),
    )


def theory_L_cluster(theta, sigma: float, mu) -> TheoryConstants:
    """Theorem constants for an L-cluster partition at deterministic separators.

    mu must be strictly descending (length L-1; empty for L = 1). Clusters
    with zero Gaussian mass are flagged and their terms dropped.
    """
    theta = _check_theta(theta)
    if sigma <= 0 or not np.isfinite(sigma):
        raise ValueError("sigma must be a positive finite number")
    mu = np.asarray(mu, dtype=float)
    if mu.size > 1 and not np.all(np.diff(mu) < 0):
        raise ValueError("separators must be strictly descending")
    n = theta.size
    dq, kern = _mass_matrices(theta, sigma, mu)
    mass = dq.sum(axis=0)
    empty = mass == 0
    c = np.zeros(mu.size + 1)
    c[~empty] = (theta @ dq)[~empty] / mass[~empty]
    beta = gamma_value(theta) - float(c * c @ mass) / n
    alpha = beta - (2.0 * sigma / (n * _SQRT_2PI)) * float(c @ kern.sum(axis=0))
    return TheoryConstants(
        beta=float(beta),
        alpha=float(alpha),
        c=c,
        mu=mu,
        gamma=gamma_value(theta),
        rho=rho_value(theta),
        empty_clusters=empty,
    )


def refine_separators(theta, sigma: float, mu) -> np.ndarray:
    """Deterministic limit of the data-driven doubling refinement.

    Inserts, between existing separators, the population mean of y restricted
    to each cluster interval:

        m_j = [sum_i theta_i dq_ij + (sigma/sqrt(2 pi)) sum_i kern_ij] / mass_j,

    which is what the within-cluster empirical means concentrate around.
    Starting from an empty separator list and applying this twice yields the
    four-cluster separators used by the theory sweeps. Clusters without mass
    contribute no new separator; coincident values are deduplicated.
    """
    theta = _check_theta(theta)
    mu = np.asarray(mu, dtype=float)
    dq, kern = _mass_matrices(theta, sigma, mu)
    mass = dq.sum(axis=0)
    refined = []
    for j in range(mu.size + 1):
        if mass[j] > 0:
            m = (float(theta @ dq[:, j]) + sigma / _SQRT_2PI * float(kern[:, j].sum())) / mass[j]
            refined.append(m)
        if j < mu.size:
            refined.append(mu[j])
    return np.unique(np.asarray(refined, dtype=float))[::-1]


def asymptotic_loss(kind: str, constants: TheoryConstants, sigma: float) -> float:
    """Limiting normalized loss for one estimator family.

    kind "jsplus" gives gamma sigma^2 / (gamma + sigma^2), "lindley" gives
    rho sigma^2 / (rho + sigma^2), and "cluster" gives
    min(beta, beta sigma^2 / (alpha + sigma^2)) = beta sigma^2 / g(alpha +
    sigma^2).
    """
    s2 = sigma * sigma
    if kind == "jsplus":
        return constants.gamma * s2 / (constants.gamma + s2)
    if kind == "lindley":
        return constants.rho * s2 / (constants.rho + s2)
    if kind == "cluster":
        return constants.beta * s2 / max(s2, constants.alpha + s2)
    raise ValueError(f"unknown loss kind: {kind!r}")


def js_exact_risk_mc(theta, sigma: float, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo evaluation of the exact James-Stein risk identity.

    R = n sigma^2 - (n-2)^2 sigma^4 E[1/||y||^2], averaged over `trials`
    independent draws of y = theta + sigma w. Returns (risk, standard error);
    deterministic for a fixed seed.
    """
    theta = _check_theta(theta)
    if theta.size < 3:
        raise ValueError("the James-Stein risk identity requires n >= 3")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = theta.size
    rng = np.random.default_rng(seed)
    values = np.empty(trials)
    chunk = max(1, int(2**22 // n))
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        y = theta[None, :] + sigma * rng.standard_normal((m, n))
        values[done : done + m] = n * sigma**2 - (n - 2) ** 2 * sigma**4 / (y * y).sum(axis=1)
        done += m
    se = float(values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return float(values.mean()), se
