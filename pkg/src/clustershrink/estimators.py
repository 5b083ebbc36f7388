"""Closed-form shrinkage estimators for the Gaussian sequence model.

All estimators observe y = theta + w with w ~ N(0, sigma^2 I) and return a
shrunk estimate of theta of the form

    estimate = nu + factor * (y - nu),

where nu is the attracting vector and factor is the data-dependent shrinkage
factor. Positive-part variants clamp the factor into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EstimatorOutput:
    """Result of a shrinkage estimator.

    Attributes:
        estimate: the estimated parameter vector, length n.
        shrinkage_factor: multiplier applied to (y - attracting_vector).
        attracting_vector: the vector the observation is shrunk toward.
    """

    estimate: np.ndarray
    shrinkage_factor: float
    attracting_vector: np.ndarray


def check_observation(y, sigma: float) -> np.ndarray:
    """Validate an observation vector and noise level.

    Returns y as a float array. Raises ValueError for empty or non-finite
    input, or non-positive sigma.
    """
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("observation must be a one-dimensional vector with n >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("observation contains non-finite values")
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError("sigma must be a positive finite number")
    return arr


def variance_floor(x: float, sigma: float) -> float:
    """Clamp a variance-like quantity below by sigma^2: max(sigma^2, x)."""
    return max(sigma * sigma, x)


def _output(y: np.ndarray, nu: np.ndarray, factor: float) -> EstimatorOutput:
    return EstimatorOutput(
        estimate=nu + factor * (y - nu),
        shrinkage_factor=float(factor),
        attracting_vector=nu,
    )


def estimate_ml(y, sigma: float) -> EstimatorOutput:
    """Maximum-likelihood estimator: the identity map, theta_hat = y."""
    y = check_observation(y, sigma)
    return _output(y, np.zeros_like(y), 1.0)


def _js_factor(residual_sq: float, dof: int, sigma: float, positive_part: bool) -> float:
    if residual_sq == 0.0:
        # Limit of the positive-part form at a zero residual.
        return 0.0
    factor = 1.0 - dof * sigma * sigma / residual_sq
    if positive_part:
        # Clamping above at 1 only matters for degenerate small n where the
        # dof constant goes non-positive.
        factor = min(1.0, max(0.0, factor))
    return factor


def estimate_js(y, sigma: float) -> EstimatorOutput:
    """James-Stein estimator shrinking toward the origin.

    theta_hat = [1 - (n-2) sigma^2 / ||y||^2] y. Requires n >= 3.
    """
    y = check_observation(y, sigma)
    if y.size < 3:
        raise ValueError("James-Stein estimator requires n >= 3")
    factor = _js_factor(float(y @ y), y.size - 2, sigma, positive_part=False)
    return _output(y, np.zeros_like(y), factor)


def estimate_js_positive(y, sigma: float) -> EstimatorOutput:
    """Positive-part James-Stein estimator: the factor is clamped into [0, 1].

    Total over all n >= 1; for n <= 2 the non-positive dof constant makes the
    raw factor >= 1, so clamping returns y itself.
    """
    y = check_observation(y, sigma)
    factor = _js_factor(float(y @ y), y.size - 2, sigma, positive_part=True)
    return _output(y, np.zeros_like(y), factor)


def estimate_subspace_js(y, sigma: float, basis) -> EstimatorOutput:
    """James-Stein estimator shrinking y toward a d-dimensional subspace.

    Args:
        basis: (n, d) array whose columns are an orthonormal basis of the
            target subspace; d = 0 (shape (n, 0)) shrinks toward the origin.

    The attracting vector is the projection P(y), and the residual is scaled
    by 1 - (n-d-2) sigma^2 / ||y - P(y)||^2. Requires n > d + 2.
    """
    y = check_observation(y, sigma)
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != y.size:
        raise ValueError("basis must have shape (n, d)")
    d = basis.shape[1]
    if y.size <= d + 2:
        raise ValueError("subspace James-Stein estimator requires n > d + 2")
    gram = basis.T @ basis
    if not np.allclose(gram, np.eye(d), atol=1e-10):
        raise ValueError("basis columns must be orthonormal")
    projection = basis @ (basis.T @ y) if d > 0 else np.zeros_like(y)
    residual = y - projection
    factor = _js_factor(float(residual @ residual), y.size - d - 2, sigma, positive_part=False)
    return _output(y, projection, factor)


def estimate_lindley(y, sigma: float, positive_part: bool = False) -> EstimatorOutput:
    """Lindley's estimator, shrinking y toward the all-ones direction.

    theta_hat = ybar 1 + [1 - (n-3) sigma^2 / ||y - ybar 1||^2] (y - ybar 1).
    The non-positive-part form requires n >= 4; the positive-part form is
    total over n >= 1 with the factor clamped into [0, 1].
    """
    y = check_observation(y, sigma)
    if not positive_part and y.size < 4:
        raise ValueError("Lindley's estimator requires n >= 4")
    nu = np.full_like(y, y.mean())
    residual = y - nu
    factor = _js_factor(float(residual @ residual), y.size - 3, sigma, positive_part)
    return _output(y, nu, factor)


def shrink_toward(y, sigma: float, nu) -> EstimatorOutput:
    """Shared cluster shrinkage kernel toward an arbitrary attracting vector.

    theta_hat = nu + [1 - sigma^2 / g(||y - nu||^2 / n)] (y - nu), with
    g(x) = max(sigma^2, x), which equals the positive-part form
    [1 - n sigma^2 / ||y - nu||^2]_+ applied to the residual. The factor is
    always in [0, 1].
    """
    y = check_observation(y, sigma)
    nu = np.asarray(nu, dtype=float)
    if nu.shape != y.shape:
        raise ValueError("attracting vector must have the same length as y")
    residual = y - nu
    mean_sq = float(residual @ residual) / y.size
    factor = 1.0 - sigma * sigma / variance_floor(mean_sq, sigma)
    return _output(y, nu, factor)
