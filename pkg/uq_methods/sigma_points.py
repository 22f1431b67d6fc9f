"""
Deterministic sigma-point sets and linear covariance propagation.

``ut_points`` builds the symmetric 2N+1 unscented set with scaling λ.
``cut4_points`` builds the fourth-order conjugate unscented set: 2N axis
points and 2^N conjugate corner points whose weights and radii match the
Gaussian moments E[ξᵢ²] = 1, E[ξᵢ⁴] = 3 and E[ξᵢ²ξⱼ²] = 1. The centre
point of that set has weight zero and is dropped unless requested.
"""

import itertools
import math
from typing import Optional, Tuple

import numpy as np

from common.exceptions import UnsupportedDimensionError, UsageError
from .beliefs import KIND_SIGMA, GaussianBelief, WeightedEnsemble


def default_lambda(n: int) -> float:
    """Classic scaling λ = 3 − N."""
    return 3.0 - n


def ut_points(belief: GaussianBelief, lambda_param: Optional[float] = None) -> WeightedEnsemble:
    """
    Symmetric unscented set: the mean and mean ± columns of the Cholesky
    factor of (N + λ)P, with weights λ/(N+λ) and 1/(2(N+λ)).
    """
    n = belief.dim
    lam = default_lambda(n) if lambda_param is None else float(lambda_param)
    scale = n + lam
    if scale <= 0.0:
        raise UsageError(f"unscented scaling needs N + lambda > 0, got {scale}")
    columns = math.sqrt(scale) * belief.cholesky
    points = np.vstack([belief.mean, belief.mean + columns.T, belief.mean - columns.T])
    weights = np.full(2 * n + 1, 0.5 / scale)
    weights[0] = lam / scale
    return WeightedEnsemble(weights, points, KIND_SIGMA)


def cut4_parameters(n: int) -> Tuple[float, float, float, float]:
    """(r₁², r₂², w₁, w₂) of the fourth-order conjugate set in dimension ``n``."""
    if n < 3:
        raise UnsupportedDimensionError(f"the conjugate unscented set needs N >= 3, got {n}")
    r1_sq = (n + 2.0) / 2.0
    r2_sq = n * (n + 2.0) / (n - 2.0)
    w1 = 4.0 / (n + 2.0) ** 2
    w2 = (n - 2.0) ** 2 / (2.0 ** n * (n + 2.0) ** 2)
    return r1_sq, r2_sq, w1, w2


def cut4_standard_set(n: int, include_center: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Standard-normal conjugate set.

    Returns:
        (points, weights): points are rows; axis points first (+e₁, −e₁,
        +e₂, …), then corners in itertools.product order
    """
    r1_sq, r2_sq, w1, w2 = cut4_parameters(n)
    r1 = math.sqrt(r1_sq)
    corner_scale = math.sqrt(r2_sq / n)
    axis = []
    for i in range(n):
        for sign in (1.0, -1.0):
            point = np.zeros(n)
            point[i] = sign * r1
            axis.append(point)
    corners = [corner_scale * np.array(signs) for signs in itertools.product((1.0, -1.0), repeat=n)]
    points = np.array(axis + corners)
    weights = np.concatenate([np.full(2 * n, w1), np.full(2 ** n, w2)])
    if include_center:
        points = np.vstack([np.zeros(n), points])
        weights = np.concatenate([[1.0 - weights.sum()], weights])
    return points, weights


def cut4_points(belief: GaussianBelief, include_center: bool = False) -> WeightedEnsemble:
    """Conjugate set mapped through mean + S ξ with S the lower Cholesky factor."""
    xi, weights = cut4_standard_set(belief.dim, include_center)
    return WeightedEnsemble(weights, belief.mean + xi @ belief.cholesky.T, KIND_SIGMA)


def lincov(stm: np.ndarray, belief: GaussianBelief, reference_final: Optional[np.ndarray] = None) -> GaussianBelief:
    """
    Linear covariance propagation: mean → x_f + Φ·mean, covariance → ΦPΦᵀ.

    Without ``reference_final`` the output mean is the propagated deviation.
    """
    stm = np.asarray(stm, dtype=float)
    if stm.ndim != 2 or stm.shape[1] != belief.dim:
        raise UsageError(f"STM of shape {stm.shape} cannot act on a {belief.dim}-dimensional belief")
    mean = stm @ belief.mean
    if reference_final is not None:
        mean = np.asarray(reference_final, dtype=float) + mean
    covariance = stm @ belief.covariance @ stm.T
    return GaussianBelief(mean, 0.5 * (covariance + covariance.T))


def ut_run(propagator, belief: GaussianBelief, lambda_param: Optional[float] = None) -> WeightedEnsemble:
    points = ut_points(belief, lambda_param)
    return points.with_states(propagator.propagate(points.states))


def cut4_run(propagator, belief: GaussianBelief) -> WeightedEnsemble:
    points = cut4_points(belief)
    return points.with_states(propagator.propagate(points.states))


def lincov_run(propagator, belief: GaussianBelief) -> GaussianBelief:
    """LinCov about the propagator's reference, with Φ taken at zero deviation."""
    return lincov(propagator.jacobian(np.zeros(belief.dim)), belief, propagator.reference_final)
