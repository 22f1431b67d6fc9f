"""
Slice geometry for confidence boundaries.

A 2D slice of the state is whitened along the principal axes of its
covariance; the projected moments E[U³], E[U²V], E[U⁴] of the whitened
coordinates drive the non-Gaussian correction.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from common.exceptions import DecompositionError, EstimatorError, UsageError
from uq_methods.beliefs import CentralMomentSet, WeightedEnsemble

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SliceSpec:
    """State indices of a 2D slice and the confidence scale k."""

    indices: Tuple[int, int]
    k: float = 3.0

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if len(indices) != 2 or indices[0] == indices[1] or min(indices) < 0:
            raise UsageError(f"slice needs two distinct non-negative indices, got {self.indices}")
        if not self.k > 0.0:
            raise UsageError(f"confidence scale must be positive, got {self.k}")
        object.__setattr__(self, 'indices', indices)

    def select(self, values: np.ndarray) -> np.ndarray:
        """Slice components of a vector or of each row."""
        return np.asarray(values)[..., list(self.indices)]


def _sign_fixed(vector: np.ndarray) -> np.ndarray:
    for component in vector:
        if abs(component) > 1e-12:
            return vector if component > 0 else -vector
    return vector


@dataclass(frozen=True, eq=False)
class WhitenedFrame:
    """
    Principal axes of a 2×2 covariance: Σ = R Λ Rᵀ with λ₁ ≥ λ₂ > 0 and
    W = Λ^(−1/2) Rᵀ, whose rows are ``a`` and ``b``.
    """

    mean: np.ndarray
    R: np.ndarray
    eigenvalues: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return np.diag(1.0 / np.sqrt(self.eigenvalues)) @ self.R.T

    @property
    def a(self) -> np.ndarray:
        return self.W[0]

    @property
    def b(self) -> np.ndarray:
        return self.W[1]

    def whitened(self, points: np.ndarray) -> np.ndarray:
        """Rows (û, v̂) = W (r − μ)."""
        return (np.atleast_2d(points) - self.mean) @ self.W.T

    def to_principal(self, points: np.ndarray) -> np.ndarray:
        """Rows Rᵀ (r − μ): unscaled principal-axis coordinates."""
        return (np.atleast_2d(points) - self.mean) @ self.R

    def from_principal(self, coordinates: np.ndarray) -> np.ndarray:
        return self.mean + np.atleast_2d(coordinates) @ self.R.T


def whiten(mu_q: Sequence[float], sigma_q: np.ndarray) -> WhitenedFrame:
    """
    Eigen-decompose a 2×2 SPD covariance with λ₁ ≥ λ₂ and each eigenvector's
    first non-zero component positive. When λ₁ = λ₂ the input axes are kept.

    Raises:
        DecompositionError: covariance is not symmetric positive definite
    """
    mu_q = np.asarray(mu_q, dtype=float)
    sigma_q = np.asarray(sigma_q, dtype=float)
    if mu_q.shape != (2,) or sigma_q.shape != (2, 2):
        raise UsageError(f"slice moments must be 2 and 2x2, got {mu_q.shape} and {sigma_q.shape}")
    scale = max(float(np.max(np.abs(sigma_q))), np.finfo(float).tiny)
    if abs(sigma_q[0, 1] - sigma_q[1, 0]) > 1e-12 * scale:
        raise DecompositionError("slice covariance is not symmetric")
    sigma_q = 0.5 * (sigma_q + sigma_q.T)
    values, vectors = np.linalg.eigh(sigma_q)
    if not values[0] > 0.0:
        raise DecompositionError(f"slice covariance is not positive definite (eigenvalues {values})")
    if values[1] - values[0] <= 1e-14 * values[1]:
        # tie: input axes, in input order
        mean_value = 0.5 * (values[0] + values[1])
        return WhitenedFrame(mu_q, np.eye(2), np.array([mean_value, mean_value]))
    order = [1, 0]
    R = np.column_stack([_sign_fixed(vectors[:, i]) for i in order])
    return WhitenedFrame(mu_q, R, values[order])


@dataclass(frozen=True)
class ProjectedMoments:
    m_uuu: float
    m_uuv: float
    m_uuuu: float

    @property
    def is_degenerate(self) -> bool:
        return abs(self.m_uuuu - 1.0) <= DEGENERACY_TOLERANCE

    @property
    def bend(self) -> float:
        """α = m_uuv / (m_uuuu − 1)."""
        if self.is_degenerate:
            raise EstimatorError(f"bend coefficient undefined for m_uuuu={self.m_uuuu!r}")
        return self.m_uuv / (self.m_uuuu - 1.0)

    def skew_correction(self, k: float) -> float:
        """Cornish-Fisher c(k) = (k² − 1)/6 · m_uuu."""
        return (k * k - 1.0) / 6.0 * self.m_uuu

    def as_dict(self) -> dict:
        return {'m_uuu': self.m_uuu, 'm_uuv': self.m_uuv, 'm_uuuu': self.m_uuuu}


GAUSSIAN_MOMENTS = ProjectedMoments(0.0, 0.0, 3.0)


def projected_moments_from_scalars(u: np.ndarray, v: np.ndarray, weights: np.ndarray) -> ProjectedMoments:
    """Weighted E[U³], E[U²V], E[U⁴] of whitened scalars."""
    if len(weights) == 0:
        raise EstimatorError("projected moments of an empty ensemble")
    u_sq = u * u
    return ProjectedMoments(
        m_uuu=float(weights @ (u_sq * u)),
        m_uuv=float(weights @ (u_sq * v)),
        m_uuuu=float(weights @ (u_sq * u_sq)),
    )


def projected_moments(ensemble: WeightedEnsemble, frame: WhitenedFrame) -> ProjectedMoments:
    """
    Projected moments of a slice ensemble (rows are 2D slice points) without
    forming third or fourth moment tensors.
    """
    if ensemble.dim != 2:
        raise UsageError(f"ensemble must be restricted to the slice, got dimension {ensemble.dim}")
    whitened = frame.whitened(ensemble.states)
    return projected_moments_from_scalars(whitened[:, 0], whitened[:, 1], ensemble.weights)


def projected_moments_from_tensors(moments: CentralMomentSet, frame: WhitenedFrame) -> ProjectedMoments:
    """Contract the slice's third and fourth moment tensors with the rows a and b."""
    if moments.dim != 2:
        raise UsageError(f"moment set must be restricted to the slice, got dimension {moments.dim}")
    third = moments.third_tensor()
    fourth = moments.fourth_tensor()
    a, b = frame.a, frame.b
    return ProjectedMoments(
        m_uuu=float(np.einsum('ijk,i,j,k->', third, a, a, a)),
        m_uuv=float(np.einsum('ijk,i,j,k->', third, a, a, b)),
        m_uuuu=float(np.einsum('ijkl,i,j,k,l->', fourth, a, a, a, a)),
    )


def projected_moments_from_map(flow_map, spec: SliceSpec, frame: WhitenedFrame,
                               inputs: WeightedEnsemble) -> ProjectedMoments:
    """
    Projected-scalar shortcut: form U = aᵀ(T_q − μ_q) and V = bᵀ(T_q − μ_q)
    as polynomials of the map variables, then average U³, U²V, U⁴ over the
    weighted input deviations.
    """
    i, j = spec.indices
    components = flow_map.components
    a, b = frame.a, frame.b
    shifted = [components[i] - frame.mean[0], components[j] - frame.mean[1]]
    u_poly = a[0] * shifted[0] + a[1] * shifted[1]
    v_poly = b[0] * shifted[0] + b[1] * shifted[1]
    points = flow_map.to_variables(inputs.states)
    return projected_moments_from_scalars(u_poly.evaluate_many(points), v_poly.evaluate_many(points), inputs.weights)
