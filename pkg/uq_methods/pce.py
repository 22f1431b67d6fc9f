"""
Non-intrusive polynomial chaos with probabilists' Hermite polynomials.

Inputs are whitened as x = mean + S ξ (S the lower Cholesky factor of the
input covariance), outputs are regressed by least squares on the total-degree
tensor basis Ψ_α(ξ) = Π He_{α_k}(ξ_k), and mean and covariance follow from
the coefficients and the basis norms h_α = α!.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Union

import numpy as np
from numpy.polynomial import hermite_e
from scipy.stats import norm, qmc

from common.exceptions import FitError, UsageError
from poly_algebra.context import MultiIndex, graded_lex_indices, multi_index_factorial
from .beliefs import KIND_SAMPLES, CentralMomentSet, GaussianBelief, WeightedEnsemble
from .moments import weighted_central_moments
from .sampling import make_generator

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 3
DEFAULT_OVERSAMPLE = 2.0
QMC_SAMPLES = 200_000
QMC_CHUNK = 20_000


def hermite_design(xi: np.ndarray, indices: List[MultiIndex]) -> np.ndarray:
    """Design matrix Ψ[s, a] = Π_k He_{α_k}(ξ_{s,k})."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    degree = max(sum(alpha) for alpha in indices)
    # (samples, dims, degree + 1)
    vander = np.stack([hermite_e.hermevander(xi[:, k], degree) for k in range(xi.shape[1])], axis=1)
    exponents = np.array(indices, dtype=int)
    dims = np.arange(xi.shape[1])
    return np.prod(vander[:, dims, exponents], axis=2)


@dataclass(frozen=True, eq=False)
class PceSurrogate:
    """Fitted expansion Σ c_α Ψ_α(ξ) with c_α the rows of ``coefficients``."""

    indices: List[MultiIndex]
    coefficients: np.ndarray
    input_mean: np.ndarray
    input_factor: np.ndarray

    @property
    def input_dim(self) -> int:
        return len(self.indices[0])

    @property
    def degree(self) -> int:
        return max(sum(alpha) for alpha in self.indices)

    @property
    def norms(self) -> np.ndarray:
        return np.array([float(multi_index_factorial(alpha)) for alpha in self.indices])

    def coefficient(self, alpha) -> np.ndarray:
        return self.coefficients[self.indices.index(tuple(alpha))]

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        """Surrogate outputs at standardized inputs (rows)."""
        return hermite_design(xi, self.indices) @ self.coefficients

    def evaluate_deviation(self, deltas: np.ndarray) -> np.ndarray:
        xi = np.linalg.solve(self.input_factor, (np.atleast_2d(deltas) - self.input_mean).T).T
        return self.evaluate(xi)


def pce_fit(propagator, belief: GaussianBelief, degree: int = DEFAULT_DEGREE,
            oversample: float = DEFAULT_OVERSAMPLE, seed: int = 42,
            stream: Union[str, int] = 'pce') -> PceSurrogate:
    """
    Least-squares fit on ceil(oversample·|𝒜|) Gaussian regression points.

    Raises:
        FitError: the design matrix is rank deficient
    """
    if degree < 1:
        raise UsageError(f"PCE degree must be at least 1, got {degree}")
    indices = graded_lex_indices(belief.dim, degree)
    n_samples = math.ceil(oversample * len(indices))
    if n_samples < len(indices):
        raise UsageError(f"{n_samples} regression points cannot fit {len(indices)} coefficients")
    xi = make_generator(seed, stream).standard_normal((n_samples, belief.dim))
    outputs = propagator.propagate(belief.mean + xi @ belief.cholesky.T)
    design = hermite_design(xi, indices)
    coefficients, _, rank, _ = np.linalg.lstsq(design, outputs, rcond=None)
    if rank < len(indices):
        raise FitError(f"PCE design matrix has rank {rank} < {len(indices)}; increase the oversampling factor")
    logger.debug("PCE fit: degree %d, %d terms, %d regression points", degree, len(indices), n_samples)
    return PceSurrogate(indices, coefficients, belief.mean.copy(), belief.cholesky.copy())


def pce_moments(surrogate: PceSurrogate, max_order: int = 2, n_samples: int = QMC_SAMPLES, seed: int = 42,
                stream: Union[str, int] = 'pce_moments') -> CentralMomentSet:
    """
    Mean c₀ and covariance Σ_{α≠0} h_α c_α c_αᵀ from the coefficients; third
    and fourth moments from the surrogate at scrambled-Halton normal inputs.
    """
    coefficients = surrogate.coefficients
    mean = coefficients[0].copy()
    weighted = coefficients[1:] * surrogate.norms[1:, None]
    covariance = weighted.T @ coefficients[1:]
    if max_order <= 2:
        return CentralMomentSet(mean, covariance)
    outputs = surrogate_samples(surrogate, n_samples, seed, stream)
    ensemble = WeightedEnsemble(np.full(n_samples, 1.0 / n_samples), outputs, KIND_SAMPLES)
    sampled = weighted_central_moments(ensemble, max_order)
    return CentralMomentSet(mean, covariance, sampled.third, sampled.fourth)


def surrogate_samples(surrogate: PceSurrogate, n_samples: int = QMC_SAMPLES, seed: int = 42,
                      stream: Union[str, int] = 'pce_moments') -> np.ndarray:
    """Surrogate outputs at ``n_samples`` scrambled-Halton standard-normal inputs."""
    sampler = qmc.Halton(d=surrogate.input_dim, scramble=True, seed=make_generator(seed, stream))
    uniform = np.clip(sampler.random(n_samples), 1e-12, 1.0 - 1e-12)
    xi = norm.ppf(uniform)
    chunks = [surrogate.evaluate(xi[start:start + QMC_CHUNK]) for start in range(0, n_samples, QMC_CHUNK)]
    return np.vstack(chunks)
