"""
Probability containers shared by the UQ methods.

Beliefs and mixtures describe initial deviations (or propagated states);
ensembles carry weighted points, either equal-weight Monte Carlo samples or
deterministic sigma sets; moment sets hold central moments up to fourth
order in symmetric-unique storage.
"""

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.exceptions import DecompositionError, EstimatorError, UsageError

SYMMETRY_TOLERANCE = 1e-12
WEIGHT_TOLERANCE = 1e-12

KIND_SAMPLES = 'samples'
KIND_SIGMA = 'sigma'

MomentTable = Dict[Tuple[int, ...], float]


def _symmetric_error(matrix: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    return float(np.max(np.abs(matrix - matrix.T), initial=0.0)) / scale


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Mean vector and symmetric positive-definite covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        covariance = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        n = mean.shape[0]
        if mean.ndim != 1 or covariance.shape != (n, n):
            raise UsageError(f"mean of shape {mean.shape} does not match covariance of shape {covariance.shape}")
        if _symmetric_error(covariance) > SYMMETRY_TOLERANCE:
            raise DecompositionError("covariance is not symmetric")
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'covariance', covariance)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor S with S Sᵀ = P."""
        try:
            return np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(f"covariance is not positive definite: {exc}") from exc

    def standard_deviations(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


@dataclass(frozen=True, eq=False)
class WeightedEnsemble:
    """
    Weighted point set.

    ``kind='samples'`` marks equal-weight Monte Carlo draws, whose covariance
    uses the unbiased 1/(n−1) estimator; ``kind='sigma'`` marks deterministic
    sigma sets, whose covariance is the weighted sum of centered outer
    products.
    """

    weights: np.ndarray
    states: np.ndarray
    kind: str = KIND_SAMPLES

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if weights.ndim != 1 or states.shape[0] != weights.shape[0]:
            raise UsageError(f"{weights.shape[0]} weights for {states.shape[0]} states")
        if len(weights) and abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
            raise UsageError(f"ensemble weights sum to {weights.sum()!r}, not 1")
        if self.kind not in (KIND_SAMPLES, KIND_SIGMA):
            raise UsageError(f"unknown ensemble kind '{self.kind}'")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'states', states)

    def __len__(self):
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def with_states(self, states: np.ndarray) -> 'WeightedEnsemble':
        """Same weights and kind, new points (e.g. after propagation)."""
        return WeightedEnsemble(self.weights, states, self.kind)

    def mean(self) -> np.ndarray:
        if len(self) == 0:
            raise EstimatorError("mean of an empty ensemble")
        return self.weights @ self.states

    def covariance(self) -> np.ndarray:
        centered = self.states - self.mean()
        if self.kind == KIND_SAMPLES:
            n = len(self)
            if n < 2:
                raise EstimatorError(f"sample covariance needs at least 2 samples, got {n}")
            return centered.T @ centered / (n - 1)
        return (centered.T * self.weights) @ centered

    def belief(self) -> GaussianBelief:
        covariance = self.covariance()
        return GaussianBelief(self.mean(), 0.5 * (covariance + covariance.T))

    def subset(self, indices: Sequence[int]) -> 'WeightedEnsemble':
        """Restrict the states to the given components."""
        return WeightedEnsemble(self.weights, self.states[:, list(indices)], self.kind)


def _expand(table: MomentTable, dim: int, order: int) -> np.ndarray:
    tensor = np.zeros((dim,) * order)
    for key, value in table.items():
        for permutation in set(itertools.permutations(key)):
            tensor[permutation] = value
    return tensor


@dataclass(eq=False)
class CentralMomentSet:
    """
    Mean, covariance and optional third and fourth central moments.

    Higher moments are stored once per sorted index tuple; ``third_tensor``
    and ``fourth_tensor`` expand them to dense symmetric arrays.
    """

    mean: np.ndarray
    covariance: np.ndarray
    third: Optional[MomentTable] = None
    fourth: Optional[MomentTable] = None
    _dense: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        n = self.mean.shape[0]
        if self.covariance.shape != (n, n):
            raise UsageError(f"covariance shape {self.covariance.shape} does not match mean of length {n}")
        self.third = self._normalize(self.third, 3)
        self.fourth = self._normalize(self.fourth, 4)

    def _normalize(self, table: Optional[MomentTable], order: int) -> Optional[MomentTable]:
        if table is None:
            return None
        normalized = {}
        for key, value in table.items():
            key = tuple(sorted(int(i) for i in key))
            if len(key) != order or not all(0 <= i < self.dim for i in key):
                raise UsageError(f"invalid order-{order} moment index {key}")
            normalized[key] = float(value)
        return normalized

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def max_order(self) -> int:
        if self.fourth is not None:
            return 4
        return 3 if self.third is not None else 2

    def third_moment(self, i: int, j: int, k: int) -> float:
        if self.third is None:
            raise UsageError("third moments were not computed")
        return self.third.get(tuple(sorted((i, j, k))), 0.0)

    def fourth_moment(self, i: int, j: int, k: int, l: int) -> float:
        if self.fourth is None:
            raise UsageError("fourth moments were not computed")
        return self.fourth.get(tuple(sorted((i, j, k, l))), 0.0)

    def third_tensor(self) -> np.ndarray:
        if self.third is None:
            raise UsageError("third moments were not computed")
        if 3 not in self._dense:
            self._dense[3] = _expand(self.third, self.dim, 3)
        return self._dense[3]

    def fourth_tensor(self) -> np.ndarray:
        if self.fourth is None:
            raise UsageError("fourth moments were not computed")
        if 4 not in self._dense:
            self._dense[4] = _expand(self.fourth, self.dim, 4)
        return self._dense[4]

    def marginal(self, indices: Sequence[int]) -> 'CentralMomentSet':
        """Moments of the sub-vector ``x[indices]``."""
        indices = [int(i) for i in indices]
        position = {old: new for new, old in enumerate(indices)}
        if len(position) != len(indices) or not all(0 <= i < self.dim for i in indices):
            raise UsageError(f"invalid marginal indices {indices}")

        def restrict(table):
            if table is None:
                return None
            return {tuple(position[i] for i in key): value for key, value in table.items()
                    if all(i in position for i in key)}

        return CentralMomentSet(
            self.mean[indices], self.covariance[np.ix_(indices, indices)],
            restrict(self.third), restrict(self.fourth),
        )

    def to_dict(self) -> dict:
        data = {'mean': self.mean.tolist(), 'covariance': self.covariance.tolist()}
        for name, table in (('third', self.third), ('fourth', self.fourth)):
            if table is not None:
                data[name] = [[list(key), value] for key, value in sorted(table.items())]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'CentralMomentSet':
        unknown = set(data) - {'mean', 'covariance', 'third', 'fourth'}
        if unknown:
            raise UsageError(f"unknown moment-set keys: {', '.join(sorted(unknown))}")

        def table(name):
            if data.get(name) is None:
                return None
            return {tuple(key): value for key, value in data[name]}

        return cls(data['mean'], data['covariance'], table('third'), table('fourth'))

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> 'CentralMomentSet':
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Weighted sum of Gaussian components."""

    components: List[Tuple[float, GaussianBelief]]

    def __post_init__(self):
        if not self.components:
            raise UsageError("a mixture needs at least one component")
        weights = self.weights
        if np.any(weights <= 0.0):
            raise UsageError("mixture weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
            raise UsageError(f"mixture weights sum to {weights.sum()!r}, not 1")
        dims = {belief.dim for _, belief in self.components}
        if len(dims) != 1:
            raise UsageError("mixture components differ in dimension")

    def __len__(self):
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([weight for weight, _ in self.components], dtype=float)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim

    def mean(self) -> np.ndarray:
        return sum(weight * belief.mean for weight, belief in self.components)

    def covariance(self) -> np.ndarray:
        """Total covariance Σ w (P + (m − m̄)(m − m̄)ᵀ)."""
        mean = self.mean()
        total = np.zeros((self.dim, self.dim))
        for weight, belief in self.components:
            offset = belief.mean - mean
            total += weight * (belief.covariance + np.outer(offset, offset))
        return total

    def moment_set(self) -> CentralMomentSet:
        return CentralMomentSet(self.mean(), self.covariance())


def covariance_error(p_test: np.ndarray, p_ref: np.ndarray) -> float:
    """Relative Frobenius error ‖P_test − P_ref‖_F / ‖P_ref‖_F."""
    p_test = np.asarray(p_test, dtype=float)
    p_ref = np.asarray(p_ref, dtype=float)
    if p_test.shape != p_ref.shape:
        raise UsageError(f"covariance shapes differ: {p_test.shape} vs {p_ref.shape}")
    reference = np.linalg.norm(p_ref, 'fro')
    if reference == 0.0:
        raise EstimatorError("reference covariance has zero norm")
    return float(np.linalg.norm(p_test - p_ref, 'fro') / reference)
