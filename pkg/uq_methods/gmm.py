"""Gaussian mixture splitting and per-component propagation."""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from common.exceptions import DecompositionError, NumericalError, PropagationError, SplitError, UsageError
from .beliefs import CentralMomentSet, GaussianBelief, GaussianMixture
from .sigma_points import lincov, ut_run

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 4
DEFAULT_DELTA = 0.5

METHOD_UT = 'ut'
METHOD_LINCOV = 'lincov'


def _dominant_axis(covariance: np.ndarray) -> Tuple[float, np.ndarray]:
    values, vectors = np.linalg.eigh(covariance)
    vector = vectors[:, -1]
    first = np.flatnonzero(np.abs(vector) > 1e-12 * np.max(np.abs(vector)))[0]
    return float(values[-1]), vector if vector[first] > 0 else -vector


def split_component(belief: GaussianBelief, delta: float) -> Tuple[GaussianBelief, GaussianBelief]:
    """
    Two halves at mean ± δ√λ v̂ with covariance P − δ²λ v̂v̂ᵀ, where (λ, v̂)
    is the dominant eigenpair of P. The pair keeps the parent mean and
    covariance.
    """
    lam, axis = _dominant_axis(belief.covariance)
    shift = delta * math.sqrt(lam) * axis
    covariance = belief.covariance - delta ** 2 * lam * np.outer(axis, axis)
    covariance = 0.5 * (covariance + covariance.T)
    children = (GaussianBelief(belief.mean + shift, covariance), GaussianBelief(belief.mean - shift, covariance))
    try:
        children[0].cholesky
    except DecompositionError as exc:
        raise SplitError(f"split with delta={delta} leaves a non-positive-definite covariance") from exc
    return children


def gmm_split(belief: GaussianBelief, depth: int = DEFAULT_DEPTH, delta: float = DEFAULT_DELTA) -> GaussianMixture:
    """``depth`` rounds of binary splits along the dominant axis: 2^depth components."""
    if depth < 0:
        raise UsageError(f"split depth must be non-negative, got {depth}")
    if delta <= 0.0:
        raise UsageError(f"split parameter must be positive, got {delta}")
    if delta >= 1.0:
        raise SplitError(f"split parameter {delta} removes all variance along the split axis")
    components = [(1.0, belief)]
    for _ in range(depth):
        components = [
            (0.5 * weight, child)
            for weight, parent in components
            for child in split_component(parent, delta)
        ]
    return GaussianMixture(components)


def gmm_propagate(mixture: GaussianMixture, propagator, method: str = METHOD_UT,
                  lambda_param: Optional[float] = None) -> Tuple[GaussianMixture, CentralMomentSet]:
    """
    Propagate each component with the unscented transform or LinCov about
    its own mean, then recombine mean and total covariance.

    Raises:
        PropagationError: one or more components failed
    """
    if method not in (METHOD_UT, METHOD_LINCOV):
        raise UsageError(f"unknown per-component method '{method}'")
    propagated = []
    failed = []
    for index, (weight, belief) in enumerate(mixture.components):
        try:
            if method == METHOD_UT:
                result = ut_run(propagator, belief, lambda_param).belief()
            else:
                stm = propagator.jacobian(belief.mean)
                result = lincov(stm, GaussianBelief(np.zeros(belief.dim), belief.covariance),
                                propagator.propagate_one(belief.mean))
        except NumericalError as exc:
            logger.debug("mixture component %d failed: %s", index, exc)
            failed.append(index)
            continue
        propagated.append((weight, result))
    if failed:
        raise PropagationError(f"{len(failed)} of {len(mixture)} mixture components failed", failed)
    output = GaussianMixture(propagated)
    return output, output.moment_set()
