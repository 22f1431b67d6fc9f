"""Weighted central-moment estimation."""

import itertools

import numpy as np

from common.exceptions import EstimatorError, UsageError
from .beliefs import CentralMomentSet, WeightedEnsemble


def weighted_central_moments(ensemble: WeightedEnsemble, max_order: int = 4) -> CentralMomentSet:
    """
    Mean, covariance and (for ``max_order`` 3 or 4) the higher central
    moments Σ wᵢ (xᵢ − m)^⊗k, stored once per sorted index tuple.

    The covariance follows the ensemble's own estimator (unbiased for
    Monte Carlo samples, weighted for sigma sets).
    """
    if max_order not in (2, 3, 4):
        raise UsageError(f"max_order must be 2, 3 or 4, got {max_order}")
    if len(ensemble) == 0:
        raise EstimatorError("moments of an empty ensemble")
    mean = ensemble.mean()
    if len(ensemble) == 1:
        covariance = np.zeros((ensemble.dim, ensemble.dim))
    else:
        covariance = ensemble.covariance()
    centered = ensemble.states - mean
    weights = ensemble.weights
    tables = {}
    for order in range(3, max_order + 1):
        table = {}
        for key in itertools.combinations_with_replacement(range(ensemble.dim), order):
            product = weights.copy()
            for i in key:
                product = product * centered[:, i]
            table[key] = float(product.sum())
        tables[order] = table
    return CentralMomentSet(mean, covariance, tables.get(3), tables.get(4))
