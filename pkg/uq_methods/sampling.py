"""
Seeded random streams and Monte Carlo propagation.

All draws come from numpy's Philox-4x64 counter-based generator. A run seed
and a named stream fix the generator state through ``SeedSequence`` spawn
keys, so every method gets an independent, reproducible stream.
"""

import logging
from typing import Union

import numpy as np

from common.exceptions import UsageError
from .beliefs import KIND_SAMPLES, GaussianBelief, WeightedEnsemble

logger = logging.getLogger(__name__)

# Stream names used by the study runners; the value is the spawn key.
STREAMS = {
    'mc': 0,
    'pce': 1,
    'pce_moments': 2,
    'coverage': 3,
    'bench': 4,
}


def stream_key(stream: Union[str, int]) -> int:
    if isinstance(stream, str):
        try:
            return STREAMS[stream]
        except KeyError:
            raise UsageError(f"unknown random stream '{stream}'") from None
    if stream < 0:
        raise UsageError(f"stream keys must be non-negative, got {stream}")
    return int(stream)


def make_generator(seed: int, stream: Union[str, int] = 'mc') -> np.random.Generator:
    """Philox generator for ``(seed, stream)``; identical inputs give identical draws."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(stream_key(stream),))
    return np.random.Generator(np.random.Philox(sequence))


def sample_gaussian(belief: GaussianBelief, n: int, seed: int, stream: Union[str, int] = 'mc') -> WeightedEnsemble:
    """
    Draw ``n`` equal-weight samples mean + S z with S the lower Cholesky factor.

    Raises:
        UsageError: fewer than two samples
        DecompositionError: covariance is not positive definite
    """
    if n < 2:
        raise UsageError(f"at least two samples are needed, got {n}")
    factor = belief.cholesky
    z = make_generator(seed, stream).standard_normal((n, belief.dim))
    states = belief.mean + z @ factor.T
    return WeightedEnsemble(np.full(n, 1.0 / n), states, KIND_SAMPLES)


def mc_run(propagator, belief: GaussianBelief, n: int, seed: int,
           stream: Union[str, int] = 'mc') -> WeightedEnsemble:
    """Sample initial deviations and propagate every sample."""
    initial = sample_gaussian(belief, n, seed, stream)
    logger.debug("monte carlo: propagating %d samples with %s", n, propagator.label)
    return initial.with_states(propagator.propagate(initial.states))
