"""
Propagators: initial deviations in, final states out.

Every UQ method talks to the dynamics through this interface, so the same
method runs over direct integration or a precomputed flow map.
"""

import logging
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from common.exceptions import NumericalError, PropagationError, UsageError
from dynamics.integrators import IntegratorSettings, default_settings, propagate, propagate_batch
from dynamics.stm import stm_propagate
from flowmaps.maps import PolyFlowMap

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 1000


class Propagator(ABC):
    """Maps rows of initial deviations about a fixed reference to final states."""

    label = 'propagator'

    @property
    @abstractmethod
    def dim(self) -> int:
        """Dimension of the input deviation."""

    @property
    @abstractmethod
    def reference_final(self) -> np.ndarray:
        """Final state reached from the zero deviation."""

    @abstractmethod
    def propagate(self, deltas: np.ndarray) -> np.ndarray:
        """(m, N) deviations → (m, N_out) final states."""

    @abstractmethod
    def jacobian(self, delta: Sequence[float]) -> np.ndarray:
        """∂(final state)/∂δ at ``delta``."""

    def propagate_one(self, delta: Sequence[float]) -> np.ndarray:
        return self.propagate(np.asarray(delta, dtype=float)[None, :])[0]

    def _check(self, deltas: np.ndarray) -> np.ndarray:
        deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
        if deltas.shape[1] != self.dim:
            raise UsageError(f"deviations have {deltas.shape[1]} components, expected {self.dim}")
        return deltas


class DirectPropagator(Propagator):
    """
    Integrates the nonlinear dynamics for every deviation.

    Deviations are integrated ``batch_size`` at a time as one vectorized ODE
    system; a failing batch is retried member by member so the members that
    cannot be propagated are reported by index.
    """

    label = 'direct'

    def __init__(self, system, reference_state: Sequence[float], t0: float, tf: float,
                 settings: Optional[IntegratorSettings] = None, batch_size: int = DEFAULT_BATCH_SIZE):
        if batch_size < 1:
            raise UsageError(f"batch size must be positive, got {batch_size}")
        self.system = system
        self.reference_state = np.asarray(reference_state, dtype=float)
        self.t0 = t0
        self.tf = tf
        self.settings = settings or default_settings(system)
        self.batch_size = batch_size

    @property
    def dim(self) -> int:
        return self.reference_state.shape[0]

    @cached_property
    def reference_final(self) -> np.ndarray:
        return np.asarray(propagate(self.system.rhs, self.reference_state, self.t0, self.tf, self.settings))

    def _propagate_single(self, state: np.ndarray) -> np.ndarray:
        return np.asarray(propagate(self.system.rhs, state, self.t0, self.tf, self.settings), dtype=float)

    def propagate(self, deltas: np.ndarray) -> np.ndarray:
        states = self.reference_state + self._check(deltas)
        result = np.empty_like(states)
        failed = []
        for start in range(0, len(states), self.batch_size):
            chunk = slice(start, start + self.batch_size)
            if self.batch_size == 1:
                try:
                    result[chunk] = self._propagate_single(states[start])
                except NumericalError as exc:
                    logger.debug("member %d failed: %s", start, exc)
                    failed.append(start)
                continue
            try:
                result[chunk] = propagate_batch(self.system.rhs, states[chunk], self.t0, self.tf, self.settings)
            except NumericalError as exc:
                logger.warning("batch starting at %d failed (%s); retrying members one by one", start, exc)
                for i in range(start, min(start + self.batch_size, len(states))):
                    try:
                        result[i] = self._propagate_single(states[i])
                    except NumericalError:
                        failed.append(i)
        if failed:
            raise PropagationError(f"{len(failed)} of {len(states)} members failed to propagate", failed)
        return result

    def jacobian(self, delta: Sequence[float]) -> np.ndarray:
        return stm_propagate(self.system, self.reference_state + np.asarray(delta, dtype=float),
                             self.t0, self.tf, self.settings)


class MappedPropagator(Propagator):
    """Evaluates a precomputed polynomial flow map."""

    def __init__(self, flow_map: PolyFlowMap):
        self.flow_map = flow_map
        self.label = f"{flow_map.kind} map (order {flow_map.order})"

    @property
    def dim(self) -> int:
        return self.flow_map.dim

    @property
    def reference_final(self) -> np.ndarray:
        return self.flow_map.final_reference

    def propagate(self, deltas: np.ndarray) -> np.ndarray:
        return self.flow_map.evaluate_batch(self._check(deltas))

    def jacobian(self, delta: Sequence[float]) -> np.ndarray:
        return self.flow_map.jacobian(delta)


class CallablePropagator(Propagator):
    """
    Wraps a plain function of one deviation vector.

    The Jacobian is taken by central differences with step ``step``.
    """

    label = 'callable'

    def __init__(self, function: Callable[[np.ndarray], np.ndarray], dim: int, step: float = 1e-6):
        if dim < 1:
            raise UsageError(f"input dimension must be positive, got {dim}")
        self.function = function
        self._dim = dim
        self.step = step

    @property
    def dim(self) -> int:
        return self._dim

    @cached_property
    def reference_final(self) -> np.ndarray:
        return self.propagate_one(np.zeros(self.dim))

    def propagate(self, deltas: np.ndarray) -> np.ndarray:
        deltas = self._check(deltas)
        return np.array([np.atleast_1d(np.asarray(self.function(delta), dtype=float)) for delta in deltas])

    def jacobian(self, delta: Sequence[float]) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        offsets = np.eye(self.dim) * self.step
        plus = self.propagate(delta + offsets)
        minus = self.propagate(delta - offsets)
        return ((plus - minus) / (2.0 * self.step)).T
