"""
Polynomial flow maps.

A full map expands the flow in all N initial deviations up to order j. A
directional map keeps order j only along the stretching direction γ̂* and
first order across it: its variables are χ = γ̂*ᵀδ and ε = Lᵀδ.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from common.exceptions import NumericalError, UsageError
from dynamics.integrators import IntegratorSettings, default_settings, propagate
from poly_algebra.context import TRUNCATION_DIRECTIONAL, TRUNCATION_TOTAL, PolyContext, poly_context
from poly_algebra.polynomial import TruncatedPolynomial, variables

logger = logging.getLogger(__name__)

KIND_FULL = 'full'
KIND_DIRECTIONAL = 'directional'


def transverse_basis(direction: np.ndarray) -> np.ndarray:
    """
    Orthonormal N×(N−1) basis of the complement of ``direction``, completed
    by Gram-Schmidt over the standard basis vectors in index order.
    """
    direction = np.asarray(direction, dtype=float)
    n = direction.shape[0]
    basis = [direction / np.linalg.norm(direction)]
    for i in range(n):
        candidate = np.zeros(n)
        candidate[i] = 1.0
        # two passes keep the columns orthogonal to round-off
        for _ in range(2):
            for vector in basis:
                candidate = candidate - (vector @ candidate) * vector
        norm = np.linalg.norm(candidate)
        if norm > 1e-8:
            basis.append(candidate / norm)
        if len(basis) == n:
            break
    return np.column_stack(basis[1:])


@dataclass(frozen=True, eq=False)
class DirectionFrame:
    """Unit direction γ̂* and the transverse basis L."""

    gamma_star: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma_star, dtype=float)
        L = np.asarray(self.L, dtype=float)
        n = gamma.shape[0]
        if L.shape != (n, n - 1):
            raise UsageError(f"transverse basis must be {n}x{n - 1}, got {L.shape}")
        if abs(np.linalg.norm(gamma) - 1.0) > 1e-12:
            raise UsageError("direction must be a unit vector")
        if np.max(np.abs(L.T @ gamma), initial=0.0) > 1e-12 or \
                np.max(np.abs(L.T @ L - np.eye(n - 1)), initial=0.0) > 1e-12:
            raise UsageError("transverse basis must be orthonormal and orthogonal to the direction")
        object.__setattr__(self, 'gamma_star', gamma)
        object.__setattr__(self, 'L', L)

    @classmethod
    def from_direction(cls, direction: Sequence[float]) -> 'DirectionFrame':
        direction = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(direction)
        if not norm > 0.0:
            raise UsageError("direction must be non-zero")
        gamma = direction / norm
        return cls(gamma, transverse_basis(gamma))

    @property
    def dim(self) -> int:
        return self.gamma_star.shape[0]

    @property
    def basis(self) -> np.ndarray:
        """Orthogonal N×N matrix [γ̂* L]."""
        return np.column_stack([self.gamma_star, self.L])

    def decompose(self, deltas: np.ndarray) -> np.ndarray:
        """Rows δ → rows (χ, ε₁, …, ε_{N−1})."""
        return np.asarray(deltas, dtype=float) @ self.basis

    def recompose(self, coordinates: np.ndarray) -> np.ndarray:
        return np.asarray(coordinates, dtype=float) @ self.basis.T


def stretching_direction(stm: np.ndarray) -> np.ndarray:
    """
    Dominant eigenvector of the Cauchy-Green tensor G = ΦᵀΦ, normalized with
    its first non-negligible component positive.
    """
    stm = np.asarray(stm, dtype=float)
    if stm.ndim != 2 or stm.shape[0] != stm.shape[1]:
        raise UsageError(f"STM must be square, got shape {stm.shape}")
    if not np.all(np.isfinite(stm)):
        raise NumericalError("STM contains non-finite entries")
    try:
        _, vectors = np.linalg.eigh(stm.T @ stm)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cauchy-Green eigen-solve failed: {exc}") from exc
    return _sign_normalized(vectors[:, -1])


def _sign_normalized(vector: np.ndarray) -> np.ndarray:
    vector = vector / np.linalg.norm(vector)
    scale = np.max(np.abs(vector))
    for component in vector:
        if abs(component) > 1e-12 * scale:
            return vector if component > 0 else -vector
    return vector


@dataclass(eq=False)
class PolyFlowMap:
    """
    Truncated Taylor expansion of the flow from ``t0`` to ``tf`` about
    ``reference_state``. ``components[i]`` gives final state i as a
    polynomial in the map variables (δ for full maps, (χ, ε) for directional
    maps).
    """

    reference_state: np.ndarray
    t0: float
    tf: float
    kind: str
    order: int
    components: List[TruncatedPolynomial]
    frame: Optional[DirectionFrame] = None
    system: str = ''
    _coefficient_matrix: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.reference_state = np.asarray(self.reference_state, dtype=float)
        if self.kind not in (KIND_FULL, KIND_DIRECTIONAL):
            raise UsageError(f"unknown map kind '{self.kind}'")
        if self.kind == KIND_DIRECTIONAL and self.frame is None:
            raise UsageError("directional maps need a DirectionFrame")
        n = self.reference_state.shape[0]
        if len(self.components) != n:
            raise UsageError(f"{len(self.components)} components for a {n}-dimensional state")
        context = self.components[0].context
        if any(c.context != context for c in self.components) or context.n_vars != n:
            raise UsageError("map components must share one context with one variable per state")
        self._coefficient_matrix = np.stack([c.coeffs for c in self.components])

    @property
    def context(self) -> PolyContext:
        return self.components[0].context

    @property
    def dim(self) -> int:
        return self.reference_state.shape[0]

    @property
    def final_reference(self) -> np.ndarray:
        """Constant parts: the propagated reference state."""
        return self._coefficient_matrix[:, 0].copy()

    @property
    def coefficient_matrix(self) -> np.ndarray:
        return self._coefficient_matrix

    def linear_part(self) -> np.ndarray:
        """Jacobian with respect to the map variables at zero deviation."""
        ctx = self.context
        columns = [ctx.variable_position(i) for i in range(ctx.n_vars)]
        return self._coefficient_matrix[:, columns].copy()

    def stm(self) -> np.ndarray:
        """Φ(tf, t0) in the original coordinates."""
        linear = self.linear_part()
        if self.kind == KIND_DIRECTIONAL:
            return linear @ self.frame.basis.T
        return linear

    def term_counts(self) -> List[int]:
        return [c.nonconstant_term_count() for c in self.components]

    def to_variables(self, deltas: np.ndarray) -> np.ndarray:
        deltas = np.asarray(deltas, dtype=float)
        if self.kind == KIND_DIRECTIONAL:
            return self.frame.decompose(deltas)
        return deltas

    def evaluate(self, delta: Sequence[float]) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.dim,):
            raise UsageError(f"deviation has shape {delta.shape}, expected ({self.dim},)")
        return self.evaluate_batch(delta[None, :])[0]

    def evaluate_batch(self, deltas: np.ndarray) -> np.ndarray:
        """
        Final states for each row of ``deltas``. Only monomials with a
        non-zero coefficient in some component (and their parent chains)
        are built; terms are accumulated in ascending basis order.
        """
        deltas = np.asarray(deltas, dtype=float)
        if deltas.ndim != 2 or deltas.shape[1] != self.dim:
            raise UsageError(f"deviations have shape {deltas.shape}, expected (n, {self.dim})")
        points = self.to_variables(deltas)
        coefficients = self._coefficient_matrix
        active = np.flatnonzero(np.any(coefficients != 0.0, axis=0))
        values = self.context.monomial_values(points, active)
        result = np.zeros((deltas.shape[0], self.dim))
        for m in active:
            result += values[:, m, None] * coefficients[:, m]
        return result

    def jacobian(self, delta: Sequence[float]) -> np.ndarray:
        """∂(final state)/∂δ at the given deviation."""
        delta = np.asarray(delta, dtype=float)
        point = self.to_variables(delta[None, :])
        columns = []
        for var in range(self.dim):
            derivatives = [c.derivative(var) for c in self.components]
            columns.append([d.evaluate_many(point)[0] for d in derivatives])
        jacobian = np.array(columns).T
        if self.kind == KIND_DIRECTIONAL:
            return jacobian @ self.frame.basis.T
        return jacobian


def _initial_polynomials(context: PolyContext, x_r: np.ndarray, frame: Optional[DirectionFrame]):
    if frame is None:
        return variables(context, x_r)
    coords = variables(context)
    basis = frame.basis
    state = []
    for i in range(len(x_r)):
        component = TruncatedPolynomial.constant(context, x_r[i])
        for k in range(len(x_r)):
            if basis[i, k] != 0.0:
                component = component + basis[i, k] * coords[k]
        state.append(component)
    return state


def build_da_map(system, x_r: Sequence[float], t0: float, tf: float, order: int,
                 settings: IntegratorSettings = None) -> PolyFlowMap:
    """
    Full Taylor map of order ``order``: the state is initialized as
    x_r + identity deviations and propagated through the system's RHS.
    """
    x_r = np.asarray(x_r, dtype=float)
    context = poly_context(len(x_r), order, TRUNCATION_TOTAL)
    settings = settings or default_settings(system)
    final = propagate(system.rhs, _initial_polynomials(context, x_r, None), t0, tf, settings)
    logger.info("built full map: N=%d order=%d monomials=%d span=[%g, %g]",
                len(x_r), order, context.size, t0, tf)
    return PolyFlowMap(x_r, t0, tf, KIND_FULL, order, list(final), system=getattr(system, 'kind', ''))


def build_dda_map(system, x_r: Sequence[float], t0: float, tf: float, order: int,
                  frame: DirectionFrame, settings: IntegratorSettings = None) -> PolyFlowMap:
    """
    Directional map: one propagation in the directional context with the
    initial deviation γ̂*χ + Lε, so χ is carried to ``order`` and ε only to
    first order with no mixed terms.
    """
    x_r = np.asarray(x_r, dtype=float)
    if frame.dim != len(x_r):
        raise UsageError(f"frame dimension {frame.dim} does not match state dimension {len(x_r)}")
    context = poly_context(len(x_r), order, TRUNCATION_DIRECTIONAL)
    settings = settings or default_settings(system)
    final = propagate(system.rhs, _initial_polynomials(context, x_r, frame), t0, tf, settings)
    logger.info("built directional map: N=%d order=%d monomials=%d span=[%g, %g]",
                len(x_r), order, context.size, t0, tf)
    return PolyFlowMap(x_r, t0, tf, KIND_DIRECTIONAL, order, list(final), frame=frame,
                       system=getattr(system, 'kind', ''))


def eval_map(flow_map: PolyFlowMap, delta_x0: Sequence[float]) -> np.ndarray:
    return flow_map.evaluate(delta_x0)


def eval_map_batch(flow_map: PolyFlowMap, deltas: np.ndarray) -> np.ndarray:
    return flow_map.evaluate_batch(deltas)


def chain_maps(first: PolyFlowMap, second: PolyFlowMap) -> PolyFlowMap:
    """
    Compose two full maps over adjacent intervals. ``second`` must be
    expanded about the final reference of ``first``.
    """
    if first.kind != KIND_FULL or second.kind != KIND_FULL:
        raise UsageError("only full maps can be chained")
    if first.context != second.context:
        raise UsageError("chained maps must share a context")
    if first.tf != second.t0:
        raise UsageError(f"maps are not adjacent: {first.tf} != {second.t0}")
    offset = first.final_reference - second.reference_state
    if np.max(np.abs(offset)) > 1e-9 * max(1.0, np.max(np.abs(second.reference_state))):
        raise UsageError("second map is not expanded about the first map's final reference")
    inner = [c - c.constant_part for c in first.components]
    shifted = [inner[i] + offset[i] for i in range(first.dim)]
    allow_shift = bool(np.any(offset != 0.0))
    components = [c.compose(shifted, allow_constant_shift=allow_shift) for c in second.components]
    return PolyFlowMap(first.reference_state, first.t0, second.tf, KIND_FULL, first.order, components,
                       system=first.system)
