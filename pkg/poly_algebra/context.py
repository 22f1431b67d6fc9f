"""
Truncation contexts for multivariate Taylor polynomials.

A context fixes the number of independent variables and the truncation
order, and owns the monomial tables shared by every polynomial created
under it: the graded-lexicographic basis, the product table used by
multiplication, the parent chain used to build monomial values
incrementally, and the derivative tables.
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from common.exceptions import UsageError

MAX_ORDER = 10

TRUNCATION_TOTAL = 'total'
TRUNCATION_DIRECTIONAL = 'directional'

MultiIndex = Tuple[int, ...]


def multi_index_order(alpha: Sequence[int]) -> int:
    """Total order |α| of a multi-index."""
    return int(sum(alpha))


def multi_index_factorial(alpha: Sequence[int]) -> int:
    """Exact α! = Π αᵢ! as a Python integer."""
    return math.prod(math.factorial(a) for a in alpha)


def monomial_count(n_vars: int, order: int) -> int:
    """
    Number of non-constant monomials of total order at most ``order`` in
    ``n_vars`` variables.

    Args:
        n_vars: Number of variables N (>= 1)
        order: Truncation order j (>= 0)

    Returns:
        int: C(N + j, N) - 1
    """
    if n_vars < 1 or order < 0:
        raise UsageError(f"monomial_count needs n_vars >= 1 and order >= 0, got ({n_vars}, {order})")
    return math.comb(n_vars + order, n_vars) - 1


def graded_lex_indices(n_vars: int, max_order: int) -> List[MultiIndex]:
    """
    All multi-indices with |α| <= max_order, ordered by total degree and
    lexicographically (descending exponent of the first variable) inside a
    degree.
    """
    indices = []
    for degree in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), degree):
            alpha = [0] * n_vars
            for var in combo:
                alpha[var] += 1
            indices.append(tuple(alpha))
    return indices


def _directional_indices(n_vars: int, max_order: int) -> List[MultiIndex]:
    zero = (0,) * n_vars
    indices = [zero]
    for var in range(n_vars):
        alpha = list(zero)
        alpha[var] = 1
        indices.append(tuple(alpha))
    for degree in range(2, max_order + 1):
        indices.append((degree,) + (0,) * (n_vars - 1))
    return indices


@dataclass(frozen=True)
class PolyContext:
    """
    Shape of a truncated polynomial algebra.

    ``truncation='total'`` keeps every monomial with |α| <= max_order.
    ``truncation='directional'`` keeps pure powers of the first variable up
    to max_order and the remaining variables at first order only, with no
    mixed terms. The discarded monomials form an ideal, so arithmetic on the
    retained coefficients is exact.
    """

    n_vars: int
    max_order: int
    truncation: str = TRUNCATION_TOTAL

    def __post_init__(self):
        if self.n_vars < 1:
            raise UsageError(f"a polynomial context needs at least one variable, got {self.n_vars}")
        if not 1 <= self.max_order <= MAX_ORDER:
            raise UsageError(f"truncation order must lie in [1, {MAX_ORDER}], got {self.max_order}")
        if self.truncation not in (TRUNCATION_TOTAL, TRUNCATION_DIRECTIONAL):
            raise UsageError(f"unknown truncation '{self.truncation}'")

    @cached_property
    def multi_indices(self) -> Tuple[MultiIndex, ...]:
        if self.truncation == TRUNCATION_DIRECTIONAL:
            return tuple(_directional_indices(self.n_vars, self.max_order))
        return tuple(graded_lex_indices(self.n_vars, self.max_order))

    @cached_property
    def exponents(self) -> np.ndarray:
        return np.array(self.multi_indices, dtype=np.uint8).reshape(self.size, self.n_vars)

    @cached_property
    def index_of(self) -> Dict[MultiIndex, int]:
        return {alpha: position for position, alpha in enumerate(self.multi_indices)}

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.exponents.sum(axis=1, dtype=np.int64)

    @property
    def size(self) -> int:
        """Number of stored monomials including the constant."""
        return len(self.multi_indices)

    @property
    def term_bound(self) -> int:
        """Maximum number of non-constant terms a polynomial can hold."""
        return self.size - 1

    def variable_position(self, var: int) -> int:
        if not 0 <= var < self.n_vars:
            raise UsageError(f"variable index {var} outside [0, {self.n_vars})")
        alpha = [0] * self.n_vars
        alpha[var] = 1
        return self.index_of[tuple(alpha)]

    @cached_property
    def product_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        (left, right, target) arrays listing every pair of monomials whose
        product is retained, ordered by left then right position.
        """
        left, right, target = [], [], []
        index_of = self.index_of
        degrees = [multi_index_order(alpha) for alpha in self.multi_indices]
        for a, alpha in enumerate(self.multi_indices):
            for b, beta in enumerate(self.multi_indices):
                if degrees[a] + degrees[b] > self.max_order:
                    # basis is sorted by degree
                    break
                product = tuple(x + y for x, y in zip(alpha, beta))
                position = index_of.get(product)
                if position is not None:
                    left.append(a)
                    right.append(b)
                    target.append(position)
        return (np.array(left, dtype=np.intp),
                np.array(right, dtype=np.intp),
                np.array(target, dtype=np.intp))

    @cached_property
    def parents(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        For each monomial m > 0, a parent monomial and a variable such that
        monomial(m) = monomial(parent) * x[var]. Parents always precede
        their children in the basis order.
        """
        parent = np.zeros(self.size, dtype=np.intp)
        var = np.zeros(self.size, dtype=np.intp)
        for position, alpha in enumerate(self.multi_indices[1:], start=1):
            first = next(i for i, a in enumerate(alpha) if a > 0)
            reduced = list(alpha)
            reduced[first] -= 1
            parent[position] = self.index_of[tuple(reduced)]
            var[position] = first
        return parent, var

    def closure(self, positions: Sequence[int]) -> np.ndarray:
        """Sorted positions needed to build the given monomials from parents."""
        parent, _ = self.parents
        needed = set()
        for position in positions:
            position = int(position)
            while position and position not in needed:
                needed.add(position)
                position = int(parent[position])
        return np.array(sorted(needed), dtype=np.intp)

    def monomial_values(self, points: np.ndarray, positions: Sequence[int] = None) -> np.ndarray:
        """
        Values of the basis monomials at each row of ``points``.

        Args:
            points: (n, n_vars) array
            positions: Optional subset of monomials that will be read; only
                their parent closure is computed.

        Returns:
            (n, size) array; columns outside the closure are left at zero.
        """
        points = np.asarray(points, dtype=float)
        values = np.zeros((points.shape[0], self.size))
        values[:, 0] = 1.0
        parent, var = self.parents
        columns = range(1, self.size) if positions is None else self.closure(positions)
        for m in columns:
            values[:, m] = values[:, parent[m]] * points[:, var[m]]
        return values

    @cached_property
    def derivative_tables(self) -> Tuple[Tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
        """
        Per variable, (source, target, factor) arrays such that the partial
        derivative moves coefficient ``source`` times ``factor`` to ``target``.
        """
        tables = []
        for var in range(self.n_vars):
            source, target, factor = [], [], []
            for position, alpha in enumerate(self.multi_indices):
                if alpha[var] == 0:
                    continue
                reduced = list(alpha)
                reduced[var] -= 1
                source.append(position)
                target.append(self.index_of[tuple(reduced)])
                factor.append(float(alpha[var]))
            tables.append((np.array(source, dtype=np.intp),
                           np.array(target, dtype=np.intp),
                           np.array(factor)))
        return tuple(tables)


@lru_cache(maxsize=None)
def poly_context(n_vars: int, max_order: int, truncation: str = TRUNCATION_TOTAL) -> PolyContext:
    """Shared context instance so the monomial tables are built once."""
    return PolyContext(n_vars, max_order, truncation)
