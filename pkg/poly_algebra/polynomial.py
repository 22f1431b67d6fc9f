"""
Truncated multivariate Taylor polynomials (DA numbers).

Coefficients are stored densely over the context's graded-lex basis; the
sparse view returned by ``terms()`` drops coefficients below
``PRUNE_THRESHOLD``. Polynomials are immutable: every operation returns a
new instance.
"""

import numbers
from typing import Dict, Iterable, List, Mapping, Sequence, Union

import numpy as np

from common.exceptions import UsageError
from .context import MultiIndex, PolyContext, poly_context

PRUNE_THRESHOLD = 1e-30

Scalar = Union[int, float, np.number]


def _is_scalar(value) -> bool:
    return isinstance(value, (numbers.Real, np.number)) and not isinstance(value, bool)


class TruncatedPolynomial:
    """A polynomial in ``context.n_vars`` variables truncated at ``context.max_order``."""

    __slots__ = ('context', 'coeffs')
    # numpy defers binary operators to us instead of broadcasting
    __array_ufunc__ = None

    def __init__(self, context: PolyContext, coeffs: Iterable[float] = None):
        self.context = context
        if coeffs is None:
            self.coeffs = np.zeros(context.size)
        else:
            coeffs = np.array(coeffs, dtype=float)
            if coeffs.shape != (context.size,):
                raise UsageError(
                    f"expected {context.size} coefficients for context {context}, got shape {coeffs.shape}"
                )
            self.coeffs = coeffs
        self.coeffs.setflags(write=False)

    @classmethod
    def _wrap(cls, context: PolyContext, coeffs: np.ndarray) -> 'TruncatedPolynomial':
        # hot path: skip validation, caller hands over ownership of coeffs
        poly = object.__new__(cls)
        poly.context = context
        coeffs.setflags(write=False)
        poly.coeffs = coeffs
        return poly

    # Constructors

    @classmethod
    def constant(cls, context: PolyContext, value: float) -> 'TruncatedPolynomial':
        coeffs = np.zeros(context.size)
        coeffs[0] = value
        return cls._wrap(context, coeffs)

    @classmethod
    def variable(cls, context: PolyContext, var: int, value: float = 0.0) -> 'TruncatedPolynomial':
        """The polynomial ``value + x[var]``."""
        coeffs = np.zeros(context.size)
        coeffs[0] = value
        coeffs[context.variable_position(var)] = 1.0
        return cls._wrap(context, coeffs)

    @classmethod
    def from_terms(cls, context: PolyContext, terms: Mapping[MultiIndex, float]) -> 'TruncatedPolynomial':
        coeffs = np.zeros(context.size)
        for alpha, value in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != context.n_vars:
                raise UsageError(f"multi-index {alpha} has length {len(alpha)}, expected {context.n_vars}")
            position = context.index_of.get(alpha)
            if position is None:
                raise UsageError(f"multi-index {alpha} is outside the truncation of {context}")
            coeffs[position] += value
        return cls._wrap(context, coeffs)

    # Accessors

    @property
    def constant_part(self) -> float:
        return float(self.coeffs[0])

    def linear_part(self) -> np.ndarray:
        ctx = self.context
        return np.array([self.coeffs[ctx.variable_position(i)] for i in range(ctx.n_vars)])

    def coefficient(self, alpha: Sequence[int]) -> float:
        position = self.context.index_of.get(tuple(int(a) for a in alpha))
        return 0.0 if position is None else float(self.coeffs[position])

    def terms(self) -> Dict[MultiIndex, float]:
        """Non-negligible coefficients keyed by multi-index, in graded-lex order."""
        indices = self.context.multi_indices
        return {
            indices[m]: float(self.coeffs[m])
            for m in np.flatnonzero(np.abs(self.coeffs) >= PRUNE_THRESHOLD)
        }

    def nonconstant_term_count(self) -> int:
        return int(np.count_nonzero(np.abs(self.coeffs[1:]) >= PRUNE_THRESHOLD))

    def without_constant(self) -> 'TruncatedPolynomial':
        coeffs = self.coeffs.copy()
        coeffs[0] = 0.0
        return TruncatedPolynomial._wrap(self.context, coeffs)

    # Arithmetic

    def _check(self, other: 'TruncatedPolynomial'):
        if other.context != self.context:
            raise UsageError(f"context mismatch: {self.context} vs {other.context}")

    def __add__(self, other):
        if isinstance(other, TruncatedPolynomial):
            self._check(other)
            return TruncatedPolynomial._wrap(self.context, self.coeffs + other.coeffs)
        if _is_scalar(other):
            coeffs = self.coeffs.copy()
            coeffs[0] += other
            return TruncatedPolynomial._wrap(self.context, coeffs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPolynomial._wrap(self.context, -self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, TruncatedPolynomial):
            self._check(other)
            return TruncatedPolynomial._wrap(self.context, self.coeffs - other.coeffs)
        if _is_scalar(other):
            coeffs = self.coeffs.copy()
            coeffs[0] -= other
            return TruncatedPolynomial._wrap(self.context, coeffs)
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            coeffs = -self.coeffs
            coeffs[0] += other
            return TruncatedPolynomial._wrap(self.context, coeffs)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, TruncatedPolynomial):
            self._check(other)
            left, right, target = self.context.product_table
            coeffs = np.bincount(
                target, weights=self.coeffs[left] * other.coeffs[right], minlength=self.context.size
            )
            return TruncatedPolynomial._wrap(self.context, coeffs)
        if _is_scalar(other):
            return TruncatedPolynomial._wrap(self.context, self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedPolynomial):
            from .intrinsics import intrinsic
            return self * intrinsic('reciprocal', other)
        if _is_scalar(other):
            return TruncatedPolynomial._wrap(self.context, self.coeffs / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            from .intrinsics import intrinsic
            return intrinsic('reciprocal', self) * other
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)) and exponent >= 0:
            result = TruncatedPolynomial.constant(self.context, 1.0)
            base = self
            n = int(exponent)
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        if _is_scalar(exponent):
            from .intrinsics import intrinsic
            return intrinsic('pow', self, exponent=float(exponent))
        return NotImplemented

    def derivative(self, var: int) -> 'TruncatedPolynomial':
        """Partial derivative with respect to ``x[var]`` (order drops by one)."""
        if not 0 <= var < self.context.n_vars:
            raise UsageError(f"variable index {var} outside [0, {self.context.n_vars})")
        source, target, factor = self.context.derivative_tables[var]
        coeffs = np.bincount(target, weights=self.coeffs[source] * factor, minlength=self.context.size)
        return TruncatedPolynomial._wrap(self.context, coeffs)

    # Evaluation and composition

    def evaluate(self, point: Sequence[float]) -> float:
        """Value at a single point."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.context.n_vars,):
            raise UsageError(f"point has shape {point.shape}, expected ({self.context.n_vars},)")
        return float(self.evaluate_many(point[None, :])[0])

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """
        Values at each row of ``points``. Terms are accumulated in ascending
        graded-lex order, so single and batched evaluation agree bit for bit.
        """
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.context.n_vars:
            raise UsageError(f"points have shape {points.shape}, expected (n, {self.context.n_vars})")
        active = np.flatnonzero(self.coeffs)
        values = self.context.monomial_values(points, active)
        result = np.zeros(points.shape[0])
        for m in active:
            result += self.coeffs[m] * values[:, m]
        return result

    def compose(self, subs: Sequence['TruncatedPolynomial'], allow_constant_shift: bool = False) -> 'TruncatedPolynomial':
        """
        Substitute ``subs[i]`` for variable i.

        Args:
            subs: One polynomial per variable, all in a common target context
            allow_constant_shift: Accept substitutions with a non-zero
                constant part. Without a shift the result is exact through the
                target order; with a shift the dropped high-order terms of
                this polynomial are not recovered.

        Returns:
            TruncatedPolynomial in the target context
        """
        if len(subs) != self.context.n_vars:
            raise UsageError(f"compose needs {self.context.n_vars} substitutions, got {len(subs)}")
        target = subs[0].context
        for sub in subs:
            if sub.context != target:
                raise UsageError("substitution polynomials must share one context")
            if not allow_constant_shift and sub.coeffs[0] != 0.0:
                raise UsageError("substitution has a non-zero constant part; pass allow_constant_shift=True")
        active = np.flatnonzero(self.coeffs)
        parent, var = self.context.parents
        powers = {0: TruncatedPolynomial.constant(target, 1.0)}
        for m in self.context.closure(active):
            powers[int(m)] = powers[int(parent[m])] * subs[int(var[m])]
        coeffs = np.zeros(target.size)
        for m in active:
            coeffs += self.coeffs[m] * powers[int(m)].coeffs
        return TruncatedPolynomial._wrap(target, coeffs)

    # Text format

    def to_text(self) -> str:
        """One line per stored term: ``α₁ … α_N : coefficient`` in graded-lex order."""
        lines = []
        for alpha, value in self.terms().items():
            lines.append(f"{' '.join(str(a) for a in alpha)} : {value!r}")
        return '\n'.join(lines)

    @classmethod
    def from_text(cls, context: PolyContext, text: str) -> 'TruncatedPolynomial':
        terms = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            exponents, _, value = line.partition(':')
            if not _:
                raise UsageError(f"malformed polynomial line '{line}'")
            terms[tuple(int(a) for a in exponents.split())] = float(value)
        return cls.from_terms(context, terms)

    def __repr__(self):
        return f"TruncatedPolynomial(n_vars={self.context.n_vars}, order={self.context.max_order}, terms={len(self.terms())})"


def constant(context: PolyContext, value: float) -> TruncatedPolynomial:
    return TruncatedPolynomial.constant(context, value)


def variables(context: PolyContext, values: Sequence[float] = None) -> List[TruncatedPolynomial]:
    """The identity deviation vector ``values[i] + x[i]``."""
    values = np.zeros(context.n_vars) if values is None else np.asarray(values, dtype=float)
    if values.shape != (context.n_vars,):
        raise UsageError(f"expected {context.n_vars} reference values, got shape {values.shape}")
    return [TruncatedPolynomial.variable(context, i, values[i]) for i in range(context.n_vars)]


def add(p: TruncatedPolynomial, q: TruncatedPolynomial) -> TruncatedPolynomial:
    if not isinstance(p, TruncatedPolynomial) or not isinstance(q, TruncatedPolynomial):
        raise UsageError("add expects two polynomials")
    return p + q


def mul(p: TruncatedPolynomial, q: TruncatedPolynomial) -> TruncatedPolynomial:
    if not isinstance(p, TruncatedPolynomial) or not isinstance(q, TruncatedPolynomial):
        raise UsageError("mul expects two polynomials")
    return p * q


def evaluate(p: TruncatedPolynomial, point: Sequence[float]) -> float:
    return p.evaluate(point)


def compose(p: TruncatedPolynomial, subs: Sequence[TruncatedPolynomial],
            allow_constant_shift: bool = False) -> TruncatedPolynomial:
    return p.compose(subs, allow_constant_shift=allow_constant_shift)


def is_polynomial_state(state) -> bool:
    """True when any component of ``state`` is a TruncatedPolynomial."""
    return any(isinstance(component, TruncatedPolynomial) for component in state)


def as_coefficients(context: PolyContext, value) -> np.ndarray:
    """Dense coefficients of a polynomial or a real constant in ``context``."""
    if isinstance(value, TruncatedPolynomial):
        return value.coeffs
    coeffs = np.zeros(context.size)
    coeffs[0] = float(value)
    return coeffs


__all__ = [
    'TruncatedPolynomial', 'PRUNE_THRESHOLD', 'constant', 'variables', 'add', 'mul',
    'evaluate', 'compose', 'is_polynomial_state', 'as_coefficients', 'poly_context',
]
