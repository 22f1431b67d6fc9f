"""
Elementary functions of truncated polynomials.

Every intrinsic is evaluated as the univariate Taylor series of f about the
constant part p₀, composed with the nilpotent remainder h = p − p₀ by
Horner's rule. The module-level helpers (``sqrt``, ``exp``, ...) accept
either polynomials or real scalars/arrays, so model code written against
them runs unchanged in both algebras.
"""

import math
from typing import Callable, Dict, List, Optional

import numpy as np

from common.exceptions import DomainError, UsageError
from .polynomial import TruncatedPolynomial


def _power_series(p0: float, order: int, exponent: float) -> List[float]:
    coeffs = [p0 ** exponent]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * (exponent - k + 1) / (k * p0))
    return coeffs


def _exp_series(p0: float, order: int) -> List[float]:
    base = math.exp(p0)
    return [base / math.factorial(k) for k in range(order + 1)]


def _log_series(p0: float, order: int) -> List[float]:
    coeffs = [math.log(p0)]
    for k in range(1, order + 1):
        coeffs.append((-1) ** (k + 1) / (k * p0 ** k))
    return coeffs


def _sin_series(p0: float, order: int) -> List[float]:
    cycle = (math.sin(p0), math.cos(p0), -math.sin(p0), -math.cos(p0))
    return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]


def _cos_series(p0: float, order: int) -> List[float]:
    cycle = (math.cos(p0), -math.sin(p0), -math.cos(p0), math.sin(p0))
    return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]


def _check_positive(name: str, p0: float):
    if not p0 > 0.0:
        raise DomainError(name, p0)


def _check_nonzero(name: str, p0: float):
    if p0 == 0.0 or not math.isfinite(p0):
        raise DomainError(name, p0)


def _series(name: str, p0: float, order: int, exponent: Optional[float]) -> List[float]:
    if not math.isfinite(p0):
        raise DomainError(name, p0)
    if name == 'reciprocal':
        _check_nonzero(name, p0)
        return _power_series(p0, order, -1.0)
    if name == 'sqrt':
        _check_positive(name, p0)
        return _power_series(p0, order, 0.5)
    if name == 'inv_sqrt':
        _check_positive(name, p0)
        return _power_series(p0, order, -0.5)
    if name == 'exp':
        return _exp_series(p0, order)
    if name == 'ln':
        _check_positive(name, p0)
        return _log_series(p0, order)
    if name == 'sin':
        return _sin_series(p0, order)
    if name == 'cos':
        return _cos_series(p0, order)
    if name == 'pow':
        if exponent is None:
            raise UsageError("pow needs an exponent")
        if float(exponent).is_integer():
            if exponent < 0:
                _check_nonzero(name, p0)
            if exponent >= 0 and p0 == 0.0:
                # integer powers of a nilpotent remainder
                return [1.0 if k == exponent else 0.0 for k in range(order + 1)]
        else:
            _check_positive(name, p0)
        return _power_series(p0, order, float(exponent))
    raise UsageError(f"unknown intrinsic '{name}'")


INTRINSICS = ('reciprocal', 'sqrt', 'inv_sqrt', 'exp', 'ln', 'sin', 'cos', 'pow')


def intrinsic(name: str, p: TruncatedPolynomial, exponent: Optional[float] = None) -> TruncatedPolynomial:
    """
    Order-j Taylor composition f(p₀) + Σ f⁽ᵏ⁾(p₀)/k! (p − p₀)ᵏ.

    Args:
        name: One of INTRINSICS
        p: Argument polynomial
        exponent: Real exponent for ``pow``

    Returns:
        TruncatedPolynomial in the context of ``p``

    Raises:
        DomainError: constant part outside the domain of f
    """
    ctx = p.context
    p0 = float(p.coeffs[0])
    series = _series(name, p0, ctx.max_order, exponent)
    h = p.without_constant()
    result = TruncatedPolynomial.constant(ctx, series[-1])
    for coefficient in reversed(series[:-1]):
        result = result * h + coefficient
    return result


def _scalar_domain(name: str, values: np.ndarray, positive: bool):
    bad = values <= 0.0 if positive else values == 0.0
    if np.any(bad) or not np.all(np.isfinite(values)):
        offender = values[bad][0] if np.any(bad) else values[~np.isfinite(values)][0]
        raise DomainError(name, float(offender))


def _dispatch(name: str, x, scalar_fn: Callable, positive: Optional[bool] = None, exponent: Optional[float] = None):
    if isinstance(x, TruncatedPolynomial):
        return intrinsic(name, x, exponent)
    values = np.asarray(x, dtype=float)
    if positive is not None:
        _scalar_domain(name, values, positive)
    result = scalar_fn(values)
    return float(result) if np.ndim(result) == 0 else result


def reciprocal(x):
    return _dispatch('reciprocal', x, lambda v: 1.0 / v, positive=False)


def sqrt(x):
    return _dispatch('sqrt', x, np.sqrt, positive=True)


def inv_sqrt(x):
    return _dispatch('inv_sqrt', x, lambda v: 1.0 / np.sqrt(v), positive=True)


def exp(x):
    return _dispatch('exp', x, np.exp)


def log(x):
    return _dispatch('ln', x, np.log, positive=True)


def sin(x):
    return _dispatch('sin', x, np.sin)


def cos(x):
    return _dispatch('cos', x, np.cos)


def power(x, exponent: float):
    if isinstance(x, TruncatedPolynomial):
        return intrinsic('pow', x, exponent=exponent)
    values = np.asarray(x, dtype=float)
    if not float(exponent).is_integer():
        _scalar_domain('pow', values, positive=True)
    elif exponent < 0:
        _scalar_domain('pow', values, positive=False)
    result = values ** exponent
    return float(result) if np.ndim(result) == 0 else result


def constant_part(x) -> np.ndarray:
    """Constant part of a polynomial, or the value itself for reals."""
    if isinstance(x, TruncatedPolynomial):
        return np.asarray(x.constant_part)
    return np.asarray(x, dtype=float)


FUNCTIONS: Dict[str, Callable] = {
    'reciprocal': reciprocal,
    'sqrt': sqrt,
    'inv_sqrt': inv_sqrt,
    'exp': exp,
    'ln': log,
    'sin': sin,
    'cos': cos,
}
