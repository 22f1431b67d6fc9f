"""
Integrators shared by the scalar and polynomial algebras.

Real-valued states go through scipy's adaptive Runge-Kutta solvers
(Dormand-Prince 8(5,3) by default, ``method='RK45'`` gives the 5(4) pair).
Polynomial states are advanced with fixed-step classical RK4 on their
coefficient matrices. Both paths call the same right-hand side.
"""

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, TextIO, Union

import numpy as np
from scipy.integrate import solve_ivp

from common.exceptions import IntegrationError, UsageError
from poly_algebra.polynomial import TruncatedPolynomial, as_coefficients, is_polynomial_state

logger = logging.getLogger(__name__)

RK4 = 'RK4'


@dataclass(frozen=True)
class IntegratorSettings:
    """
    Tolerances and step rules for one propagation.

    ``poly_step`` (time units) or ``poly_steps_per_unit`` fix the RK4 grid
    for polynomial states; ``method='RK4'`` applies the same grid to scalar
    states.
    """

    rtol: float = 1e-12
    atol: float = 1e-12
    method: str = 'DOP853'
    max_step: float = math.inf
    poly_step: Optional[float] = None
    poly_steps_per_unit: Optional[float] = 2000.0

    def __post_init__(self):
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise UsageError("integrator tolerances must be positive")
        if self.poly_step is None and self.poly_steps_per_unit is None:
            raise UsageError("set poly_step or poly_steps_per_unit")
        if self.poly_step is not None and self.poly_step <= 0.0:
            raise UsageError("poly_step must be positive")
        if self.poly_steps_per_unit is not None and self.poly_steps_per_unit <= 0.0:
            raise UsageError("poly_steps_per_unit must be positive")

    def step_count(self, duration: float) -> int:
        duration = abs(duration)
        if self.poly_step is not None:
            return max(1, math.ceil(duration / self.poly_step - 1e-9))
        return max(1, math.ceil(duration * self.poly_steps_per_unit - 1e-9))

    def with_overrides(self, **changes) -> 'IntegratorSettings':
        return replace(self, **changes)


CR3BP_SETTINGS = IntegratorSettings(poly_steps_per_unit=2000.0)
AEROCAPTURE_SETTINGS = IntegratorSettings(poly_step=0.05, poly_steps_per_unit=None)


def default_settings(system) -> IntegratorSettings:
    if getattr(system, 'kind', None) == 'aerocapture':
        return AEROCAPTURE_SETTINGS
    return CR3BP_SETTINGS


@dataclass
class Trajectory:
    """
    Propagated states at increasing (or, backward, decreasing) times.

    ``states`` holds rows of reals, or lists of polynomials for DA runs.
    ``solution`` is scipy's dense-output interpolant when requested.
    """

    times: np.ndarray
    states: Union[np.ndarray, List[List[TruncatedPolynomial]]]
    system: str = ''
    solution: Optional[Callable] = field(default=None, repr=False)
    events: Optional[list] = field(default=None, repr=False)
    event_states: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise UsageError(f"{len(self.times)} times but {len(self.states)} states")
        steps = np.diff(self.times)
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise UsageError("trajectory times must be strictly monotonic")

    @property
    def final_state(self):
        return self.states[-1]

    def __call__(self, t):
        if self.solution is None:
            raise UsageError("trajectory was integrated without dense output")
        return self.solution(t)

    def to_csv(self, stream: TextIO, labels: Sequence[str] = None):
        """Write ``t`` plus one column per state component."""
        if isinstance(self.states, list):
            raise UsageError("only real-valued trajectories export to CSV")
        states = np.asarray(self.states)
        labels = list(labels or [f"x{i}" for i in range(states.shape[1])])
        writer = csv.writer(stream)
        writer.writerow(['t'] + labels)
        for t, row in zip(self.times, states):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def _rk4(f: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray, t0: float, tf: float,
         n_steps: int, record: bool):
    h = (tf - t0) / n_steps
    y = np.array(y0, dtype=float)
    times = [t0]
    states = [y.copy()] if record else None
    for step in range(n_steps):
        t = t0 + step * h
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + (0.5 * h) * k1)
        k3 = f(t + 0.5 * h, y + (0.5 * h) * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state in fixed-step integration", last_good_time=t)
        if record:
            times.append(t0 + (step + 1) * h)
            states.append(y.copy())
    if not record:
        times = [t0, tf]
        states = [np.array(y0, dtype=float), y]
    times[-1] = tf
    return np.array(times), states


def _integrate_polynomial(rhs, x0, t0, tf, settings, record):
    context = next(c.context for c in x0 if isinstance(c, TruncatedPolynomial))
    y0 = np.stack([as_coefficients(context, c) for c in x0])

    def f(t, coeff_rows):
        state = [TruncatedPolynomial._wrap(context, row) for row in coeff_rows]
        return np.stack([as_coefficients(context, c) for c in rhs(state)])

    n_steps = settings.step_count(tf - t0)
    logger.debug("RK4 polynomial propagation: %d steps, %d monomials per component", n_steps, context.size)
    times, coeff_states = _rk4(f, y0, t0, tf, n_steps, record)
    states = [[TruncatedPolynomial(context, row) for row in rows] for rows in coeff_states]
    return Trajectory(times, states)


def _integrate_scalar(rhs, x0, t0, tf, settings, dense_output, events):
    y0 = np.asarray(x0, dtype=float)
    shape = y0.shape

    def f(t, y):
        return np.asarray(rhs(y.reshape(shape)), dtype=float).ravel()

    if settings.method == RK4:
        times, states = _rk4(f, y0.ravel(), t0, tf, settings.step_count(tf - t0), record=True)
        return Trajectory(times, np.array([s.reshape(shape) for s in states]))

    with np.errstate(over='ignore', invalid='ignore'):
        sol = solve_ivp(
            f, (t0, tf), y0.ravel(), method=settings.method, rtol=settings.rtol, atol=settings.atol,
            max_step=settings.max_step, dense_output=dense_output, events=events,
        )
    finite = np.all(np.isfinite(sol.y), axis=0)
    if not np.all(finite):
        last = int(np.argmin(finite)) - 1
        raise IntegrationError("non-finite state", last_good_time=float(sol.t[max(last, 0)]))
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}", last_good_time=float(sol.t[-1]))
    states = sol.y.T.reshape((len(sol.t),) + shape)
    return Trajectory(sol.t, states, solution=sol.sol, events=sol.t_events, event_states=sol.y_events)


def integrate(rhs: Callable, x0, t0: float, tf: float, settings: IntegratorSettings = None,
              dense_output: bool = False, events=None, record: bool = False) -> Trajectory:
    """
    Propagate ``x0`` from ``t0`` to ``tf``.

    Args:
        rhs: State -> derivative, generic over the algebra
        x0: Real vector, (n, m) array of m stacked states, or a list of
            TruncatedPolynomials
        t0: Initial time
        tf: Final time (may be earlier than t0)
        settings: IntegratorSettings (defaults to the CR3BP settings)
        dense_output: Keep scipy's interpolant (scalar path only)
        events: scipy event functions (scalar path only)
        record: Keep every RK4 node for polynomial states

    Returns:
        Trajectory

    Raises:
        IntegrationError: step-size collapse or non-finite states
    """
    if tf == t0:
        raise UsageError("integration interval is empty (tf == t0)")
    settings = settings or CR3BP_SETTINGS
    if is_polynomial_state(x0):
        if dense_output or events:
            raise UsageError("dense output and events are only available for real-valued states")
        return _integrate_polynomial(rhs, list(x0), t0, tf, settings, record)
    return _integrate_scalar(rhs, x0, t0, tf, settings, dense_output, events)


def propagate(rhs: Callable, x0, t0: float, tf: float, settings: IntegratorSettings = None):
    """Final state only; returns ``x0`` unchanged when tf == t0."""
    if tf == t0:
        return x0 if is_polynomial_state(x0) else np.array(x0, dtype=float)
    return integrate(rhs, x0, t0, tf, settings).final_state


def propagate_batch(rhs: Callable, initial_states: np.ndarray, t0: float, tf: float,
                    settings: IntegratorSettings = None) -> np.ndarray:
    """
    Propagate many initial states together as one vectorized ODE system.

    Args:
        initial_states: (m, n) array, one state per row

    Returns:
        (m, n) array of final states
    """
    initial_states = np.atleast_2d(np.asarray(initial_states, dtype=float))
    final = propagate(rhs, initial_states.T, t0, tf, settings)
    return np.asarray(final).T.copy()
