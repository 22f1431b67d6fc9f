"""
Halo orbit construction in the CR3BP.

A third-order Richardson approximation seeds a perpendicular-crossing
differential corrector; the family is then continued in the out-of-plane
amplitude until the corrected period matches the requested one.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from common.exceptions import ConstructionError, CorrectorError, IntegrationError, UsageError
from poly_algebra.context import poly_context
from poly_algebra.polynomial import variables
from .integrators import IntegratorSettings, integrate, propagate
from .stm import stm_propagate
from .systems import EARTH_MOON_MU, Cr3bpSystem, collinear_libration_point, jacobi_constant

logger = logging.getLogger(__name__)

HALO_PERIOD = 3.136654204
HALO_JACOBI = 3.0612627924
# Negative offsets start the study before apolune
APOLUNE_OFFSET = -0.25
JACOBI_TOLERANCE = 1e-6

# Coarse RK4 grid for corrector sensitivities; the residuals themselves come
# from the tight scalar integrator.
CORRECTOR_SETTINGS = IntegratorSettings(poly_steps_per_unit=400.0)

FAMILY_SIGN = {'northern': 1.0, 'southern': -1.0}


@dataclass(frozen=True, eq=False)
class HaloOrbit:
    """Symmetric periodic orbit crossing the x-z plane perpendicularly at t=0."""

    initial_state: np.ndarray
    period: float
    jacobi_constant: float
    mu: float = EARTH_MOON_MU
    residual: float = 0.0
    iterations: int = 0

    @property
    def system(self) -> Cr3bpSystem:
        return Cr3bpSystem(self.mu)

    def trajectory(self, settings: IntegratorSettings = None):
        return integrate(self.system.rhs, self.initial_state, 0.0, self.period, settings, dense_output=True)


def _richardson_coefficients(mu: float, gamma: float) -> dict:
    def c(n):
        return ((-1) ** n * mu + (-1) ** n * (1.0 - mu) * gamma ** (n + 1) / (1.0 + gamma) ** (n + 1)) / gamma ** 3

    c2, c3, c4 = c(2), c(3), c(4)
    lam = math.sqrt(0.5 * ((2.0 - c2) + math.sqrt((c2 - 2.0) ** 2 + 4.0 * (c2 - 1.0) * (1.0 + 2.0 * c2))))
    k = (lam ** 2 + 1.0 + 2.0 * c2) / (2.0 * lam)
    d1 = 3.0 * lam ** 2 / k * (k * (6.0 * lam ** 2 - 1.0) - 2.0 * lam)
    d2 = 8.0 * lam ** 2 / k * (k * (11.0 * lam ** 2 - 1.0) - 2.0 * lam)

    a21 = 3.0 * c3 * (k ** 2 - 2.0) / (4.0 * (1.0 + 2.0 * c2))
    a22 = 3.0 * c3 / (4.0 * (1.0 + 2.0 * c2))
    a23 = -3.0 * c3 * lam / (4.0 * k * d1) * (3.0 * k ** 3 * lam - 6.0 * k * (k - lam) + 4.0)
    a24 = -3.0 * c3 * lam / (4.0 * k * d1) * (2.0 + 3.0 * k * lam)
    b21 = -3.0 * c3 * lam / (2.0 * d1) * (3.0 * k * lam - 4.0)
    b22 = 3.0 * c3 * lam / d1
    d21 = -c3 / (2.0 * lam ** 2)

    a31 = (-9.0 * lam / (4.0 * d2) * (4.0 * c3 * (k * a23 - b21) + k * c4 * (4.0 + k ** 2))
           + (9.0 * lam ** 2 + 1.0 - c2) / (2.0 * d2) * (3.0 * c3 * (2.0 * a23 - k * b21) + c4 * (2.0 + 3.0 * k ** 2)))
    a32 = -1.0 / d2 * (9.0 * lam / 4.0 * (4.0 * c3 * (k * a24 - b22) + k * c4)
                       + 1.5 * (9.0 * lam ** 2 + 1.0 - c2) * (c3 * (k * b22 + d21 - 2.0 * a24) - c4))
    b31 = 3.0 / (8.0 * d2) * (8.0 * lam * (3.0 * c3 * (k * b21 - 2.0 * a23) - c4 * (2.0 + 3.0 * k ** 2))
                              + (9.0 * lam ** 2 + 1.0 + 2.0 * c2) * (4.0 * c3 * (k * a23 - b21) + k * c4 * (4.0 + k ** 2)))
    b32 = 1.0 / d2 * (9.0 * lam * (c3 * (k * b22 + d21 - 2.0 * a24) - c4)
                      + 3.0 / 8.0 * (9.0 * lam ** 2 + 1.0 + 2.0 * c2) * (4.0 * c3 * (k * a24 - b22) + k * c4))
    d31 = 3.0 / (64.0 * lam ** 2) * (4.0 * c3 * a24 + c4)
    d32 = 3.0 / (64.0 * lam ** 2) * (4.0 * c3 * (a23 - d21) + c4 * (4.0 + k ** 2))

    denominator = 2.0 * lam * (lam * (1.0 + k ** 2) - 2.0 * k)
    s1 = (1.5 * c3 * (2.0 * a21 * (k ** 2 - 2.0) - a23 * (k ** 2 + 2.0) - 2.0 * k * b21)
          - 3.0 / 8.0 * c4 * (3.0 * k ** 4 - 8.0 * k ** 2 + 8.0)) / denominator
    s2 = (1.5 * c3 * (2.0 * a22 * (k ** 2 - 2.0) + a24 * (k ** 2 + 2.0) + 2.0 * k * b22 + 5.0 * d21)
          + 3.0 / 8.0 * c4 * (12.0 - k ** 2)) / denominator
    a1 = -1.5 * c3 * (2.0 * a21 + a23 + 5.0 * d21) - 3.0 / 8.0 * c4 * (12.0 - k ** 2)
    a2 = 1.5 * c3 * (a24 - 2.0 * a22) + 9.0 / 8.0 * c4

    return {
        'c2': c2, 'lam': lam, 'k': k,
        'a21': a21, 'a22': a22, 'a23': a23, 'a24': a24, 'a31': a31, 'a32': a32,
        'b21': b21, 'b22': b22, 'b31': b31, 'b32': b32,
        'd21': d21, 'd31': d31, 'd32': d32,
        's1': s1, 's2': s2, 'l1': a1 + 2.0 * lam ** 2 * s1, 'l2': a2 + 2.0 * lam ** 2 * s2,
    }


def richardson_seed(mu: float, z_amplitude: float, family: str = 'southern') -> Tuple[np.ndarray, float]:
    """
    Third-order analytic approximation of an L2 halo at its x-z plane
    crossing of maximum |z|.

    Args:
        mu: Mass ratio
        z_amplitude: Out-of-plane amplitude Az (nondimensional)
        family: 'southern' (z < 0 at the crossing) or 'northern'

    Returns:
        (state, period) in CR3BP nondimensional units
    """
    if family not in FAMILY_SIGN:
        raise UsageError(f"unknown halo family '{family}'")
    x_l2 = collinear_libration_point(mu, 2)
    gamma = x_l2 - (1.0 - mu)
    co = _richardson_coefficients(mu, gamma)
    az = z_amplitude / gamma
    ax_sq = (co['lam'] ** 2 - co['c2'] + co['l2'] * az ** 2) / (-co['l1'])
    if ax_sq <= 0.0:
        raise UsageError(f"no halo with Az={z_amplitude} in the third-order approximation")
    ax = math.sqrt(ax_sq)
    omega = 1.0 + co['s1'] * ax ** 2 + co['s2'] * az ** 2
    sign = FAMILY_SIGN[family]

    x = (co['a21'] * ax ** 2 + co['a22'] * az ** 2 - ax + co['a23'] * ax ** 2 - co['a24'] * az ** 2
         + co['a31'] * ax ** 3 - co['a32'] * ax * az ** 2)
    z = sign * (az - 2.0 * co['d21'] * ax * az + co['d32'] * az * ax ** 2 - co['d31'] * az ** 3)
    vy = co['lam'] * omega * (co['k'] * ax + 2.0 * (co['b21'] * ax ** 2 - co['b22'] * az ** 2)
                               + 3.0 * (co['b31'] * ax ** 3 - co['b32'] * ax * az ** 2))
    state = np.array([gamma * x + x_l2, 0.0, gamma * z, 0.0, gamma * vy, 0.0])
    return state, 2.0 * math.pi / (co['lam'] * omega)


def _half_period_crossing(system: Cr3bpSystem, state: np.ndarray, period_guess: float):
    def crossing(t, y):
        return y[1]

    crossing.terminal = True
    crossing.direction = -1.0 if state[4] >= 0.0 else 1.0
    trajectory = integrate(system.rhs, state, 0.0, 1.5 * period_guess, events=[crossing])
    times = trajectory.events[0]
    if len(times) == 0 or times[0] < 0.1 * period_guess:
        raise IntegrationError("no half-period x-z plane crossing found", last_good_time=float(trajectory.times[-1]))
    return float(times[0]), np.asarray(trajectory.event_states[0][0], dtype=float)


def _jacobi_gradient(state: np.ndarray, mu: float) -> np.ndarray:
    return jacobi_constant(variables(poly_context(6, 1), state), mu).linear_part()


def halo_correct(guess, period_guess: float, mu: float = EARTH_MOON_MU, jacobi_target: Optional[float] = None,
                 tol: float = 1e-12, max_iter: int = 30,
                 sensitivity_settings: IntegratorSettings = CORRECTOR_SETTINGS) -> HaloOrbit:
    """
    Differential correction on the half-period perpendicular-crossing
    conditions vx = vz = 0 at y = 0.

    With ``jacobi_target`` the corrector varies (x0, z0, vy0) and also
    enforces the Jacobi constant; otherwise z0 is held fixed and (x0, vy0)
    vary.

    Raises:
        CorrectorError: no convergence within ``max_iter`` iterations
    """
    system = Cr3bpSystem(mu)
    state = np.array(guess, dtype=float)
    state[[1, 3, 5]] = 0.0
    free = [0, 2, 4] if jacobi_target is not None else [0, 4]
    residual_norm = math.inf
    for iteration in range(max_iter + 1):
        t_half, crossing_state = _half_period_crossing(system, state, period_guess)
        residual = [crossing_state[3], crossing_state[5]]
        if jacobi_target is not None:
            residual.append(jacobi_constant(state, mu) - jacobi_target)
        residual = np.array(residual)
        previous_norm, residual_norm = residual_norm, float(np.max(np.abs(residual)))
        logger.debug("halo corrector iteration %d: residual %.3e, half period %.12f", iteration, residual_norm, t_half)
        stalled = residual_norm < 1e-10 and residual_norm > 0.5 * previous_norm
        if residual_norm < tol or stalled:
            period = 2.0 * t_half
            return HaloOrbit(state, period, float(jacobi_constant(state, mu)), mu, residual_norm, iteration)
        if iteration == max_iter or not np.isfinite(residual_norm) or residual_norm > 1.0:
            break
        phi = stm_propagate(system, state, 0.0, t_half, sensitivity_settings)
        derivative = np.asarray(system.rhs(crossing_state), dtype=float)
        rows = []
        for k in (3, 5):
            rows.append(phi[k, free] - derivative[k] / derivative[1] * phi[1, free])
        if jacobi_target is not None:
            rows.append(_jacobi_gradient(state, mu)[free])
        correction = np.linalg.solve(np.array(rows), -residual)
        state[free] += correction
        period_guess = 2.0 * t_half
    raise CorrectorError("halo corrector did not converge", residual_norm, iteration)


def _correct_at_z(z0: float, guess: np.ndarray, period_guess: float, mu: float) -> HaloOrbit:
    seed = np.array(guess, dtype=float)
    seed[2] = z0
    return halo_correct(seed, period_guess, mu)


def check_jacobi(orbit: HaloOrbit, target: float, tolerance: float = JACOBI_TOLERANCE) -> None:
    """Raise ConstructionError when the orbit's Jacobi constant misses ``target``."""
    miss = abs(orbit.jacobi_constant - target)
    if miss > tolerance:
        raise ConstructionError(
            f"halo Jacobi constant {orbit.jacobi_constant:.10f} misses target {target:.10f} by {miss:.3g}")


def reconstruct_halo(period: float = HALO_PERIOD, jacobi_target: float = HALO_JACOBI, mu: float = EARTH_MOON_MU,
                     family: str = 'southern', seed_amplitude: float = 0.02, z_step: float = 0.01,
                     period_tol: float = 1e-11, max_steps: int = 200) -> HaloOrbit:
    """
    Build the L2 halo with the requested period.

    Seeds from the Richardson approximation at a small amplitude, continues
    in z0 until the corrected period brackets ``period``, then runs a secant
    search on z0. The result is rejected with ConstructionError when its
    Jacobi constant misses ``jacobi_target`` by more than 1e-6.
    """
    sign = FAMILY_SIGN[family]
    seed, seed_period = richardson_seed(mu, seed_amplitude, family)
    orbit = halo_correct(seed, seed_period, mu)
    logger.info("halo seed corrected: z0=%.6f period=%.9f", orbit.initial_state[2], orbit.period)

    history = [orbit]
    step = z_step
    steps = 0
    while (orbit.period - period) > 0.0:
        if steps >= max_steps:
            raise CorrectorError("halo continuation did not reach the requested period", orbit.period - period, steps)
        steps += 1
        guess = orbit.initial_state.copy()
        z_next = guess[2] + sign * step
        if len(history) >= 2:
            previous, last = history[-2].initial_state, history[-1].initial_state
            slope = (last - previous) / (last[2] - previous[2])
            guess = last + slope * (z_next - last[2])
        try:
            candidate = _correct_at_z(z_next, guess, orbit.period, mu)
        except (CorrectorError, IntegrationError) as exc:
            step *= 0.5
            logger.debug("continuation step failed (%s); step reduced to %.3g", exc, step)
            if step < 1e-6:
                raise
            continue
        history.append(candidate)
        orbit = candidate
        step = min(1.5 * step, z_step)
        logger.debug("continuation: z0=%.6f period=%.9f", orbit.initial_state[2], orbit.period)

    if len(history) < 2:
        raise CorrectorError("requested period is above the seed orbit period", orbit.period - period, 0)
    previous, best = history[-2], history[-1]
    for _ in range(30):
        if abs(best.period - period) < period_tol:
            break
        fraction = (period - best.period) / (previous.period - best.period)
        z_next = best.initial_state[2] + fraction * (previous.initial_state[2] - best.initial_state[2])
        guess = best.initial_state + fraction * (previous.initial_state - best.initial_state)
        previous, best = best, _correct_at_z(z_next, guess, best.period, mu)
    if abs(best.period - period) > 1e-6:
        raise CorrectorError("period targeting failed", abs(best.period - period), 30)

    check_jacobi(best, jacobi_target)
    logger.info("halo reconstructed: period=%.10f C_J=%.10f", best.period, best.jacobi_constant)
    return best


def apolune_start(orbit: HaloOrbit, offset: float = APOLUNE_OFFSET) -> Tuple[np.ndarray, float]:
    """
    UQ start state ``offset`` TU from the point of maximum distance from
    the secondary; a negative offset lies before it.

    Returns:
        (state, apolune_time)
    """
    system = orbit.system
    trajectory = orbit.trajectory()
    moon = system.secondary_position

    def distance(t):
        return float(np.linalg.norm(trajectory(t)[:3] - moon))

    grid = np.linspace(0.0, orbit.period, 4001)
    positions = trajectory(grid)[:3].T
    i = int(np.argmax(np.linalg.norm(positions - moon, axis=1)))
    lower, upper = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    result = minimize_scalar(lambda t: -distance(t), bounds=(lower, upper), method='bounded',
                             options={'xatol': 1e-12})
    t_apolune = float(result.x)
    state = propagate(system.rhs, orbit.initial_state, 0.0, t_apolune + offset)
    return np.asarray(state, dtype=float), t_apolune
