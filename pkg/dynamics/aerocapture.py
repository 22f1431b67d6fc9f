"""
Aerocapture nominal trajectories and dispersion cases.

The entry state sits on the atmospheric interface with the hyperbolic
approach energy and the requested flight-path angle; the UQ start state is
found by running the drag-free Kepler arc backwards for ``t_pre`` seconds.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.optimize import brentq

from common.exceptions import ConstructionError
from poly_algebra.intrinsics import inv_sqrt
from .integrators import AEROCAPTURE_SETTINGS, IntegratorSettings, integrate, propagate
from .systems import AerocaptureSystem, two_body_elements

logger = logging.getLogger(__name__)

V_INF = 2.5            # km/s
NOMINAL_EFPA = -4.85   # deg
EXIT_TOLERANCE = 1e-6  # s
MAX_PASS_DURATION = 3000.0  # s


@dataclass(frozen=True)
class DispersionCase:
    """One aerocapture dispersion setup; sigmas in metres and metres per second."""

    number: int
    t_pre: float
    horizon: float
    sigma_radial_m: float
    sigma_transverse_m: float
    sigma_radial_rate_mps: float
    sigma_transverse_rate_mps: float
    efpa: float = NOMINAL_EFPA

    @property
    def sigmas_km(self) -> np.ndarray:
        """Standard deviations of (R, T, V_R, V_T) in km and km/s."""
        return np.array([
            self.sigma_radial_m, self.sigma_transverse_m,
            self.sigma_radial_rate_mps, self.sigma_transverse_rate_mps,
        ]) * 1e-3


DISPERSION_CASES: Dict[int, DispersionCase] = {
    1: DispersionCase(1, 208.0, 649.0, 30.0, 800.0, 0.030, 0.6),
    2: DispersionCase(2, 418.0, 1868.0, 30.0, 800.0, 0.030, 0.6),
    3: DispersionCase(3, 208.0, 730.0, 15.0, 400.0, 0.015, 0.3),
    4: DispersionCase(4, 208.0, 649.0, 15.0, 400.0, 0.015, 0.3),
    5: DispersionCase(5, 418.0, 1868.0, 15.0, 400.0, 0.015, 0.3),
    6: DispersionCase(6, 208.0, 649.0, 19.5, 520.0, 0.0195, 0.39),
    7: DispersionCase(7, 208.0, 657.0, 15.0, 400.0, 0.015, 0.3, efpa=-4.87),
}


@dataclass(frozen=True, eq=False)
class AerocaptureNominal:
    entry_state: np.ndarray
    initial_state: np.ndarray
    t_pre: float
    v_inf: float
    efpa: float
    entry_speed: float
    inbound_eccentricity: float


@dataclass(frozen=True, eq=False)
class AtmosphericPass:
    flight_time: float
    exit_state: np.ndarray
    exit_eccentricity: float
    apoapsis_altitude: float


def two_body_rhs(state: Sequence, mu: float):
    x, y, vx, vy = state
    r_inv = inv_sqrt(x * x + y * y)
    gravity = mu * (r_inv * r_inv * r_inv)
    return [vx, vy, -(gravity * x), -(gravity * y)]


def build_aerocapture_nominal(v_inf: float, efpa: float, system: AerocaptureSystem, t_pre: float = 0.0,
                              settings: IntegratorSettings = AEROCAPTURE_SETTINGS) -> AerocaptureNominal:
    """
    Entry state at altitude h_E and the pre-entry UQ start state.

    Args:
        v_inf: Hyperbolic excess speed (km/s)
        efpa: Entry flight-path angle (deg, non-positive)
        system: AerocaptureSystem
        t_pre: Seconds of drag-free back-propagation from the interface

    Raises:
        ConstructionError: geometry that cannot be an atmospheric entry
    """
    if not v_inf > 0.0:
        raise ConstructionError(f"hyperbolic excess speed must be positive, got {v_inf}")
    if efpa > 0.0 or efpa <= -90.0:
        raise ConstructionError(f"entry flight-path angle must lie in (-90, 0] deg, got {efpa}")
    if t_pre < 0.0:
        raise ConstructionError(f"pre-entry duration must be non-negative, got {t_pre}")
    radius = system.interface_radius
    speed = math.sqrt(v_inf ** 2 + 2.0 * system.mu_body / radius)
    angle = math.radians(efpa)
    entry = np.array([radius, 0.0, speed * math.sin(angle), speed * math.cos(angle)])
    initial = entry
    if t_pre > 0.0:
        initial = np.asarray(propagate(lambda s: two_body_rhs(s, system.mu_body), entry, 0.0, -t_pre, settings))
    elements = two_body_elements(entry, system.mu_body)
    logger.debug("aerocapture entry: speed %.6f km/s, e_in %.6f", speed, elements['eccentricity'])
    return AerocaptureNominal(entry, initial, t_pre, v_inf, efpa, speed, elements['eccentricity'])


def atmospheric_pass(system: AerocaptureSystem, entry_state: Sequence[float],
                     settings: IntegratorSettings = AEROCAPTURE_SETTINGS,
                     max_duration: float = MAX_PASS_DURATION) -> AtmosphericPass:
    """
    Fly from the interface until the altitude climbs back through h_E; the
    crossing is refined on the dense output to ``EXIT_TOLERANCE`` seconds.
    """
    trajectory = integrate(system.rhs, np.asarray(entry_state, dtype=float), 0.0, max_duration, settings,
                           dense_output=True)

    def altitude(t):
        state = trajectory(t)
        return float(np.hypot(state[0], state[1]) - system.body_radius)

    altitudes = np.hypot(trajectory.states[:, 0], trajectory.states[:, 1]) - system.body_radius
    below = np.flatnonzero(altitudes < system.h_E)
    if len(below) == 0:
        raise ConstructionError("trajectory never enters the atmosphere")
    after = np.flatnonzero((altitudes >= system.h_E) & (np.arange(len(altitudes)) > below[0]))
    if len(after) == 0:
        raise ConstructionError(f"vehicle does not leave the atmosphere within {max_duration} s")
    i = int(after[0])
    t_exit = brentq(lambda t: altitude(t) - system.h_E, trajectory.times[i - 1], trajectory.times[i],
                    xtol=EXIT_TOLERANCE)
    exit_state = np.asarray(trajectory(t_exit), dtype=float)
    elements = two_body_elements(exit_state, system.mu_body)
    return AtmosphericPass(
        flight_time=float(t_exit),
        exit_state=exit_state,
        exit_eccentricity=elements['eccentricity'],
        apoapsis_altitude=elements['apoapsis_radius'] - system.body_radius,
    )


def radial_transverse_basis(state: Sequence[float]) -> np.ndarray:
    """
    2×2 matrix with columns r̂ (position direction) and t̂ (in-plane normal
    to r̂, along the direction of motion).
    """
    x, y, vx, vy = (float(c) for c in state)
    radial = np.array([x, y]) / math.hypot(x, y)
    turn = 1.0 if x * vy - y * vx >= 0.0 else -1.0
    transverse = turn * np.array([-radial[1], radial[0]])
    return np.column_stack([radial, transverse])


def dispersion_covariance(state: Sequence[float], sigmas_km: Sequence[float]) -> np.ndarray:
    """
    Covariance that is diagonal in (R, T, V_R, V_T), rotated into the
    inertial frame of ``state``.
    """
    basis = radial_transverse_basis(state)
    rotation = np.zeros((4, 4))
    rotation[:2, :2] = basis
    rotation[2:, 2:] = basis
    return rotation @ np.diag(np.asarray(sigmas_km, dtype=float) ** 2) @ rotation.T
