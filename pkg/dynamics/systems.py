"""
Dynamical models for uqflow project.

The right-hand sides are written against the generic elementary functions
of poly_algebra, so the same code runs on floats, numpy arrays (one column
per ensemble member) and TruncatedPolynomial states.
"""

import math
from dataclasses import dataclass
from typing import ClassVar, List, Sequence

import numpy as np
from scipy.optimize import brentq

from common.exceptions import DomainError, UsageError
from poly_algebra.intrinsics import exp, inv_sqrt, sqrt
from poly_algebra.polynomial import TruncatedPolynomial

# Physical constants
EARTH_MU = 398600.4418          # km^3/s^2
EARTH_RADIUS = 6378.137         # km
EARTH_MOON_MU = 0.0121505856    # nondimensional mass ratio

# Exponent beyond which the atmosphere density is clamped to zero
DENSITY_CLAMP_EXPONENT = 700.0


def cr3bp_rhs(state: Sequence, mu: float) -> List:
    """
    Rotating-frame CR3BP equations of motion.

    Args:
        state: (x, y, z, vx, vy, vz) over any supported algebra
        mu: Mass ratio

    Returns:
        list: Time derivative in the same algebra

    Raises:
        DomainError: position coincides with a primary
    """
    x, y, z, vx, vy, vz = state
    dx1 = x + mu
    dx2 = x - (1.0 - mu)
    yz_sq = y * y + z * z
    r1_inv = inv_sqrt(dx1 * dx1 + yz_sq)
    r2_inv = inv_sqrt(dx2 * dx2 + yz_sq)
    g1 = (1.0 - mu) * (r1_inv * r1_inv * r1_inv)
    g2 = mu * (r2_inv * r2_inv * r2_inv)
    g = g1 + g2
    ax = 2.0 * vy + x - g1 * dx1 - g2 * dx2
    ay = -2.0 * vx + y - g * y
    az = -(g * z)
    return [vx, vy, vz, ax, ay, az]


def jacobi_constant(state: Sequence, mu: float):
    """C_J = 2U − v² with 2U = x² + y² + 2(1−μ)/r₁ + 2μ/r₂."""
    x, y, z, vx, vy, vz = state
    dx1 = x + mu
    dx2 = x - (1.0 - mu)
    yz_sq = y * y + z * z
    r1_inv = inv_sqrt(dx1 * dx1 + yz_sq)
    r2_inv = inv_sqrt(dx2 * dx2 + yz_sq)
    two_u = x * x + y * y + 2.0 * (1.0 - mu) * r1_inv + 2.0 * mu * r2_inv
    return two_u - (vx * vx + vy * vy + vz * vz)


def collinear_libration_point(mu: float, point: int) -> float:
    """
    x coordinate of the collinear libration point L1, L2 or L3.

    Root of the x-axis acceleration, bracketed between the primaries (L1),
    beyond the secondary (L2) or beyond the primary (L3).
    """
    def axis_acceleration(x):
        return cr3bp_rhs([x, 0.0, 0.0, 0.0, 0.0, 0.0], mu)[3]

    eps = 1e-9
    if point == 1:
        return brentq(axis_acceleration, -mu + eps, 1.0 - mu - eps, xtol=1e-15, rtol=1e-15)
    if point == 2:
        return brentq(axis_acceleration, 1.0 - mu + eps, 2.0, xtol=1e-15, rtol=1e-15)
    if point == 3:
        return brentq(axis_acceleration, -2.0, -mu - eps, xtol=1e-15, rtol=1e-15)
    raise UsageError(f"collinear libration points are L1, L2, L3; got L{point}")


@dataclass(frozen=True)
class Cr3bpSystem:
    """Circular restricted three-body problem in the rotating frame."""

    mu: float = EARTH_MOON_MU

    kind: ClassVar[str] = 'cr3bp'
    state_dim: ClassVar[int] = 6
    labels: ClassVar[tuple] = ('x', 'y', 'z', 'vx', 'vy', 'vz')

    def __post_init__(self):
        if not 0.0 < self.mu < 0.5:
            raise UsageError(f"CR3BP mass ratio must lie in (0, 0.5), got {self.mu}")

    def rhs(self, state):
        return cr3bp_rhs(state, self.mu)

    def jacobi_constant(self, state):
        return jacobi_constant(state, self.mu)

    @property
    def secondary_position(self) -> np.ndarray:
        return np.array([1.0 - self.mu, 0.0, 0.0])


@dataclass(frozen=True)
class AerocaptureSystem:
    """Planar point-mass entry with an exponential, non-rotating atmosphere."""

    mu_body: float = EARTH_MU
    body_radius: float = EARTH_RADIUS
    rho_E: float = 5.0e-7          # kg/m^3 at the interface
    h_E: float = 100.0             # km
    H: float = 7.2                 # km
    beta: float = 500.0            # kg/m^2

    kind: ClassVar[str] = 'aerocapture'
    state_dim: ClassVar[int] = 4
    labels: ClassVar[tuple] = ('x', 'y', 'vx', 'vy')

    def __post_init__(self):
        for name in ('mu_body', 'body_radius', 'rho_E', 'h_E', 'H', 'beta'):
            if not getattr(self, name) > 0.0:
                raise UsageError(f"aerocapture parameter {name} must be positive, got {getattr(self, name)}")

    def density(self, altitude):
        """ρ(h) = ρ_E exp(−(h − h_E)/H) in kg/m³, zero where the exponent underflows."""
        scaled = (altitude - self.h_E) * (1.0 / self.H)
        if isinstance(scaled, TruncatedPolynomial):
            if scaled.constant_part > DENSITY_CLAMP_EXPONENT:
                return 0.0
            return self.rho_E * exp(-scaled)
        scaled = np.asarray(scaled, dtype=float)
        clamped = np.minimum(scaled, DENSITY_CLAMP_EXPONENT)
        rho = np.where(scaled > DENSITY_CLAMP_EXPONENT, 0.0, self.rho_E * np.exp(-clamped))
        return float(rho) if rho.ndim == 0 else rho

    def rhs(self, state):
        return aerocapture_rhs(state, self)

    @property
    def interface_radius(self) -> float:
        return self.body_radius + self.h_E


def aerocapture_rhs(state: Sequence, system: AerocaptureSystem) -> List:
    """
    Planar two-body gravity plus drag −(ρ v / 2β) v⃗.

    Positions are km and velocities km/s; the factor 1000 converts the
    kg/m³ · km/s / (kg/m²) drag term to km/s².
    """
    x, y, vx, vy = state
    r_sq = x * x + y * y
    r_inv = inv_sqrt(r_sq)
    radius = r_sq * r_inv
    gravity = system.mu_body * (r_inv * r_inv * r_inv)
    rho = system.density(radius - system.body_radius)
    speed = sqrt(vx * vx + vy * vy)
    drag = rho * (1000.0 / (2.0 * system.beta)) * speed
    ax = -(gravity * x) - drag * vx
    ay = -(gravity * y) - drag * vy
    return [vx, vy, ax, ay]


def two_body_elements(state: Sequence[float], mu: float) -> dict:
    """
    Energy, angular momentum, eccentricity and apsides of a planar state.

    Args:
        state: (x, y, vx, vy) in km and km/s
        mu: Gravitational parameter (km^3/s^2)

    Returns:
        dict with energy, angular_momentum, eccentricity, semi_major_axis,
        periapsis_radius, apoapsis_radius (inf for unbound orbits)
    """
    x, y, vx, vy = (float(c) for c in state)
    r = math.hypot(x, y)
    if r <= 0.0:
        raise DomainError('two_body_elements', r, "position at the attracting center")
    v_sq = vx * vx + vy * vy
    energy = 0.5 * v_sq - mu / r
    h = x * vy - y * vx
    ecc = math.sqrt(max(0.0, 1.0 + 2.0 * energy * h * h / (mu * mu)))
    if energy < 0.0:
        a = -mu / (2.0 * energy)
        apoapsis = a * (1.0 + ecc)
    else:
        a = math.inf if energy == 0.0 else -mu / (2.0 * energy)
        apoapsis = math.inf
    periapsis = h * h / (mu * (1.0 + ecc))
    return {
        'energy': energy,
        'angular_momentum': h,
        'eccentricity': ecc,
        'semi_major_axis': a,
        'periapsis_radius': periapsis,
        'apoapsis_radius': apoapsis,
    }


def system_from_config(config: dict):
    """Build a system from a validated ``system`` scenario block."""
    params = {key: value for key, value in config.items() if key != 'kind'}
    if config['kind'] == Cr3bpSystem.kind:
        return Cr3bpSystem(**params)
    if config['kind'] == AerocaptureSystem.kind:
        return AerocaptureSystem(**params)
    raise UsageError(f"unknown system kind '{config['kind']}'")
