"""Dynamical models, integrators and nominal-trajectory construction."""

from .systems import (
    EARTH_MOON_MU,
    EARTH_MU,
    EARTH_RADIUS,
    AerocaptureSystem,
    Cr3bpSystem,
    aerocapture_rhs,
    collinear_libration_point,
    cr3bp_rhs,
    jacobi_constant,
    system_from_config,
    two_body_elements,
)
from .integrators import (
    AEROCAPTURE_SETTINGS,
    CR3BP_SETTINGS,
    IntegratorSettings,
    Trajectory,
    default_settings,
    integrate,
    propagate,
    propagate_batch,
)
from .stm import stm_propagate
from .halo import (
    HALO_JACOBI,
    HALO_PERIOD,
    HaloOrbit,
    apolune_start,
    check_jacobi,
    halo_correct,
    reconstruct_halo,
    richardson_seed,
)
from .aerocapture import (
    DISPERSION_CASES,
    AerocaptureNominal,
    AtmosphericPass,
    DispersionCase,
    atmospheric_pass,
    build_aerocapture_nominal,
    dispersion_covariance,
    radial_transverse_basis,
)
