"""
Study runners for uqflow project.

This module runs a validated scenario end to end. The CR3BP study builds
the halo, the UQ start state, the stretching direction and the inflated
initial belief, then runs every configured method on direct, full-map or
directional-map propagation. The aerocapture study builds the entry
nominal and its dispersion belief, runs the configured methods and
measures Monte Carlo coverage of LinCov, CUT4 and banana contours.

Every stage runs inside ``stage(...)``, so a failure surfaces as a
``StageError`` naming the stage.
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Dict, Optional

import numpy as np

from common.exceptions import StageError, UqflowError, UsageError
from common.utils import Stopwatch, format_time_duration
from contour.curves import (
    DEFAULT_POINTS,
    banana_contour,
    coverage_report,
    express_in_frame,
    gaussian_ellipse,
    principal_frame,
)
from contour.geometry import SliceSpec, projected_moments, projected_moments_from_tensors, whiten
from dynamics.aerocapture import atmospheric_pass, build_aerocapture_nominal, dispersion_covariance
from dynamics.halo import apolune_start, reconstruct_halo
from dynamics.integrators import IntegratorSettings
from dynamics.stm import stm_propagate
from flowmaps.maps import DirectionFrame, build_da_map, build_dda_map, stretching_direction
from uq_methods.beliefs import KIND_SIGMA, GaussianBelief
from uq_methods.gmm import gmm_propagate, gmm_split
from uq_methods.pce import pce_fit, pce_moments
from uq_methods.propagators import DirectPropagator, MappedPropagator
from uq_methods.sampling import mc_run
from uq_methods.sigma_points import cut4_run, lincov_run, ut_run
from .config import MethodSpec, ScenarioConfig
from .reporting import MethodResult, StudyReport

logger = logging.getLogger(__name__)

MAP_LABELS = {'full': 'DA map', 'directional': 'DDA map'}


@contextmanager
def stage(name: str):
    """Log the stage boundary and wrap any toolkit error with the stage name."""
    logger.info("stage %s: start", name)
    with Stopwatch() as watch:
        try:
            yield
        except StageError:
            raise
        except (UqflowError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.error("stage %s failed: %s", name, exc)
            raise StageError(name, exc) from exc
    logger.info("stage %s: done in %s", name, format_time_duration(watch.elapsed))


def run_method(spec: MethodSpec, propagator, belief: GaussianBelief, config: ScenarioConfig) -> MethodResult:
    """
    Run one UQ method on ``propagator`` and time it.

    The wall time covers the method's propagations and its moment
    computation; map construction is timed separately by the caller.
    """
    ensemble = None
    moments = None
    details = {}
    with Stopwatch() as watch:
        if spec.method == 'mc':
            ensemble = mc_run(propagator, belief, config.mc['samples'], config.seed, 'mc')
            mean, covariance = ensemble.mean(), ensemble.covariance()
            details['samples'] = len(ensemble)
        elif spec.method == 'lincov':
            result = lincov_run(propagator, belief)
            mean, covariance = result.mean, result.covariance
        elif spec.method == 'ut':
            ensemble = ut_run(propagator, belief, config.ut['lambda_param'])
            result = ensemble.belief()
            mean, covariance = result.mean, result.covariance
        elif spec.method == 'cut4':
            ensemble = cut4_run(propagator, belief)
            result = ensemble.belief()
            mean, covariance = result.mean, result.covariance
        elif spec.method == 'pce':
            surrogate = pce_fit(propagator, belief, config.pce['degree'], config.pce['oversample'],
                                config.seed, 'pce')
            moments = pce_moments(surrogate, config.pce['moment_order'], seed=config.seed)
            mean, covariance = moments.mean, moments.covariance
            details['terms'] = len(surrogate.indices)
        elif spec.method == 'gmm':
            mixture = gmm_split(belief, config.gmm['depth'], config.gmm['delta'])
            _, moments = gmm_propagate(mixture, propagator, config.gmm['component_method'],
                                       config.ut['lambda_param'])
            mean, covariance = moments.mean, moments.covariance
            details['components'] = len(mixture)
        else:
            raise UsageError(f"unknown method '{spec.method}'")
    logger.info("%s on %s: %s", spec.label, propagator.label, format_time_duration(watch.elapsed))
    return MethodResult(spec.label, spec.method, spec.propagation, np.asarray(mean, dtype=float),
                        np.asarray(covariance, dtype=float), watch.elapsed, ensemble, details, moments)


def build_propagators(config: ScenarioConfig, system, reference_state: np.ndarray, tf: float, settings,
                      report: StudyReport, direction: Optional[np.ndarray] = None) -> Dict[str, object]:
    """
    Propagators for every propagation mode the scenario uses. Map
    construction is timed into the report's construction section.
    """
    propagators = {
        'direct': DirectPropagator(system, reference_state, 0.0, tf, settings, config.batch_size),
    }
    order = config.maps['order']
    if config.needs_map('full'):
        with Stopwatch() as watch:
            flow_map = build_da_map(system, reference_state, 0.0, tf, order, settings)
        report.add_construction(f"{MAP_LABELS['full']} (order {order})", watch.elapsed)
        propagators['full'] = MappedPropagator(flow_map)
    if config.needs_map('directional'):
        if direction is None:
            stm = stm_propagate(system, reference_state, 0.0, tf, settings)
            direction = stretching_direction(stm)
        with Stopwatch() as watch:
            flow_map = build_dda_map(system, reference_state, 0.0, tf, order,
                                     DirectionFrame.from_direction(direction), settings)
        report.add_construction(f"{MAP_LABELS['directional']} (order {order})", watch.elapsed)
        propagators['directional'] = MappedPropagator(flow_map)
    return propagators


def run_methods(config: ScenarioConfig, propagators: Dict[str, object], belief: GaussianBelief,
                report: StudyReport):
    for spec in config.method_specs:
        with stage(f"method {spec.label}"):
            report.add_method(run_method(spec, propagators[spec.propagation], belief, config))
    missing = set(config.labels) - set(report.labels)
    if missing:
        raise UsageError(f"methods missing from the report: {sorted(missing)}")


def _first(report: StudyReport, method: str) -> Optional[MethodResult]:
    """First result of ``method``, direct propagation preferred."""
    candidates = [result for result in report.methods if result.method == method]
    candidates.sort(key=lambda result: result.propagation != 'direct')
    return candidates[0] if candidates else None


def contour_stage(config: ScenarioConfig, report: StudyReport):
    """
    Ellipses for every method and bananas for every CUT4 ensemble in the
    configured slice, expressed in the LinCov principal frame (or the
    first method's when no LinCov ran). Coverage is measured on the final
    states of the first Monte Carlo result when there is one.
    """
    indices, k, n_points = config.contour_slice()
    spec = SliceSpec(indices, k)
    if not report.methods:
        return
    anchor = _first(report, 'lincov') or report.methods[0]
    frame = principal_frame(spec.select(anchor.mean), anchor.covariance[np.ix_(indices, indices)])
    mc_result = _first(report, 'mc')
    samples = spec.select(mc_result.ensemble.states) if mc_result is not None else None
    if samples is None:
        logger.warning("no Monte Carlo result in the study; contours are built without coverage")

    curves = {}
    for result in report.methods:
        if result.method == 'mc':
            continue
        mu_q = spec.select(result.mean)
        sigma_q = result.covariance[np.ix_(indices, indices)]
        curves[f"{result.label} ellipse"] = gaussian_ellipse(mu_q, sigma_q, k, n_points)
        if result.method == 'cut4' and result.ensemble is not None and result.ensemble.kind == KIND_SIGMA:
            moments = projected_moments(result.ensemble.subset(indices), whiten(mu_q, sigma_q))
            curves[f"{result.label} banana"] = banana_contour(mu_q, sigma_q, moments, k, n_points)
            report.summary.update({f"{result.label} {key}": value for key, value in moments.as_dict().items()})
        elif result.method == 'pce' and result.moments is not None and result.moments.max_order == 4:
            moments = projected_moments_from_tensors(result.moments.marginal(indices), whiten(mu_q, sigma_q))
            curves[f"{result.label} banana"] = banana_contour(mu_q, sigma_q, moments, k, n_points)
            report.summary.update({f"{result.label} {key}": value for key, value in moments.as_dict().items()})

    for label, curve in curves.items():
        coverage = coverage_report(curve, samples) if samples is not None else None
        report.add_contour(label, express_in_frame(curve, frame), coverage)
        if coverage is not None:
            logger.info("coverage %s: %.4f", label, coverage['fraction'])


def inflated_covariance(direction: np.ndarray, base_variance: float, direction_variance: float) -> np.ndarray:
    """P₀ = σ_b² I + σ_γ² γ̂*γ̂*ᵀ."""
    direction = np.asarray(direction, dtype=float)
    return base_variance * np.eye(len(direction)) + direction_variance * np.outer(direction, direction)


@dataclass(eq=False)
class StudySetup:
    """Everything a study needs before the UQ methods run."""

    system: object
    settings: IntegratorSettings
    reference_state: np.ndarray
    belief: GaussianBelief
    direction: Optional[np.ndarray] = None


def prepare_cr3bp(config: ScenarioConfig, report: StudyReport) -> StudySetup:
    """Halo, apolune start, stretching direction and the initial belief."""
    if config.system_kind != 'cr3bp':
        raise UsageError(f"a cr3bp scenario is required, got '{config.system_kind}'")
    reference = config.reference
    with stage('system'):
        system = config.build_system()
        settings = config.integrator_settings(system)
    with stage('halo'):
        orbit = reconstruct_halo(reference['period'], reference['jacobi_constant'], system.mu,
                                 reference['family'], reference['seed_amplitude'])
        report.summary.update({
            'halo_period': orbit.period,
            'halo_jacobi_constant': orbit.jacobi_constant,
            'halo_z0': orbit.initial_state[2],
        })
    with stage('start'):
        start, t_apolune = apolune_start(orbit, reference['apolune_offset'])
        report.summary['apolune_time'] = t_apolune
    with stage('direction'):
        stm = stm_propagate(system, start, 0.0, config.horizon, settings)
        direction = stretching_direction(stm)
        report.summary['stretching_singular_value'] = float(np.linalg.norm(stm @ direction))
    with stage('belief'):
        if config.belief['kind'] == 'explicit':
            belief = config.explicit_belief()
        else:
            covariance = inflated_covariance(direction, config.belief['base_variance'],
                                             config.belief['direction_variance'])
            belief = GaussianBelief(np.array(config.belief['mean_deviation'], dtype=float), covariance)
    return StudySetup(system, settings, start, belief, direction)


def prepare_aerocapture(config: ScenarioConfig, report: StudyReport) -> StudySetup:
    """Entry nominal, atmospheric pass summary and the dispersion belief."""
    if config.system_kind != 'aerocapture':
        raise UsageError(f"an aerocapture scenario is required, got '{config.system_kind}'")
    reference = config.reference
    with stage('system'):
        system = config.build_system()
        settings = config.integrator_settings(system)
    with stage('nominal'):
        nominal = build_aerocapture_nominal(reference['v_inf'], reference['efpa'], system,
                                            reference['t_pre'], settings)
        atmospheric = atmospheric_pass(system, nominal.entry_state, settings)
        report.summary.update({
            'entry_speed': nominal.entry_speed,
            'inbound_eccentricity': nominal.inbound_eccentricity,
            'flight_time': atmospheric.flight_time,
            'exit_eccentricity': atmospheric.exit_eccentricity,
            'apoapsis_altitude': atmospheric.apoapsis_altitude,
        })
    with stage('belief'):
        if config.belief['kind'] == 'explicit':
            belief = config.explicit_belief()
        else:
            sigmas_km = np.array(config.belief['sigmas'], dtype=float) * 1e-3
            covariance = dispersion_covariance(nominal.initial_state, sigmas_km)
            belief = GaussianBelief(np.zeros(system.state_dim), 0.5 * (covariance + covariance.T))
    return StudySetup(system, settings, nominal.initial_state, belief)


def prepare_study(config: ScenarioConfig, report: StudyReport) -> StudySetup:
    if config.system_kind == 'cr3bp':
        return prepare_cr3bp(config, report)
    return prepare_aerocapture(config, report)


def new_report(config: ScenarioConfig) -> StudyReport:
    return StudyReport(config.name, config.system_kind, config.seed, config.threads, config.reference_method)


def run_cr3bp_study(config: ScenarioConfig) -> StudyReport:
    """
    Halo-orbit study in the Earth-Moon CR3BP.

    Args:
        config: Validated scenario with a ``cr3bp`` system and ``halo`` reference

    Returns:
        StudyReport with timing (direct, mapped, construction), error and
        moment tables; contour coverage when the scenario has a slice

    Raises:
        StageError: any stage failed
    """
    report = new_report(config)
    setup = prepare_cr3bp(config, report)
    with stage('maps'):
        propagators = build_propagators(config, setup.system, setup.reference_state, config.horizon,
                                        setup.settings, report, setup.direction)

    run_methods(config, propagators, setup.belief, report)

    if config.contour is not None:
        with stage('contour'):
            contour_stage(config, report)
    logger.info("cr3bp study '%s' finished: %d methods", config.name, len(report.methods))
    return report


def run_aerocapture_study(config: ScenarioConfig) -> StudyReport:
    """
    Aerocapture dispersion study.

    The belief is diagonal in radial/transverse position and velocity at the
    pre-entry start state, rotated to the inertial frame. Contours default to
    the position slice (0, 1) at k = 3.

    Raises:
        StageError: any stage failed
    """
    report = new_report(config)
    setup = prepare_aerocapture(config, report)
    with stage('maps'):
        propagators = build_propagators(config, setup.system, setup.reference_state, config.horizon,
                                        setup.settings, report)

    run_methods(config, propagators, setup.belief, report)

    with stage('contour'):
        if config.contour is None:
            config = replace(config, contour={'indices': [0, 1], 'k': 3.0, 'points': DEFAULT_POINTS})
        contour_stage(config, report)
    logger.info("aerocapture study '%s' finished: %d methods", config.name, len(report.methods))
    return report


def run_study(config: ScenarioConfig) -> StudyReport:
    if config.system_kind == 'cr3bp':
        return run_cr3bp_study(config)
    return run_aerocapture_study(config)
