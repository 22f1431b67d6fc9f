"""
Demo scenarios for uqflow project.

Scenario documents for the halo-orbit study and the seven aerocapture
dispersion cases. ``create_demo_scenarios`` writes them to disk; the tests
use the same builders with smaller sample counts.
"""

from typing import Any, Dict, List

from common.utils import merge_overrides
from dynamics.aerocapture import DISPERSION_CASES, V_INF
from dynamics.halo import APOLUNE_OFFSET, HALO_JACOBI, HALO_PERIOD

HALO_HORIZON = 0.9
HALO_MEAN_DEVIATION = [0.0, 1e-4, 0.0, 0.0, 1e-4, 0.0]
COVERAGE_SAMPLES = 4000


def halo_scenario(**overrides) -> Dict[str, Any]:
    """
    Halo study: UT, CUT4, MC and LinCov direct, UT and MC on the full and
    directional maps, errors against direct UT.
    """
    document = {
        'name': 'halo-apolune',
        'system': {'kind': 'cr3bp'},
        'reference': {
            'kind': 'halo',
            'period': HALO_PERIOD,
            'jacobi_constant': HALO_JACOBI,
            'family': 'southern',
            'apolune_offset': APOLUNE_OFFSET,
        },
        'horizon': HALO_HORIZON,
        'belief': {
            'kind': 'directional_inflation',
            'mean_deviation': list(HALO_MEAN_DEVIATION),
            'base_variance': 1e-6,
            'direction_variance': 1e-5,
        },
        'maps': {'order': 3},
        'methods': [
            {'method': 'ut', 'propagation': 'direct'},
            {'method': 'ut', 'propagation': 'full'},
            {'method': 'ut', 'propagation': 'directional'},
            {'method': 'lincov', 'propagation': 'direct'},
            {'method': 'cut4', 'propagation': 'direct'},
            {'method': 'mc', 'propagation': 'direct'},
            {'method': 'mc', 'propagation': 'full'},
            {'method': 'mc', 'propagation': 'directional'},
        ],
        'reference_method': 'UT',
        'mc': {'samples': 10000},
    }
    return merge_overrides(document, overrides)


def aerocapture_scenario(case_number: int, samples: int = COVERAGE_SAMPLES, **overrides) -> Dict[str, Any]:
    """
    One tabulated dispersion case: MC, LinCov and CUT4 direct, with
    position-slice contours at k = 3.
    """
    case = DISPERSION_CASES[case_number]
    document = {
        'name': f"aerocapture-case-{case.number}",
        'system': {'kind': 'aerocapture'},
        'reference': {
            'kind': 'aerocapture',
            'v_inf': V_INF,
            'efpa': case.efpa,
            't_pre': case.t_pre,
        },
        'horizon': case.horizon,
        'belief': {
            'kind': 'radial_transverse',
            'sigmas': [
                case.sigma_radial_m, case.sigma_transverse_m,
                case.sigma_radial_rate_mps, case.sigma_transverse_rate_mps,
            ],
        },
        'methods': [
            {'method': 'mc', 'propagation': 'direct'},
            {'method': 'lincov', 'propagation': 'direct'},
            {'method': 'cut4', 'propagation': 'direct'},
        ],
        'reference_method': 'MC',
        'mc': {'samples': samples},
        'contour': {'indices': [0, 1], 'k': 3.0},
    }
    return merge_overrides(document, overrides)


def demo_scenarios() -> List[Dict[str, Any]]:
    return [halo_scenario()] + [aerocapture_scenario(number) for number in sorted(DISPERSION_CASES)]
