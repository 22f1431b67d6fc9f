"""
Shared fixtures for the uqflow test suite.

The halo orbit and its UQ start state take seconds to build, so they are
built once per test process.
"""

import json
from functools import lru_cache
from pathlib import Path

import numpy as np

from dynamics.aerocapture import DISPERSION_CASES, V_INF, build_aerocapture_nominal
from dynamics.halo import apolune_start, reconstruct_halo
from dynamics.stm import stm_propagate
from dynamics.systems import AerocaptureSystem, Cr3bpSystem
from flowmaps.maps import DirectionFrame, stretching_direction

GOLDEN_DIR = Path(__file__).resolve().parent / 'golden'
HORIZON = 0.9
MEAN_DEVIATION = np.array([0.0, 1e-4, 0.0, 0.0, 1e-4, 0.0])


@lru_cache(maxsize=None)
def halo_orbit():
    return reconstruct_halo()


@lru_cache(maxsize=None)
def start_state():
    state, _ = apolune_start(halo_orbit())
    state.setflags(write=False)
    return state


@lru_cache(maxsize=None)
def halo_stm():
    stm = stm_propagate(Cr3bpSystem(), start_state(), 0.0, HORIZON)
    stm.setflags(write=False)
    return stm


@lru_cache(maxsize=None)
def halo_direction_frame():
    return DirectionFrame.from_direction(stretching_direction(halo_stm()))


def halo_covariance():
    gamma = halo_direction_frame().gamma_star
    return 1e-6 * np.eye(6) + 1e-5 * np.outer(gamma, gamma)


@lru_cache(maxsize=None)
def aerocapture_nominal(case_number=4):
    case = DISPERSION_CASES[case_number]
    return build_aerocapture_nominal(V_INF, case.efpa, AerocaptureSystem(), case.t_pre)


def recorded_golden(test_case, name, payload):
    """
    Return the frozen copy of ``payload`` stored as ``golden/<name>.json``.

    The first run records ``payload`` and skips the test; commit the file to
    freeze it. Delete it to re-record after an intended change.
    """
    path = GOLDEN_DIR / f"{name}.json"
    if not path.exists():
        GOLDEN_DIR.mkdir(exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        test_case.skipTest(f"recorded golden file {path.name}")
    return json.loads(path.read_text(encoding='utf-8'))
