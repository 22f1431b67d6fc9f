"""
Timing sweep for uqflow project.

Compares direct propagation (one member at a time and vectorized) with
full-map and directional-map evaluation on the same Monte Carlo inputs,
and reports how many evaluations amortize map construction.
"""

import logging
import math
from typing import Callable, Optional

from common.exceptions import UsageError
from common.utils import Stopwatch, relative_speedup
from flowmaps.maps import DirectionFrame, build_da_map, build_dda_map, stretching_direction
from dynamics.stm import stm_propagate
from uq_methods.propagators import DirectPropagator, MappedPropagator
from uq_methods.sampling import sample_gaussian
from .config import ScenarioConfig
from .reporting import SECTION_DIRECT, SECTION_MAPPED, StudyReport, TimingRow
from .runners import new_report, prepare_study, stage

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 3
PER_SAMPLE_SUBSET = 50


def best_time(function: Callable[[], object], repeats: int) -> float:
    """Smallest wall time of ``repeats`` calls."""
    timings = []
    for _ in range(repeats):
        with Stopwatch() as watch:
            function()
        timings.append(watch.elapsed)
    return min(timings)


def amortization_count(construction_s: float, direct_per_sample_s: float, map_per_sample_s: float) -> Optional[int]:
    """
    Evaluations after which building the map pays off:
    construction / (direct per sample − map per sample), or None when the
    map is not faster per sample.
    """
    saving = direct_per_sample_s - map_per_sample_s
    if saving <= 0.0:
        return None
    return math.ceil(construction_s / saving)


def run_bench(config: ScenarioConfig, samples: Optional[int] = None, repeats: int = DEFAULT_REPEATS,
              per_sample_subset: int = PER_SAMPLE_SUBSET) -> StudyReport:
    """
    Time the propagation modes of a scenario.

    Map construction and evaluation are measured separately; evaluation
    rows never include construction.

    Args:
        config: Validated scenario (its reference and belief are used)
        samples: Monte Carlo input count (defaults to ``config.mc['samples']``)
        repeats: Repetitions per timing, the minimum is reported
        per_sample_subset: Members integrated one by one for the per-sample row

    Returns:
        StudyReport with only the timing table and a summary of per-sample
        costs, speedups and amortization counts
    """
    if repeats < 1:
        raise UsageError(f"repeats must be positive, got {repeats}")
    samples = samples or config.mc['samples']
    report = new_report(config)
    setup = prepare_study(config, report)
    order = config.maps['order']

    with stage('bench inputs'):
        deltas = sample_gaussian(setup.belief, samples, config.seed, 'bench').states
        subset = deltas[:max(1, min(per_sample_subset, samples))]

    with stage('bench construction'):
        with Stopwatch() as watch:
            full_map = build_da_map(setup.system, setup.reference_state, 0.0, config.horizon, order, setup.settings)
        full_construction = watch.elapsed
        direction = setup.direction
        if direction is None:
            direction = stretching_direction(stm_propagate(setup.system, setup.reference_state, 0.0,
                                                           config.horizon, setup.settings))
        with Stopwatch() as watch:
            dda_map = build_dda_map(setup.system, setup.reference_state, 0.0, config.horizon, order,
                                    DirectionFrame.from_direction(direction), setup.settings)
        dda_construction = watch.elapsed
    report.add_construction(f"DA map (order {order})", full_construction)
    report.add_construction(f"DDA map (order {order})", dda_construction)

    with stage('bench evaluation'):
        per_sample = DirectPropagator(setup.system, setup.reference_state, 0.0, config.horizon, setup.settings,
                                      batch_size=1)
        vectorized = DirectPropagator(setup.system, setup.reference_state, 0.0, config.horizon, setup.settings,
                                      batch_size=config.batch_size)
        full = MappedPropagator(full_map)
        dda = MappedPropagator(dda_map)
        direct_subset_s = best_time(lambda: per_sample.propagate(subset), repeats)
        vectorized_s = best_time(lambda: vectorized.propagate(deltas), repeats)
        full_s = best_time(lambda: full.propagate(deltas), repeats)
        dda_s = best_time(lambda: dda.propagate(deltas), repeats)

    direct_per_sample = direct_subset_s / len(subset)
    report.timings.extend([
        TimingRow(SECTION_DIRECT, f"direct per-sample ({len(subset)} members)", None, direct_subset_s),
        TimingRow(SECTION_DIRECT, f"direct vectorized ({samples} members)", None, vectorized_s),
        TimingRow(SECTION_MAPPED, f"DA map ({samples} members)", None, full_s),
        TimingRow(SECTION_MAPPED, f"DDA map ({samples} members)", None, dda_s),
    ])
    report.summary.update({
        'samples': samples,
        'repeats': repeats,
        'direct_per_sample_s': direct_per_sample,
        'direct_vectorized_per_sample_s': vectorized_s / samples,
        'full_map_per_sample_s': full_s / samples,
        'dda_map_per_sample_s': dda_s / samples,
        'full_map_speedup': relative_speedup(direct_per_sample * samples, full_s),
        'dda_map_speedup': relative_speedup(direct_per_sample * samples, dda_s),
        'dda_over_full_speedup': relative_speedup(full_s, dda_s),
        'full_map_amortization': amortization_count(full_construction, direct_per_sample, full_s / samples),
        'dda_map_amortization': amortization_count(dda_construction, direct_per_sample, dda_s / samples),
    })
    logger.info("bench '%s': DA speedup %s, DDA speedup %s", config.name,
                report.summary['full_map_speedup'], report.summary['dda_map_speedup'])
    return report
