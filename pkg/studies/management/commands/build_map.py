"""
Django management command to build and serialize a polynomial flow map.
Run with: python manage.py build_map scenario.json [--kind full|directional] [--order N] [--output map.txt]
"""

from pathlib import Path

from common.utils import Stopwatch, format_time_duration
from dynamics.stm import stm_propagate
from flowmaps.maps import DirectionFrame, build_da_map, build_dda_map, stretching_direction
from flowmaps.serialization import dump_map
from studies.config import ScenarioConfig
from studies.management.base import UqflowCommand
from studies.runners import new_report, prepare_study


class Command(UqflowCommand):
    help = "Build the scenario's full or directional flow map over its horizon and write it as text"

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Scenario JSON file')
        parser.add_argument('--kind', choices=['full', 'directional'], default='full')
        parser.add_argument('--order', type=int, help="Override the scenario's map order")
        parser.add_argument('--output', help='Target file (default: <output dir>/<name>_<kind>.map)')

    def run(self, *args, **options):
        config = ScenarioConfig.load(options['scenario'])
        order = options['order'] or config.maps['order']
        setup = prepare_study(config, new_report(config))
        with Stopwatch() as watch:
            if options['kind'] == 'full':
                flow_map = build_da_map(setup.system, setup.reference_state, 0.0, config.horizon, order,
                                        setup.settings)
            else:
                direction = setup.direction
                if direction is None:
                    stm = stm_propagate(setup.system, setup.reference_state, 0.0, config.horizon, setup.settings)
                    direction = stretching_direction(stm)
                frame = DirectionFrame.from_direction(direction)
                flow_map = build_dda_map(setup.system, setup.reference_state, 0.0, config.horizon, order, frame,
                                         setup.settings)
        output = Path(options['output'] or Path(config.output['directory']) / f"{config.name}_{options['kind']}.map")
        output.parent.mkdir(parents=True, exist_ok=True)
        dump_map(flow_map, output)
        self.success(
            f"Built {options['kind']} map of order {order} in {format_time_duration(watch.elapsed)}: "
            f"{max(flow_map.term_counts())} terms per component, written to {output}"
        )
