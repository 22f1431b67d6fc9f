"""
Django management command for the propagation timing sweep.
Run with: python manage.py bench scenario.json [--samples N] [--repeats N] [--out-dir DIR]
"""

from pathlib import Path

from common.utils import format_significant
from studies.bench import DEFAULT_REPEATS, run_bench
from studies.config import ScenarioConfig
from studies.management.base import UqflowCommand
from studies.reporting import emit_report


class Command(UqflowCommand):
    help = 'Time direct, full-map and directional-map propagation of a scenario and report amortization'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Scenario JSON file')
        parser.add_argument('--samples', type=int, help='Monte Carlo inputs per timing')
        parser.add_argument('--repeats', type=int, default=DEFAULT_REPEATS)
        parser.add_argument('--out-dir', help='Override the output directory')
        parser.add_argument('--format', choices=['csv', 'text'], default='csv')

    def run(self, *args, **options):
        config = ScenarioConfig.load(options['scenario']).with_overrides(out_dir=options['out_dir'])
        report = run_bench(config, options['samples'], options['repeats'])
        out_dir = Path(config.output['directory'])
        emit_report(report, out_dir, options['format'])
        for key, value in report.summary.items():
            self.stdout.write(f"  {key}: {format_significant(value)}")
        self.success(f"Bench '{config.name}' written to {out_dir}")
