"""
Django management command to run a study scenario.
Run with: python manage.py run_study scenario.json [--seed N] [--out-dir DIR] [--samples N]
"""

from pathlib import Path

from django.contrib.auth.models import User

from common.exceptions import StageError, UqflowError
from studies.config import ScenarioConfig
from studies.management.base import UqflowCommand
from studies.models import StudyRun
from studies.reporting import emit_report
from studies.runners import run_study
from uq_methods.moments import weighted_central_moments


class Command(UqflowCommand):
    help = 'Run a CR3BP or aerocapture study scenario and write its report tables'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Scenario JSON file')
        parser.add_argument('--seed', type=int, help='Override the scenario seed')
        parser.add_argument('--out-dir', help='Override the output directory')
        parser.add_argument('--samples', type=int, help='Override the Monte Carlo sample count')
        parser.add_argument('--format', choices=['csv', 'text'], help='Override the report format')
        parser.add_argument('--moments', action='store_true',
                            help='Also write central moments for every ensemble method (to fourth order) and for PCE and GMM')
        parser.add_argument('--persist', metavar='USERNAME',
                            help='Store the run in the database under this user')

    def run(self, *args, **options):
        config = ScenarioConfig.load(options['scenario'])
        config = config.with_overrides(seed=options['seed'], out_dir=options['out_dir'], samples=options['samples'])
        out_dir = Path(config.output['directory'])
        fmt = options['format'] or config.output['format']
        self.stdout.write(f"Running study '{config.name}' ({config.system_kind}, seed {config.seed})...")

        run = None
        if options['persist']:
            owner = User.objects.filter(username=options['persist']).first()
            if owner is None:
                raise UqflowError(f"unknown user '{options['persist']}'")
            run = StudyRun.objects.create(owner=owner, name=config.name, system_kind=config.system_kind,
                                          scenario=config.to_dict())
        try:
            report = run_study(config)
        except UqflowError as exc:
            if run is not None:
                run.mark_failed(str(exc), exc.stage if isinstance(exc, StageError) else '')
            raise
        if run is not None:
            run.mark_completed(report.to_dict())

        written = emit_report(report, out_dir, fmt)
        if options['moments']:
            for result in report.methods:
                if result.ensemble is not None:
                    moments = weighted_central_moments(result.ensemble, 4)
                elif result.moments is not None:
                    moments = result.moments
                else:
                    continue
                path = out_dir / f"moments_{result.label.replace('+', '_').lower()}.json"
                path.write_text(moments.to_json(), encoding='utf-8')
                written.append(path)

        for row in report.error_rows():
            self.stdout.write(f"  {row['label']}: mean error {row['mean_error_norm']:.3e}, "
                              f"covariance error {row['covariance_error']:.3e}")
        for row in report.coverage:
            self.stdout.write(f"  {row['label']}: coverage {100.0 * row['fraction']:.1f}%")
        self.success(f"Study '{config.name}' finished: {len(written)} files in {out_dir}")
