"""
Django management command to write the demo scenario files.
Run with: python manage.py create_demo_scenarios [--out-dir scenarios]
"""

from pathlib import Path

from studies.config import ScenarioConfig
from studies.management.base import UqflowCommand
from studies.scenarios import demo_scenarios


class Command(UqflowCommand):
    help = 'Write the halo study and the seven aerocapture dispersion cases as scenario files'

    def add_arguments(self, parser):
        parser.add_argument('--out-dir', default='scenarios')

    def run(self, *args, **options):
        out_dir = Path(options['out_dir'])
        out_dir.mkdir(parents=True, exist_ok=True)
        self.stdout.write('Creating demo scenarios...')
        for document in demo_scenarios():
            config = ScenarioConfig.from_dict(document)
            config.dump(out_dir / f"{config.name}.json")
        self.success(f"Successfully created {len(demo_scenarios())} scenarios in {out_dir}")
