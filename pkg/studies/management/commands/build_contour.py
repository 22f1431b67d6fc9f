"""
Django management command to build a confidence contour from a moment file.
Run with: python manage.py build_contour moments.json --indices 0 1 [--kind banana] [--samples samples.csv]
"""

from pathlib import Path

import numpy as np
from django.conf import settings

from common.exceptions import UsageError
from contour.curves import (
    KIND_BANANA,
    banana_contour,
    coverage_report,
    format_coverage_report,
    gaussian_ellipse,
)
from contour.geometry import SliceSpec, projected_moments_from_tensors, whiten
from studies.management.base import UqflowCommand
from uq_methods.beliefs import CentralMomentSet


class Command(UqflowCommand):
    help = 'Build an ellipse or banana contour in a 2D slice of a central-moment file and write it as CSV'

    def add_arguments(self, parser):
        parser.add_argument('moments', help='Moment set JSON (mean, covariance, third, fourth)')
        parser.add_argument('--indices', type=int, nargs=2, required=True, metavar=('I', 'J'))
        parser.add_argument('--k', type=float, default=3.0)
        parser.add_argument('--kind', choices=['ellipse', 'banana'], default='ellipse')
        parser.add_argument('--points', type=int, default=settings.UQFLOW['CONTOUR_POINTS'])
        parser.add_argument('--samples', help='Numeric CSV of samples (full states or slice pairs) for coverage')
        parser.add_argument('--output', default='contour.csv')

    def run(self, *args, **options):
        spec = SliceSpec(tuple(options['indices']), options['k'])
        moments = CentralMomentSet.from_json(Path(options['moments']).read_text(encoding='utf-8'))
        if max(spec.indices) >= moments.dim:
            raise UsageError(f"slice indices {spec.indices} exceed the moment dimension {moments.dim}")
        sliced = moments.marginal(spec.indices)
        if options['kind'] == KIND_BANANA:
            if sliced.max_order < 4:
                raise UsageError("a banana contour needs third and fourth moments")
            projected = projected_moments_from_tensors(sliced, whiten(sliced.mean, sliced.covariance))
            curve = banana_contour(sliced.mean, sliced.covariance, projected, spec.k, options['points'])
        else:
            curve = gaussian_ellipse(sliced.mean, sliced.covariance, spec.k, options['points'])

        output = Path(options['output'])
        output.parent.mkdir(parents=True, exist_ok=True)
        with output.open('w', newline='', encoding='utf-8') as stream:
            curve.to_csv(stream)
        self.success(f"Wrote {curve.kind} contour with {len(curve)} points to {output}")

        if options['samples']:
            samples = np.loadtxt(options['samples'], delimiter=',', comments='#', ndmin=2)
            if samples.shape[1] != 2:
                samples = spec.select(samples)
            self.stdout.write(format_coverage_report(coverage_report(curve, samples)))
