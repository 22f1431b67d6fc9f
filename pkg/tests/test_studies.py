"""
Test cases for study scenarios, runners, reports and their surfaces.

This module contains tests for scenario validation, report emission, the
REST endpoints, the management commands and the reproduction runs of the
halo and aerocapture studies.
"""

import io
import json
import tempfile
from pathlib import Path

import numpy as np
from django.contrib.auth.models import User
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag
from numpy.testing import assert_allclose
from rest_framework import status
from rest_framework.test import APITestCase

from common.exceptions import ConfigError, StageError, UsageError
from common.utils import format_significant
from contour.curves import gaussian_ellipse
from dynamics.aerocapture import DISPERSION_CASES
from flowmaps.maps import KIND_FULL
from flowmaps.serialization import load_map
from studies.bench import amortization_count, run_bench
from studies.config import ScenarioConfig
from studies.models import StudyRun
from studies.reporting import (
    HARDWARE_DISCLAIMER,
    TABLE_COLUMNS,
    MethodResult,
    StudyReport,
    emit_report,
    read_report_csv,
)
from studies.runners import inflated_covariance, run_study
from studies.scenarios import aerocapture_scenario, demo_scenarios, halo_scenario

from .helpers import recorded_golden


def fast_scenario(**overrides):
    """Short vacuum arc before entry: MC, LinCov and CUT4 with a position-slice contour."""
    document = {
        'name': 'fast-aerocapture',
        'seed': 7,
        'system': {'kind': 'aerocapture'},
        'reference': {'kind': 'aerocapture'},
        'horizon': 20.0,
        'belief': {'kind': 'radial_transverse'},
        'maps': {'order': 2},
        'methods': [
            {'method': 'mc'},
            {'method': 'lincov'},
            {'method': 'cut4'},
        ],
        'reference_method': 'MC',
        'mc': {'samples': 200},
        'contour': {'indices': [0, 1], 'k': 3.0, 'points': 90},
    }
    document.update(overrides)
    return document


def failing_scenario():
    """Explicit belief whose covariance is symmetric but indefinite; Monte Carlo sampling fails."""
    covariance = [[1.0, 2.0, 0.0, 0.0], [2.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    return fast_scenario(
        name='indefinite-belief',
        belief={'kind': 'explicit', 'mean': [0.0, 0.0, 0.0, 0.0], 'covariance': covariance},
    )


def write_scenario(directory, document, name='scenario.json'):
    path = Path(directory) / name
    path.write_text(json.dumps(document), encoding='utf-8')
    return str(path)


class ScenarioConfigTestCase(SimpleTestCase):
    """
    Test cases for scenario validation and defaults.
    """

    def assert_invalid(self, document, field):
        with self.assertRaises(ConfigError) as context:
            ScenarioConfig.from_dict(document)
        self.assertIn(field, context.exception.errors)
        self.assertEqual(context.exception.exit_code, 2)

    def test_defaults_filled(self):
        """Test that every optional block takes its defaults"""
        config = ScenarioConfig.from_dict({
            'name': 'minimal',
            'system': {'kind': 'cr3bp'},
            'reference': {'kind': 'halo'},
            'horizon': 0.9,
            'belief': {'kind': 'directional_inflation'},
            'methods': [{'method': 'ut'}],
        })
        self.assertEqual(config.system['mu'], 0.0121505856)
        self.assertEqual(config.reference['family'], 'southern')
        self.assertEqual(config.reference['apolune_offset'], -0.25)
        self.assertEqual(config.belief['base_variance'], 1e-6)
        self.assertEqual(config.maps['order'], 3)
        self.assertEqual(config.methods, [{'method': 'ut', 'propagation': 'direct'}])
        self.assertEqual(config.labels, ['UT'])
        self.assertEqual(config.gmm, {'depth': 4, 'delta': 0.5, 'component_method': 'ut'})
        self.assertEqual(config.pce, {'degree': 3, 'oversample': 2.0, 'moment_order': 2})
        self.assertIsNone(config.ut['lambda_param'])
        self.assertIsNone(config.contour)
        self.assertIsNone(config.reference_method)
        self.assertEqual(config.output['format'], 'csv')

    def test_unknown_keys_rejected(self):
        self.assert_invalid(fast_scenario(colour='blue'), 'colour')
        self.assert_invalid(fast_scenario(mc={'samples': 10, 'chains': 2}), 'mc')

    def test_foreign_kind_parameter_rejected(self):
        self.assert_invalid(fast_scenario(system={'kind': 'aerocapture', 'mu': 0.01}), 'system')

    def test_explicit_belief_needs_mean(self):
        self.assert_invalid(fast_scenario(belief={'kind': 'explicit', 'covariance': [[1.0]]}), 'belief')

    def test_explicit_belief_dimension(self):
        belief = {'kind': 'explicit', 'mean': [0.0] * 6, 'covariance': np.eye(6).tolist()}
        self.assert_invalid(fast_scenario(belief=belief), 'belief')

    def test_reference_must_match_system(self):
        self.assert_invalid(fast_scenario(reference={'kind': 'halo'}), 'reference')

    def test_directional_inflation_needs_cr3bp(self):
        self.assert_invalid(fast_scenario(belief={'kind': 'directional_inflation'}), 'belief')

    def test_duplicate_methods_rejected(self):
        methods = [{'method': 'mc'}, {'method': 'mc', 'propagation': 'direct'}]
        self.assert_invalid(fast_scenario(methods=methods), 'methods')

    def test_reference_method_must_be_configured(self):
        self.assert_invalid(fast_scenario(reference_method='UT'), 'reference_method')

    def test_gmm_split_parameter_range(self):
        self.assert_invalid(fast_scenario(gmm={'delta': 1.0}), 'gmm')
        self.assert_invalid(fast_scenario(gmm={'delta': 0.0}), 'gmm')

    def test_contour_indices(self):
        self.assert_invalid(fast_scenario(contour={'indices': [1, 1]}), 'contour')
        self.assert_invalid(fast_scenario(contour={'indices': [0, 4]}), 'contour')

    def test_horizon_must_be_positive(self):
        self.assert_invalid(fast_scenario(horizon=0.0), 'horizon')

    def test_not_an_object(self):
        with self.assertRaises(ConfigError):
            ScenarioConfig.from_dict([fast_scenario()])

    def test_invalid_json(self):
        with self.assertRaises(ConfigError) as context:
            ScenarioConfig.loads('{"name": ')
        self.assertEqual(context.exception.exit_code, 2)

    def test_dump_load_round_trip(self):
        config = ScenarioConfig.from_dict(fast_scenario())
        stream = io.StringIO()
        config.dump(stream)
        self.assertEqual(ScenarioConfig.loads(stream.getvalue()), config)
        self.assertEqual(ScenarioConfig.loads(config.dumps()).dumps(), config.dumps())

    def test_with_overrides(self):
        config = ScenarioConfig.from_dict(fast_scenario())
        changed = config.with_overrides(seed=11, out_dir='/tmp/uqflow-out', samples=50)
        self.assertEqual(changed.seed, 11)
        self.assertEqual(changed.mc['samples'], 50)
        self.assertEqual(changed.output['directory'], '/tmp/uqflow-out')
        self.assertEqual(config.with_overrides(), config)
        with self.assertRaises(ConfigError):
            config.with_overrides(samples=0)
        with self.assertRaises(ConfigError):
            config.with_overrides(samples=1)

    def test_labels_and_map_needs(self):
        config = ScenarioConfig.from_dict(halo_scenario())
        self.assertEqual(config.labels, ['UT', 'DA+UT', 'DDA+UT', 'LinCov', 'CUT4', 'MC', 'DA+MC', 'DDA+MC'])
        self.assertTrue(config.needs_map('full'))
        self.assertTrue(config.needs_map('directional'))
        self.assertFalse(ScenarioConfig.from_dict(fast_scenario()).needs_map('full'))

    def test_demo_scenarios_validate(self):
        documents = demo_scenarios()
        self.assertEqual(len(documents), 8)
        for document in documents:
            with self.subTest(name=document['name']):
                ScenarioConfig.from_dict(document)
        case7 = ScenarioConfig.from_dict(aerocapture_scenario(7))
        self.assertEqual(case7.reference['efpa'], -4.87)

    def test_integrator_settings_override(self):
        config = ScenarioConfig.from_dict(fast_scenario(integrator={'rtol': 1e-10, 'poly_step': 0.1}))
        settings = config.integrator_settings(config.build_system())
        self.assertEqual(settings.rtol, 1e-10)
        self.assertEqual(settings.poly_step, 0.1)
        self.assertIsNone(settings.poly_steps_per_unit)
        self.assertEqual(settings.step_count(1.0), 10)

    def test_inflated_covariance(self):
        direction = np.array([0.6, 0.8, 0.0])
        covariance = inflated_covariance(direction, 1e-6, 1e-5)
        assert_allclose(covariance @ direction, 1.1e-5 * direction, atol=1e-20)
        assert_allclose(covariance @ np.array([0.0, 0.0, 1.0]), [0.0, 0.0, 1e-6], atol=1e-20)


class ReportTestCase(SimpleTestCase):
    """
    Test cases for report tables and their CSV and text emission.
    """

    def make_report(self):
        report = StudyReport('demo', 'cr3bp', 3, 2, reference_method='UT')
        report.add_method(MethodResult('UT', 'ut', 'direct', np.array([1.0, 2.0]), np.eye(2), 0.5))
        report.add_method(MethodResult('DA+UT', 'ut', 'full', np.array([1.0, 2.001]), 2.0 * np.eye(2), 0.01))
        report.add_construction('DA map (order 3)', 1.25)
        return report

    def test_empty_report_writes_headers(self):
        with tempfile.TemporaryDirectory() as directory:
            written = emit_report(StudyReport('empty', 'aerocapture', 1, 1), directory)
            self.assertEqual([path.name for path in written], [f"{name}.csv" for name in TABLE_COLUMNS])
            for name, columns in TABLE_COLUMNS.items():
                self.assertEqual(read_report_csv(Path(directory) / f"{name}.csv"), (columns, []))
            first_line = (Path(directory) / 'timings.csv').read_text(encoding='utf-8').splitlines()[0]
            self.assertEqual(first_line, HARDWARE_DISCLAIMER.format(threads=1))

    def test_error_rows(self):
        rows = self.make_report().error_rows()
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['label'], 'DA+UT')
        self.assertAlmostEqual(rows[0]['mean_error_norm'], 1e-3, places=12)
        self.assertAlmostEqual(rows[0]['covariance_error'], 1.0, places=12)

    def test_no_reference_no_errors(self):
        report = self.make_report()
        report.reference_method = None
        self.assertEqual(report.error_rows(), [])

    def test_duplicate_method(self):
        report = self.make_report()
        with self.assertRaises(UsageError):
            report.add_method(MethodResult('UT', 'ut', 'direct', np.zeros(2), np.eye(2), 0.1))

    def test_timing_sections(self):
        sections = [(row.section, row.label) for row in self.make_report().timings]
        self.assertEqual(sections, [('direct', 'UT'), ('mapped', 'DA+UT'), ('construction', 'DA map (order 3)')])

    def test_csv_significant_digits(self):
        report = self.make_report()
        report.summary['halo_period'] = 3.136654204
        with tempfile.TemporaryDirectory() as directory:
            emit_report(report, directory)
            columns, rows = read_report_csv(Path(directory) / 'errors.csv')
            self.assertEqual(columns, TABLE_COLUMNS['errors'])
            self.assertEqual(rows, [{'label': 'DA+UT', 'mean_error_norm': '0.001', 'covariance_error': '1'}])
            _, summary = read_report_csv(Path(directory) / 'summary.csv')
            self.assertEqual(summary, [{'key': 'halo_period', 'value': '3.13665'}])
            _, timings = read_report_csv(Path(directory) / 'timings.csv')
            self.assertEqual(timings[2], {'section': 'construction', 'label': 'DA map (order 3)',
                                          'construction_s': '1.25', 'evaluation_s': ''})
            _, moments = read_report_csv(Path(directory) / 'moments.csv')
            self.assertEqual(len(moments), 2 * (2 + 3))

    def test_text_format(self):
        with tempfile.TemporaryDirectory() as directory:
            written = emit_report(self.make_report().to_dict(), directory, 'text')
            self.assertEqual([path.name for path in written], ['report.txt'])
            text = written[0].read_text(encoding='utf-8')
        self.assertTrue(text.startswith('# study: demo (cr3bp), seed 3'))
        for name in TABLE_COLUMNS:
            self.assertIn(f"[{name}]", text)
        self.assertIn('DA+UT | 0.001 | 1', text)

    def test_unknown_format(self):
        with self.assertRaises(UsageError):
            emit_report(self.make_report(), '.', 'xlsx')

    def test_contour_files(self):
        report = self.make_report()
        report.add_contour('UT ellipse', gaussian_ellipse([0.0, 0.0], np.eye(2), 3.0, 16))
        with tempfile.TemporaryDirectory() as directory:
            written = emit_report(report, directory)
            self.assertIn(Path(directory) / 'contour_ut_ellipse.csv', written)
            lines = (Path(directory) / 'contour_ut_ellipse.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 't,x,y')
        self.assertEqual(len(lines), 1 + 17)
        self.assertEqual(report.coverage, [])

    def test_amortization_count(self):
        self.assertEqual(amortization_count(2.0, 1e-2, 1e-4), 203)
        self.assertIsNone(amortization_count(2.0, 1e-4, 1e-4))


class StudyRunnerTestCase(SimpleTestCase):
    """
    Test cases for running short scenarios end to end.
    """

    def test_fast_study(self):
        report = run_study(ScenarioConfig.from_dict(fast_scenario()))
        self.assertEqual(report.labels, ['MC', 'LinCov', 'CUT4'])
        self.assertEqual([row['label'] for row in report.error_rows()], ['LinCov', 'CUT4'])
        labels = [row['label'] for row in report.coverage]
        self.assertEqual(labels, ['LinCov ellipse', 'CUT4 ellipse', 'CUT4 banana'])
        for row in report.coverage:
            self.assertEqual(row['n_samples'], 200)
            self.assertGreater(row['fraction'], 0.9)
        self.assertAlmostEqual(report.summary['entry_speed'], 11.3715, places=3)
        self.assertEqual(report.method('MC').details['samples'], 200)
        # The vacuum arc is nearly linear
        lincov, cut4 = report.method('LinCov'), report.method('CUT4')
        assert_allclose(cut4.covariance, lincov.covariance, rtol=1e-3, atol=1e-12)

    def test_report_is_deterministic(self):
        config = ScenarioConfig.from_dict(fast_scenario())
        first, second = run_study(config).to_dict(), run_study(config).to_dict()
        self.assertEqual(first['tables']['moments'], second['tables']['moments'])
        self.assertEqual(first['tables']['coverage'], second['tables']['coverage'])

    def test_emitted_tables_read_back_at_printed_precision(self):
        report = run_study(ScenarioConfig.from_dict(fast_scenario()))
        with tempfile.TemporaryDirectory() as directory:
            emit_report(report, directory)
            _, moments = read_report_csv(Path(directory) / 'moments.csv')
            _, coverage = read_report_csv(Path(directory) / 'coverage.csv')
        expected = report.moment_rows()
        self.assertEqual(len(moments), len(expected))
        for row, source in zip(moments, expected):
            self.assertEqual((row['label'], row['quantity']), (source['label'], source['quantity']))
            self.assertEqual(float(row['value']), float(format_significant(source['value'])))
        for row, source in zip(coverage, report.coverage):
            self.assertEqual(row['label'], source['label'])
            self.assertEqual(float(row['fraction']), float(format_significant(source['fraction'])))

    def test_fixed_seed_report_is_frozen(self):
        report = run_study(ScenarioConfig.from_dict(fast_scenario()))
        tables = {}
        with tempfile.TemporaryDirectory() as directory:
            emit_report(report, directory)
            for name in ('errors', 'coverage', 'moments'):
                _, tables[name] = read_report_csv(Path(directory) / f"{name}.csv")
        self.assertEqual(tables, recorded_golden(self, 'fast_aerocapture_report', tables))

    def test_pce_fourth_moments_draw_a_banana(self):
        document = fast_scenario(methods=[{'method': 'mc'}, {'method': 'pce'}], pce={'moment_order': 4})
        report = run_study(ScenarioConfig.from_dict(document))
        self.assertEqual(report.method('PCE').moments.max_order, 4)
        labels = [row['label'] for row in report.coverage]
        self.assertEqual(labels, ['PCE ellipse', 'PCE banana'])
        self.assertIn('PCE m_uuuu', report.summary)
        default = run_study(ScenarioConfig.from_dict(
            fast_scenario(methods=[{'method': 'pce'}], reference_method=None)))
        self.assertEqual(default.method('PCE').moments.max_order, 2)

    def test_failure_names_stage(self):
        with self.assertRaises(StageError) as context:
            run_study(ScenarioConfig.from_dict(failing_scenario()))
        self.assertEqual(context.exception.stage, 'method MC')
        self.assertEqual(context.exception.exit_code, 3)

    def test_bench_rejects_zero_repeats(self):
        with self.assertRaises(UsageError):
            run_bench(ScenarioConfig.from_dict(fast_scenario()), samples=10, repeats=0)


class StudyApiTestCase(APITestCase):
    """
    Test cases for study endpoints.
    """

    def setUp(self):
        """
        Set up test data.
        """
        self.user = User.objects.create_user(username='analyst', email='analyst@test.com', password='testpass123')
        self.other_user = User.objects.create_user(username='other', email='other@test.com', password='testpass123')
        self.list_url = '/api/v1/studies/'

    def submit(self, document, **extra):
        self.client.force_authenticate(user=self.user)
        return self.client.post(self.list_url, {'scenario': document, **extra}, format='json')

    def test_authentication_required(self):
        response = self.client.get(self.list_url)
        self.assertEqual(response.status_code, status.HTTP_401_UNAUTHORIZED)

    def test_token_login(self):
        response = self.client.post('/api/v1/auth/token/', {'username': 'analyst', 'password': 'testpass123'},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.client.credentials(HTTP_AUTHORIZATION=f"Bearer {response.data['access']}")
        self.assertEqual(self.client.get(self.list_url).status_code, status.HTTP_200_OK)

    def test_invalid_scenario_not_stored(self):
        response = self.submit(fast_scenario(horizon=-1.0))
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('horizon', response.data['scenario'])
        self.assertEqual(StudyRun.objects.count(), 0)

    def test_run_study(self):
        """Test submitting a scenario and reading its tables"""
        response = self.submit(fast_scenario(), samples=120)
        self.assertEqual(response.status_code, status.HTTP_201_CREATED)
        self.assertEqual(response.data['status'], 'completed')
        self.assertEqual(response.data['owner'], 'analyst')
        self.assertEqual(response.data['scenario']['mc']['samples'], 120)
        self.assertEqual(response.data['report']['methods'], ['MC', 'LinCov', 'CUT4'])
        run_id = response.data['id']

        detail = self.client.get(f"{self.list_url}{run_id}/")
        self.assertEqual(detail.status_code, status.HTTP_200_OK)
        self.assertEqual(detail.data['name'], 'fast-aerocapture')

        errors = self.client.get(f"{self.list_url}{run_id}/errors/")
        self.assertEqual(errors.status_code, status.HTTP_200_OK)
        self.assertEqual(errors.data['columns'], TABLE_COLUMNS['errors'])
        self.assertEqual([row['label'] for row in errors.data['rows']], ['LinCov', 'CUT4'])

        timings = self.client.get(f"{self.list_url}{run_id}/timings/")
        self.assertEqual({row['section'] for row in timings.data['rows']}, {'direct'})

        coverage = self.client.get(f"{self.list_url}{run_id}/coverage/")
        self.assertEqual(len(coverage.data['rows']), 3)
        self.assertTrue(all(row['n_samples'] == 120 for row in coverage.data['rows']))

    def test_other_user_forbidden(self):
        run_id = self.submit(fast_scenario()).data['id']
        self.client.force_authenticate(user=self.other_user)
        self.assertEqual(self.client.get(f"{self.list_url}{run_id}/").status_code, status.HTTP_403_FORBIDDEN)
        self.assertEqual(self.client.get(f"{self.list_url}{run_id}/errors/").status_code,
                         status.HTTP_403_FORBIDDEN)
        self.assertEqual(self.client.delete(f"{self.list_url}{run_id}/").status_code, status.HTTP_403_FORBIDDEN)
        self.assertEqual(self.client.get(self.list_url).data['count'], 0)

    def test_numerical_failure_stored(self):
        response = self.submit(failing_scenario())
        self.assertEqual(response.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)
        self.assertEqual(response.data['stage'], 'method MC')
        run = StudyRun.objects.get(pk=response.data['id'])
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.error_stage, 'method MC')
        self.assertIsNone(run.report)

        conflict = self.client.get(f"{self.list_url}{run.pk}/coverage/")
        self.assertEqual(conflict.status_code, status.HTTP_409_CONFLICT)

    def test_list_filters(self):
        self.submit(fast_scenario())
        self.submit(failing_scenario())
        response = self.client.get(self.list_url)
        self.assertEqual(response.data['count'], 2)
        failed = self.client.get(self.list_url, {'status': 'failed'})
        self.assertEqual(failed.data['count'], 1)
        self.assertEqual(failed.data['results'][0]['name'], 'indefinite-belief')
        self.assertEqual(self.client.get(self.list_url, {'system': 'cr3bp'}).data['count'], 0)

    def test_delete_run(self):
        run_id = self.submit(fast_scenario()).data['id']
        response = self.client.delete(f"{self.list_url}{run_id}/")
        self.assertEqual(response.status_code, status.HTTP_204_NO_CONTENT)
        self.assertFalse(StudyRun.objects.filter(pk=run_id).exists())
        self.assertEqual(self.client.get(f"{self.list_url}{run_id}/").status_code, status.HTTP_404_NOT_FOUND)


class ContourApiTestCase(APITestCase):
    """
    Test cases for the contour endpoint.
    """

    def setUp(self):
        self.user = User.objects.create_user(username='analyst', password='testpass123')
        self.client.force_authenticate(user=self.user)
        self.url = '/api/v1/contours/'

    def test_ellipse(self):
        samples = [[0.0, 0.0], [10.0, 0.0]]
        response = self.client.post(self.url, {
            'mean': [0.0, 0.0], 'covariance': [[4.0, 0.0], [0.0, 1.0]], 'points': 400, 'samples': samples,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['kind'], 'ellipse')
        self.assertEqual(len(response.data['points']), 401)
        self.assertAlmostEqual(response.data['area'], np.pi * 9.0 * 2.0, delta=0.01)
        self.assertIsNone(response.data['moments'])
        self.assertEqual(response.data['coverage']['fraction'], 0.5)

    def test_banana_with_moments(self):
        response = self.client.post(self.url, {
            'mean': [1.0, 2.0], 'covariance': [[1.0, 0.0], [0.0, 1.0]], 'kind': 'banana', 'points': 60,
            'moments': {'m_uuu': 0.5, 'm_uuv': 0.3, 'm_uuuu': 3.5},
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['kind'], 'banana')
        self.assertFalse(response.data['fallback'])
        self.assertEqual(response.data['moments'], {'m_uuu': 0.5, 'm_uuv': 0.3, 'm_uuuu': 3.5})

    def test_banana_from_ensemble(self):
        states = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]]
        response = self.client.post(self.url, {
            'mean': [0.0, 0.0], 'covariance': [[0.5, 0.0], [0.0, 0.5]], 'kind': 'banana', 'points': 40,
            'ensemble': {'weights': [0.25] * 4, 'states': states},
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertAlmostEqual(response.data['moments']['m_uuu'], 0.0, places=12)
        self.assertAlmostEqual(response.data['moments']['m_uuuu'], 2.0, places=12)

    def test_banana_needs_moments(self):
        response = self.client.post(self.url, {
            'mean': [0.0, 0.0], 'covariance': [[1.0, 0.0], [0.0, 1.0]], 'kind': 'banana',
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_degenerate_covariance(self):
        response = self.client.post(self.url, {
            'mean': [0.0, 0.0], 'covariance': [[1.0, 1.0], [1.0, 1.0]],
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)

    def test_authentication_required(self):
        self.client.force_authenticate(user=None)
        response = self.client.post(self.url, {'mean': [0.0, 0.0], 'covariance': [[1.0, 0.0], [0.0, 1.0]]},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_401_UNAUTHORIZED)


class CommandTestCase(TestCase):
    """
    Test cases for the management commands and their exit codes.
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.directory = Path(self.tmp.name)

    def call(self, *args, **options):
        stdout = io.StringIO()
        call_command(*args, stdout=stdout, **options)
        return stdout.getvalue()

    def test_create_demo_scenarios(self):
        out_dir = self.directory / 'scenarios'
        self.call('create_demo_scenarios', out_dir=str(out_dir))
        names = sorted(path.name for path in out_dir.glob('*.json'))
        self.assertEqual(len(names), 8)
        self.assertIn('halo-apolune.json', names)
        config = ScenarioConfig.load(out_dir / 'aerocapture-case-4.json')
        self.assertEqual(config.mc['samples'], 4000)

    def test_run_study(self):
        scenario = write_scenario(self.directory, fast_scenario())
        out_dir = self.directory / 'out'
        output = self.call('run_study', scenario, out_dir=str(out_dir), seed=3, moments=True)
        self.assertIn("Study 'fast-aerocapture' finished", output)
        self.assertIn('CUT4 banana: coverage', output)
        for name in ('timings.csv', 'errors.csv', 'coverage.csv', 'moments.csv', 'summary.csv',
                     'contour_cut4_banana.csv', 'moments_mc.json', 'moments_cut4.json'):
            self.assertTrue((out_dir / name).exists(), name)
        self.assertFalse((out_dir / 'moments_lincov.json').exists())
        self.assertEqual(StudyRun.objects.count(), 0)

    def test_run_study_persist(self):
        User.objects.create_user(username='analyst', password='testpass123')
        scenario = write_scenario(self.directory, fast_scenario())
        self.call('run_study', scenario, out_dir=str(self.directory / 'out'), format='text', persist='analyst')
        run = StudyRun.objects.get()
        self.assertEqual(run.status, 'completed')
        self.assertEqual(run.owner.username, 'analyst')
        self.assertTrue((self.directory / 'out' / 'report.txt').exists())

    def test_exit_codes(self):
        invalid = write_scenario(self.directory, {'name': 'broken'}, 'invalid.json')
        failing = write_scenario(self.directory, failing_scenario(), 'failing.json')
        cases = [
            (invalid, 2),
            (failing, 3),
            (str(self.directory / 'missing.json'), 4),
        ]
        for scenario, code in cases:
            with self.subTest(scenario=Path(scenario).name):
                with self.assertRaises(CommandError) as context:
                    self.call('run_study', scenario, out_dir=str(self.directory / 'out'))
                self.assertEqual(context.exception.returncode, code)

    def test_failed_run_persisted(self):
        User.objects.create_user(username='analyst', password='testpass123')
        failing = write_scenario(self.directory, failing_scenario())
        with self.assertRaises(CommandError):
            self.call('run_study', failing, out_dir=str(self.directory / 'out'), persist='analyst')
        run = StudyRun.objects.get()
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.error_stage, 'method MC')

    def test_build_map(self):
        scenario = write_scenario(self.directory, fast_scenario())
        target = self.directory / 'fast.map'
        output = self.call('build_map', scenario, order=2, output=str(target))
        self.assertIn('Built full map of order 2', output)
        flow_map = load_map(target)
        self.assertEqual(flow_map.kind, KIND_FULL)
        self.assertEqual(flow_map.order, 2)
        self.assertEqual(flow_map.dim, 4)
        self.assertEqual(flow_map.tf, 20.0)

    def test_build_contour(self):
        from uq_methods import GaussianBelief, cut4_points, sample_gaussian, weighted_central_moments

        belief = GaussianBelief(np.zeros(3), np.diag([1.0, 0.5, 0.25]))
        ensemble = cut4_points(belief)
        bent = ensemble.with_states(ensemble.states + 0.2 * ensemble.states[:, [1, 0, 2]] ** 2)
        moments_path = self.directory / 'moments.json'
        moments_path.write_text(weighted_central_moments(bent, 4).to_json(), encoding='utf-8')
        samples = sample_gaussian(belief, 500, 5, 'coverage').states
        samples = samples + 0.2 * samples[:, [1, 0, 2]] ** 2
        samples_path = self.directory / 'samples.csv'
        np.savetxt(samples_path, samples, delimiter=',')
        target = self.directory / 'banana.csv'

        output = self.call('build_contour', str(moments_path), indices=[0, 1], kind='banana', points=120,
                           samples=str(samples_path), output=str(target))
        self.assertIn('Wrote banana contour with 120 points', output)
        self.assertIn('n_samples: 500', output)
        self.assertEqual(len(target.read_text(encoding='utf-8').splitlines()), 1 + 121)

    def test_build_contour_needs_fourth_moments(self):
        from uq_methods.beliefs import CentralMomentSet

        moments_path = self.directory / 'moments.json'
        moments_path.write_text(CentralMomentSet(np.zeros(2), np.eye(2)).to_json(), encoding='utf-8')
        with self.assertRaises(CommandError) as context:
            self.call('build_contour', str(moments_path), indices=[0, 1], kind='banana',
                      output=str(self.directory / 'c.csv'))
        self.assertEqual(context.exception.returncode, 2)

    def test_bench(self):
        scenario = write_scenario(self.directory, fast_scenario())
        out_dir = self.directory / 'bench'
        output = self.call('bench', scenario, samples=20, repeats=1, out_dir=str(out_dir))
        self.assertIn('full_map_speedup', output)
        _, rows = read_report_csv(out_dir / 'timings.csv')
        self.assertEqual([row['section'] for row in rows],
                         ['construction', 'construction', 'direct', 'direct', 'mapped', 'mapped'])


@tag('slow')
class ReproductionTestCase(SimpleTestCase):
    """
    Test cases reproducing the halo error ordering, the mapped Monte Carlo
    speedup and the aerocapture coverage table.
    """

    COVERAGE = {
        1: ((0.764, 0.976, 0.958), 0.025),
        3: ((0.874, 0.980, 0.993), 0.02),
        4: ((0.884, 0.980, 0.994), 0.02),
        5: ((0.888, 0.980, 0.996), 0.02),
    }

    def test_halo_error_ordering(self):
        methods = [
            {'method': 'ut', 'propagation': 'direct'},
            {'method': 'ut', 'propagation': 'full'},
            {'method': 'ut', 'propagation': 'directional'},
            {'method': 'lincov', 'propagation': 'direct'},
        ]
        report = run_study(ScenarioConfig.from_dict(halo_scenario(methods=methods)))
        errors = {row['label']: row for row in report.error_rows()}
        for column in ('mean_error_norm', 'covariance_error'):
            with self.subTest(column=column):
                self.assertLess(errors['DA+UT'][column], errors['DDA+UT'][column])
                self.assertLess(errors['DDA+UT'][column], errors['LinCov'][column])
        # Order-3 truncation at the λ = 3 − N sigma points leaves about 5e-6 on this arc
        self.assertLess(errors['DA+UT']['mean_error_norm'], 1e-5)
        self.assertGreaterEqual(errors['LinCov']['covariance_error'], 3e-3)
        self.assertLessEqual(errors['LinCov']['covariance_error'], 3e-2)
        self.assertAlmostEqual(report.summary['halo_period'], 3.136654204, delta=1e-6)

    def test_mapped_monte_carlo_speedup(self):
        config = ScenarioConfig.from_dict(halo_scenario())
        report = run_bench(config, samples=2000, repeats=1)
        self.assertGreaterEqual(report.summary['full_map_speedup'], 10.0)
        self.assertGreater(report.summary['dda_over_full_speedup'], 1.0)
        self.assertLessEqual(report.summary['full_map_amortization'], 10000)

    def test_aerocapture_coverage(self):
        for number in DISPERSION_CASES:
            with self.subTest(case=number):
                report = run_study(ScenarioConfig.from_dict(aerocapture_scenario(number)))
                fractions = {row['label']: row['fraction'] for row in report.coverage}
                self.assertGreater(fractions['CUT4 banana'], fractions['LinCov ellipse'])
                if number in self.COVERAGE:
                    expected, tolerance = self.COVERAGE[number]
                    measured = (fractions['LinCov ellipse'], fractions['CUT4 ellipse'], fractions['CUT4 banana'])
                    assert_allclose(measured, expected, atol=tolerance)
