"""
Study reports for uqflow project.

This module collects what a study run produced (per-method moments, the
construction/evaluation timing split, errors against a reference method
and contour coverage) and writes it as CSV tables or structured text.
"""

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from common.exceptions import UsageError
from common.utils import format_significant, to_builtin
from contour.curves import ContourCurve
from uq_methods.beliefs import CentralMomentSet, covariance_error

logger = logging.getLogger(__name__)

SECTION_DIRECT = 'direct'
SECTION_MAPPED = 'mapped'
SECTION_CONSTRUCTION = 'construction'

TABLE_COLUMNS = {
    'timings': ['section', 'label', 'construction_s', 'evaluation_s'],
    'errors': ['label', 'mean_error_norm', 'covariance_error'],
    'coverage': ['label', 'contour', 'k', 'n_samples', 'fraction', 'fallback', 'self_intersecting'],
    'moments': ['label', 'quantity', 'i', 'j', 'value'],
}

HARDWARE_DISCLAIMER = (
    "# wall-clock timings depend on the machine; declared evaluation threads: {threads}. "
    "Compare ratios between rows, not absolute values."
)


@dataclass(eq=False)
class MethodResult:
    """
    Moments one method produced, plus the wall time of its evaluation.

    ``moments`` holds the higher-order moment set of methods that compute
    one without an ensemble (PCE, GMM).
    """

    label: str
    method: str
    propagation: str
    mean: np.ndarray
    covariance: np.ndarray
    evaluation_s: float
    ensemble: Any = None
    details: Dict[str, Any] = field(default_factory=dict)
    moments: Optional[CentralMomentSet] = None


@dataclass
class TimingRow:
    section: str
    label: str
    construction_s: Optional[float]
    evaluation_s: Optional[float]


@dataclass(eq=False)
class StudyReport:
    """
    Everything a study run reports.

    Each configured method is added exactly once; ``errors`` compares every
    other method against ``reference_method``.
    """

    name: str
    system_kind: str
    seed: int
    threads: int
    reference_method: Optional[str] = None
    methods: List[MethodResult] = field(default_factory=list)
    timings: List[TimingRow] = field(default_factory=list)
    coverage: List[Dict[str, Any]] = field(default_factory=list)
    contours: Dict[str, ContourCurve] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add_method(self, result: MethodResult):
        if any(existing.label == result.label for existing in self.methods):
            raise UsageError(f"method '{result.label}' already reported")
        self.methods.append(result)
        section = SECTION_DIRECT if result.propagation == 'direct' else SECTION_MAPPED
        self.timings.append(TimingRow(section, result.label, None, result.evaluation_s))

    def add_construction(self, label: str, seconds: float):
        self.timings.append(TimingRow(SECTION_CONSTRUCTION, label, seconds, None))

    def add_contour(self, label: str, curve: ContourCurve, report: Optional[Dict[str, Any]] = None):
        self.contours[label] = curve
        if report is not None:
            self.coverage.append({'label': label, 'contour': curve.kind, **{
                key: report[key] for key in ('k', 'n_samples', 'fraction', 'fallback', 'self_intersecting')
            }})

    def method(self, label: str) -> MethodResult:
        for result in self.methods:
            if result.label == label:
                return result
        raise KeyError(label)

    @property
    def labels(self) -> List[str]:
        return [result.label for result in self.methods]

    def error_rows(self) -> List[Dict[str, Any]]:
        if self.reference_method is None or self.reference_method not in self.labels:
            return []
        reference = self.method(self.reference_method)
        rows = []
        for result in self.methods:
            if result.label == reference.label:
                continue
            rows.append({
                'label': result.label,
                'mean_error_norm': float(np.linalg.norm(result.mean - reference.mean)),
                'covariance_error': covariance_error(result.covariance, reference.covariance),
            })
        return rows

    def moment_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for result in self.methods:
            for i, value in enumerate(result.mean):
                rows.append({'label': result.label, 'quantity': 'mean', 'i': i, 'j': None, 'value': value})
            n = len(result.mean)
            for i in range(n):
                for j in range(i, n):
                    rows.append({'label': result.label, 'quantity': 'covariance', 'i': i, 'j': j,
                                 'value': result.covariance[i, j]})
        return rows

    def tables(self) -> Dict[str, List[Dict[str, Any]]]:
        return {
            'timings': [vars(row).copy() for row in self.timings],
            'errors': self.error_rows(),
            'coverage': [dict(row) for row in self.coverage],
            'moments': self.moment_rows(),
        }

    def to_dict(self) -> Dict[str, Any]:
        """JSON-compatible form stored on ``StudyRun.report``."""
        return to_builtin({
            'name': self.name,
            'system_kind': self.system_kind,
            'seed': self.seed,
            'threads': self.threads,
            'reference_method': self.reference_method,
            'methods': self.labels,
            'summary': self.summary,
            'tables': self.tables(),
        })


def _slug(label: str) -> str:
    return re.sub(r'[^A-Za-z0-9]+', '_', label).strip('_').lower()


def _cells(columns: List[str], row: Dict[str, Any]) -> List[str]:
    return [format_significant(row.get(column)) for column in columns]


def _write_csv_table(path: Path, columns: List[str], rows: List[Dict[str, Any]], preamble: Optional[str] = None):
    with path.open('w', newline='', encoding='utf-8') as stream:
        if preamble:
            stream.write(preamble + '\n')
        writer = csv.writer(stream)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(_cells(columns, row))


def _text_section(name: str, columns: List[str], rows: List[Dict[str, Any]]) -> List[str]:
    lines = [f"[{name}]", ' | '.join(columns)]
    lines.extend(' | '.join(_cells(columns, row)) for row in rows)
    lines.append('')
    return lines


def emit_report(report: Union[StudyReport, Dict[str, Any]], out_dir: Union[str, Path],
                fmt: str = 'csv', contours: Optional[Dict[str, ContourCurve]] = None) -> List[Path]:
    """
    Write the report tables to ``out_dir``.

    Args:
        report: StudyReport, or its ``to_dict()`` form
        out_dir: Target directory (created if missing)
        fmt: 'csv' (one file per table) or 'text' (one sectioned report.txt)
        contours: Curves to export; defaults to the report's own

    Returns:
        List of written paths

    Raises:
        UsageError: unknown format
        OSError: the directory or a file cannot be written
    """
    if fmt not in ('csv', 'text'):
        raise UsageError(f"unknown report format '{fmt}'")
    if isinstance(report, StudyReport):
        contours = report.contours if contours is None else contours
        report = report.to_dict()
    contours = contours or {}
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = report['tables']
    disclaimer = HARDWARE_DISCLAIMER.format(threads=report.get('threads'))
    written = []

    if fmt == 'csv':
        for name, columns in TABLE_COLUMNS.items():
            path = out_dir / f"{name}.csv"
            _write_csv_table(path, columns, tables.get(name, []), disclaimer if name == 'timings' else None)
            written.append(path)
        if report.get('summary'):
            path = out_dir / 'summary.csv'
            rows = [{'key': key, 'value': value} for key, value in report['summary'].items()]
            _write_csv_table(path, ['key', 'value'], rows)
            written.append(path)
    else:
        lines = [f"# study: {report['name']} ({report['system_kind']}), seed {report['seed']}", disclaimer, '']
        if report.get('summary'):
            lines.extend(_text_section('summary', ['key', 'value'],
                                       [{'key': k, 'value': v} for k, v in report['summary'].items()]))
        for name, columns in TABLE_COLUMNS.items():
            lines.extend(_text_section(name, columns, tables.get(name, [])))
        path = out_dir / 'report.txt'
        path.write_text('\n'.join(lines), encoding='utf-8')
        written.append(path)

    for label, curve in contours.items():
        path = out_dir / f"contour_{_slug(label)}.csv"
        with path.open('w', newline='', encoding='utf-8') as stream:
            curve.to_csv(stream)
        written.append(path)
    logger.info("report '%s' written to %s (%d files)", report['name'], out_dir, len(written))
    return written


def read_report_csv(path: Union[str, Path]) -> Tuple[List[str], List[Dict[str, str]]]:
    """
    Read a table written by ``emit_report``; ``#`` lines are skipped.

    Returns:
        (columns, rows) with every cell as text
    """
    with Path(path).open(newline='', encoding='utf-8') as stream:
        reader = csv.reader(line for line in stream if not line.startswith('#'))
        rows = list(reader)
    if not rows:
        return [], []
    columns = rows[0]
    return columns, [dict(zip(columns, row)) for row in rows[1:]]
