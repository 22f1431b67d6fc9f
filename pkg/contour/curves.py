"""
Confidence curves in a 2D slice and their Monte Carlo coverage.

Curves are closed polylines (first point repeated at the end) sampled at
uniform parameter values t ∈ [0, 2π).
"""

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, TextIO

import numpy as np

from common.exceptions import ContourError, UsageError
from .geometry import ProjectedMoments, WhitenedFrame, whiten

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 720
COVERAGE_CHUNK = 50_000

KIND_ELLIPSE = 'ellipse'
KIND_BANANA = 'banana'


@dataclass(frozen=True, eq=False)
class ContourCurve:
    """
    Closed polyline with its confidence scale and provenance.

    ``fallback`` marks a banana request answered with the ellipse because
    the projected fourth moment was degenerate; ``self_intersecting`` marks a
    banana whose polyline crosses itself.
    """

    points: np.ndarray
    k: float
    kind: str
    frame: Optional[WhitenedFrame] = None
    parameters: Optional[np.ndarray] = field(default=None, repr=False)
    fallback: bool = False
    self_intersecting: bool = False

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < 4:
            raise UsageError(f"a contour needs at least 3 distinct 2D points, got shape {points.shape}")
        if not np.array_equal(points[0], points[-1]):
            raise UsageError("contour polyline is not closed")
        object.__setattr__(self, 'points', points)

    def __len__(self):
        return len(self.points) - 1

    def area(self) -> float:
        """Absolute shoelace area."""
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * abs(float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1])))

    def transformed(self, points: np.ndarray) -> 'ContourCurve':
        return replace(self, points=points)

    def to_csv(self, stream: TextIO):
        """Columns t, x, y; the closing row repeats the first point at t = 2π."""
        t = self.parameters
        if t is None:
            t = np.linspace(0.0, 2.0 * math.pi, len(self.points))
        writer = csv.writer(stream)
        writer.writerow(['t', 'x', 'y'])
        for ti, (x, y) in zip(t, self.points):
            writer.writerow([repr(float(ti)), repr(float(x)), repr(float(y))])


def _parameters(n_points: int) -> np.ndarray:
    if n_points < 3:
        raise UsageError(f"a contour needs at least 3 points, got {n_points}")
    return np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)


def _close(points: np.ndarray, t: np.ndarray):
    return np.vstack([points, points[:1]]), np.append(t, 2.0 * math.pi)


def _principal_curve(frame: WhitenedFrame, u: np.ndarray, v: np.ndarray, t: np.ndarray):
    return _close(frame.from_principal(np.column_stack([u, v])), t)


def gaussian_ellipse(mu_q: Sequence[float], sigma_q: np.ndarray, k: float = 3.0,
                     n_points: int = DEFAULT_POINTS) -> ContourCurve:
    """μ + R (k√λ₁ cos t, k√λ₂ sin t)."""
    if not k > 0.0:
        raise UsageError(f"confidence scale must be positive, got {k}")
    frame = whiten(mu_q, sigma_q)
    t = _parameters(n_points)
    root = np.sqrt(frame.eigenvalues)
    points, t = _principal_curve(frame, k * root[0] * np.cos(t), k * root[1] * np.sin(t), t)
    return ContourCurve(points, k, KIND_ELLIPSE, frame, t)


def banana_contour(mu_q: Sequence[float], sigma_q: np.ndarray, moments: ProjectedMoments, k: float = 3.0,
                   n_points: int = DEFAULT_POINTS) -> ContourCurve:
    """
    Ellipse bent by α = m_uuv/(m_uuuu − 1) across the long axis and skewed
    by c(k) = (k² − 1)/6 · m_uuu along it:

        u(t) = k√λ₁ cos t + c(k)√λ₁ cos² t
        v(t) = k√λ₂ sin t + α√λ₂ (k² cos² t − 1)

    A degenerate m_uuuu returns the ellipse with ``fallback`` set.
    """
    if moments.is_degenerate:
        logger.warning("projected fourth moment %.3e is degenerate; using the Gaussian ellipse", moments.m_uuuu)
        return replace(gaussian_ellipse(mu_q, sigma_q, k, n_points), fallback=True)
    if not k > 0.0:
        raise UsageError(f"confidence scale must be positive, got {k}")
    frame = whiten(mu_q, sigma_q)
    t = _parameters(n_points)
    root = np.sqrt(frame.eigenvalues)
    cos_t = np.cos(t)
    cos_sq = cos_t * cos_t
    u = k * root[0] * cos_t + moments.skew_correction(k) * root[0] * cos_sq
    v = k * root[1] * np.sin(t) + moments.bend * root[1] * (k * k * cos_sq - 1.0)
    points, t = _principal_curve(frame, u, v, t)
    crossing = has_self_intersection(points)
    if crossing:
        logger.warning("banana contour (k=%g) self-intersects; coverage uses the even-odd rule", k)
    return ContourCurve(points, k, KIND_BANANA, frame, t, self_intersecting=crossing)


def _orientation(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def has_self_intersection(points: np.ndarray) -> bool:
    """True when two non-adjacent edges of the closed polyline cross."""
    points = np.asarray(points, dtype=float)
    start, end = points[:-1], points[1:]
    n = len(start)
    ax, ay = start[:, None, 0], start[:, None, 1]
    bx, by = end[:, None, 0], end[:, None, 1]
    cx, cy = start[None, :, 0], start[None, :, 1]
    dx, dy = end[None, :, 0], end[None, :, 1]
    d1 = _orientation(ax, ay, bx, by, cx, cy)
    d2 = _orientation(ax, ay, bx, by, dx, dy)
    d3 = _orientation(cx, cy, dx, dy, ax, ay)
    d4 = _orientation(cx, cy, dx, dy, bx, by)
    crossing = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
    i, j = np.indices((n, n))
    gap = np.abs(i - j)
    crossing &= (gap > 1) & (gap < n - 1)
    return bool(np.any(crossing))


def _inside(points: np.ndarray, samples: np.ndarray, tolerance: float) -> np.ndarray:
    px, py = samples[:, 0], samples[:, 1]
    inside = np.zeros(len(samples), dtype=bool)
    boundary = np.zeros(len(samples), dtype=bool)
    for (x1, y1), (x2, y2) in zip(points[:-1], points[1:]):
        ex, ey = x2 - x1, y2 - y1
        length_sq = ex * ex + ey * ey
        if length_sq > 0.0:
            cross = ex * (py - y1) - ey * (px - x1)
            dot = ex * (px - x1) + ey * (py - y1)
            boundary |= (np.abs(cross) <= tolerance * math.sqrt(length_sq)) & (dot >= 0.0) & (dot <= length_sq)
        else:
            boundary |= (px == x1) & (py == y1)
        straddles = (y1 > py) != (y2 > py)
        if np.any(straddles):
            with np.errstate(divide='ignore', invalid='ignore'):
                x_cross = x1 + (py - y1) * ex / ey
            inside ^= straddles & (px < x_cross)
    return inside | boundary


def coverage(curve: ContourCurve, samples: np.ndarray) -> float:
    """
    Fraction of 2D samples inside the curve by even-odd ray casting; points
    on the polyline count as inside.

    Raises:
        ContourError: the curve encloses zero area
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != 2:
        raise UsageError(f"samples must be 2D points, got shape {samples.shape}")
    if len(samples) == 0:
        raise UsageError("coverage of an empty sample set")
    span = float(np.max(np.ptp(curve.points, axis=0)))
    if curve.area() <= 1e-14 * span * span:
        raise ContourError(f"{curve.kind} contour encloses zero area")
    tolerance = 1e-12 * max(span, float(np.max(np.abs(curve.points))))
    count = 0
    for start in range(0, len(samples), COVERAGE_CHUNK):
        count += int(np.count_nonzero(_inside(curve.points, samples[start:start + COVERAGE_CHUNK], tolerance)))
    return count / len(samples)


def coverage_report(curve: ContourCurve, samples: np.ndarray) -> dict:
    samples = np.atleast_2d(samples)
    return {
        'kind': curve.kind,
        'k': float(curve.k),
        'n_samples': int(len(samples)),
        'fraction': coverage(curve, samples),
        'fallback': curve.fallback,
        'self_intersecting': curve.self_intersecting,
    }


def format_coverage_report(report: dict) -> str:
    """Structured text, one ``key: value`` line per field."""
    return '\n'.join(f"{key}: {value}" for key, value in report.items()) + '\n'


def principal_frame(mean: Sequence[float], covariance: np.ndarray) -> WhitenedFrame:
    """Principal axes of a reference slice covariance (the LinCov frame in the aerocapture study)."""
    return whiten(mean, covariance)


def express_in_frame(curve: ContourCurve, frame: WhitenedFrame) -> ContourCurve:
    """Curve points as Rᵀ(r − μ) in ``frame``; coverage is unchanged by the rigid motion."""
    return curve.transformed(frame.to_principal(curve.points))
