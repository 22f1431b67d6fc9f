"""Gaussian and banana-shaped confidence boundaries in 2D slices."""

from .geometry import (
    GAUSSIAN_MOMENTS,
    ProjectedMoments,
    SliceSpec,
    WhitenedFrame,
    projected_moments,
    projected_moments_from_map,
    projected_moments_from_scalars,
    projected_moments_from_tensors,
    whiten,
)
from .curves import (
    KIND_BANANA,
    KIND_ELLIPSE,
    ContourCurve,
    banana_contour,
    coverage,
    coverage_report,
    express_in_frame,
    format_coverage_report,
    gaussian_ellipse,
    has_self_intersection,
    principal_frame,
)
