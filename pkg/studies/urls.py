"""
Study URL configuration for uqflow project.

This module contains URL patterns for study runs and contours.
"""

from django.urls import path
from .views.study_views import (
    StudyListCreateView,
    StudyDetailView,
    StudyErrorsView,
    StudyTimingsView,
    StudyCoverageView,
)
from .views.contour_views import ContourView

urlpatterns = [
    path('studies/', StudyListCreateView.as_view(), name='study-list'),
    path('studies/<int:pk>/', StudyDetailView.as_view(), name='study-detail'),
    path('studies/<int:pk>/errors/', StudyErrorsView.as_view(), name='study-errors'),
    path('studies/<int:pk>/timings/', StudyTimingsView.as_view(), name='study-timings'),
    path('studies/<int:pk>/coverage/', StudyCoverageView.as_view(), name='study-coverage'),
    path('contours/', ContourView.as_view(), name='contour'),
]
