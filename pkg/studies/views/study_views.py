"""
Study views for uqflow project.

This module contains views for submitting scenarios, listing stored runs
and reading the tables of a stored report.
"""

import logging

from rest_framework import status
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response
from rest_framework.views import APIView
from django.shortcuts import get_object_or_404
from drf_yasg.utils import swagger_auto_schema
from drf_yasg import openapi

from ..config import ScenarioConfig
from ..models import StudyRun
from ..reporting import TABLE_COLUMNS
from ..runners import run_study
from ..serializers import StudyRequestSerializer, StudyRunListSerializer, StudyRunSerializer
from common.exceptions import ConfigError, StageError, UqflowError
from common.permissions import IsRunOwner

logger = logging.getLogger(__name__)


class StudyListCreateView(APIView):
    """
    GET /studies/ lists the caller's runs; POST /studies/ runs a scenario.
    """
    permission_classes = [IsAuthenticated]

    @swagger_auto_schema(
        operation_description="List the authenticated user's study runs, newest first",
        manual_parameters=[
            openapi.Parameter('status', openapi.IN_QUERY, description="Filter by status", type=openapi.TYPE_STRING),
            openapi.Parameter('system', openapi.IN_QUERY, description="Filter by system kind", type=openapi.TYPE_STRING),
        ],
        responses={
            200: openapi.Response(description="Study runs", schema=StudyRunListSerializer(many=True)),
            401: openapi.Response(description="Authentication required"),
        }
    )
    def get(self, request):
        runs = StudyRun.objects.filter(owner=request.user)
        run_status = request.query_params.get('status')
        system_kind = request.query_params.get('system')
        if run_status:
            runs = runs.filter(status=run_status)
        if system_kind:
            runs = runs.filter(system_kind=system_kind)
        serializer = StudyRunListSerializer(runs, many=True)
        return Response({'count': runs.count(), 'results': serializer.data}, status=status.HTTP_200_OK)

    @swagger_auto_schema(
        operation_description="""
        Validate a scenario, run it synchronously and store the run.
        The optional 'seed' and 'samples' fields override the scenario's seed and Monte Carlo sample count.
        A scenario that fails validation is not stored; a run that fails numerically is stored as 'failed'.
        """,
        request_body=openapi.Schema(
            type=openapi.TYPE_OBJECT,
            required=['scenario'],
            properties={
                'scenario': openapi.Schema(type=openapi.TYPE_OBJECT, description="Scenario document"),
                'seed': openapi.Schema(type=openapi.TYPE_INTEGER),
                'samples': openapi.Schema(type=openapi.TYPE_INTEGER),
            }
        ),
        responses={
            201: openapi.Response(description="Study completed", schema=StudyRunSerializer),
            400: openapi.Response(description="Invalid scenario"),
            422: openapi.Response(description="Numerical failure; the body names the failing stage"),
        }
    )
    def post(self, request):
        serializer = StudyRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
        data = serializer.validated_data
        try:
            config = ScenarioConfig.from_dict(data['scenario'])
            if 'seed' in data or 'samples' in data:
                config = config.with_overrides(seed=data.get('seed'), samples=data.get('samples'))
        except ConfigError as exc:
            return Response({'scenario': exc.errors or str(exc)}, status=status.HTTP_400_BAD_REQUEST)

        run = StudyRun.objects.create(
            owner=request.user,
            name=config.name,
            system_kind=config.system_kind,
            scenario=config.to_dict(),
        )
        try:
            report = run_study(config)
        except UqflowError as exc:
            stage = exc.stage if isinstance(exc, StageError) else ''
            run.mark_failed(str(exc), stage)
            logger.warning("study run %s failed: %s", run.pk, exc)
            return Response({
                'message': 'Study failed',
                'id': run.pk,
                'stage': stage,
                'error': str(exc),
            }, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

        run.mark_completed(report.to_dict())
        return Response(StudyRunSerializer(run).data, status=status.HTTP_201_CREATED)


class StudyDetailView(APIView):
    """
    GET /studies/<id>/ returns one stored run with its scenario and report.
    """
    permission_classes = [IsRunOwner]

    @swagger_auto_schema(
        operation_description="Get a stored study run",
        responses={
            200: openapi.Response(description="Study run", schema=StudyRunSerializer),
            403: openapi.Response(description="Not the owner of this run"),
            404: openapi.Response(description="Run not found"),
        }
    )
    def get(self, request, pk):
        run = get_object_or_404(StudyRun, pk=pk)
        self.check_object_permissions(request, run)
        return Response(StudyRunSerializer(run).data, status=status.HTTP_200_OK)

    @swagger_auto_schema(
        operation_description="Delete a stored study run",
        responses={204: openapi.Response(description="Deleted"), 403: openapi.Response(description="Forbidden")}
    )
    def delete(self, request, pk):
        run = get_object_or_404(StudyRun, pk=pk)
        self.check_object_permissions(request, run)
        run.delete()
        return Response(status=status.HTTP_204_NO_CONTENT)


class StudyTableView(APIView):
    """
    GET /studies/<id>/<table>/ returns one table of a completed run.
    """
    permission_classes = [IsRunOwner]
    table = None

    def get(self, request, pk):
        run = get_object_or_404(StudyRun, pk=pk)
        self.check_object_permissions(request, run)
        if run.status != 'completed' or not run.report:
            return Response({
                'message': f"Run is {run.status}; no report available",
                'error': run.error_message,
            }, status=status.HTTP_409_CONFLICT)
        return Response({
            'id': run.pk,
            'table': self.table,
            'columns': TABLE_COLUMNS[self.table],
            'rows': run.report['tables'].get(self.table, []),
        }, status=status.HTTP_200_OK)


class StudyErrorsView(StudyTableView):
    """Mean-error norm and covariance error of every method against the reference method."""
    table = 'errors'

    @swagger_auto_schema(operation_description="Errors against the scenario's reference method")
    def get(self, request, pk):
        return super().get(request, pk)


class StudyTimingsView(StudyTableView):
    """Direct, mapped and construction timings."""
    table = 'timings'

    @swagger_auto_schema(operation_description="Construction and evaluation timings")
    def get(self, request, pk):
        return super().get(request, pk)


class StudyCoverageView(StudyTableView):
    """Monte Carlo coverage of every contour."""
    table = 'coverage'

    @swagger_auto_schema(operation_description="Monte Carlo coverage per contour")
    def get(self, request, pk):
        return super().get(request, pk)
