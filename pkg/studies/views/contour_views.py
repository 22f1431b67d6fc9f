"""
Contour views for uqflow project.

This module contains the view that turns slice moments into a confidence
boundary and, optionally, measures its coverage of posted samples.
"""

import numpy as np
from rest_framework import status
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response
from rest_framework.views import APIView
from drf_yasg.utils import swagger_auto_schema
from drf_yasg import openapi

from ..serializers import ContourRequestSerializer
from common.exceptions import UqflowError
from common.utils import to_builtin
from contour.curves import KIND_BANANA, banana_contour, coverage_report, gaussian_ellipse
from contour.geometry import ProjectedMoments, projected_moments, whiten
from uq_methods.beliefs import KIND_SIGMA, WeightedEnsemble

POINT_SCHEMA = openapi.Schema(type=openapi.TYPE_ARRAY, items=openapi.Schema(type=openapi.TYPE_NUMBER))


class ContourView(APIView):
    """
    POST /contours/ builds an ellipse or banana contour in a 2D slice.
    """
    permission_classes = [IsAuthenticated]

    @swagger_auto_schema(
        operation_description="""
        Build a k-sigma confidence boundary from slice moments.
        'ellipse' needs only mean and covariance. 'banana' additionally needs either
        'moments' (m_uuu, m_uuv, m_uuuu in the whitened frame) or an 'ensemble' of weighted
        2D points whose projected moments are computed here.
        When 'samples' is given the response carries their coverage by the curve.
        """,
        request_body=openapi.Schema(
            type=openapi.TYPE_OBJECT,
            required=['mean', 'covariance'],
            properties={
                'mean': POINT_SCHEMA,
                'covariance': openapi.Schema(type=openapi.TYPE_ARRAY, items=POINT_SCHEMA),
                'kind': openapi.Schema(type=openapi.TYPE_STRING, enum=['ellipse', 'banana']),
                'k': openapi.Schema(type=openapi.TYPE_NUMBER),
                'points': openapi.Schema(type=openapi.TYPE_INTEGER),
                'moments': openapi.Schema(
                    type=openapi.TYPE_OBJECT,
                    properties={
                        'm_uuu': openapi.Schema(type=openapi.TYPE_NUMBER),
                        'm_uuv': openapi.Schema(type=openapi.TYPE_NUMBER),
                        'm_uuuu': openapi.Schema(type=openapi.TYPE_NUMBER),
                    }
                ),
                'ensemble': openapi.Schema(
                    type=openapi.TYPE_OBJECT,
                    properties={
                        'weights': POINT_SCHEMA,
                        'states': openapi.Schema(type=openapi.TYPE_ARRAY, items=POINT_SCHEMA),
                    }
                ),
                'samples': openapi.Schema(type=openapi.TYPE_ARRAY, items=POINT_SCHEMA),
            }
        ),
        responses={
            200: openapi.Response(description="Closed polyline and flags"),
            400: openapi.Response(description="Invalid request"),
            422: openapi.Response(description="Degenerate covariance or contour"),
        }
    )
    def post(self, request):
        serializer = ContourRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
        data = serializer.validated_data
        mean = np.array(data['mean'], dtype=float)
        covariance = np.array(data['covariance'], dtype=float)
        try:
            moments = None
            if data['kind'] == KIND_BANANA:
                if 'moments' in data:
                    moments = ProjectedMoments(**data['moments'])
                else:
                    ensemble = WeightedEnsemble(data['ensemble']['weights'], data['ensemble']['states'], KIND_SIGMA)
                    moments = projected_moments(ensemble, whiten(mean, covariance))
                curve = banana_contour(mean, covariance, moments, data['k'], data['points'])
            else:
                curve = gaussian_ellipse(mean, covariance, data['k'], data['points'])
            coverage = coverage_report(curve, np.array(data['samples'])) if data.get('samples') else None
        except UqflowError as exc:
            return Response({'message': 'Contour failed', 'error': str(exc)},
                            status=status.HTTP_422_UNPROCESSABLE_ENTITY)

        return Response(to_builtin({
            'kind': curve.kind,
            'k': curve.k,
            'fallback': curve.fallback,
            'self_intersecting': curve.self_intersecting,
            'area': curve.area(),
            'moments': moments.as_dict() if moments is not None else None,
            'points': curve.points,
            'coverage': coverage,
        }), status=status.HTTP_200_OK)
