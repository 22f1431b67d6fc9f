"""
Study serializers for uqflow project.

This module validates scenario documents and shapes study-run payloads.
Every block of a scenario rejects keys it does not declare, and every
optional value is filled in, so a validated scenario dumps back to a
document that validates to the same value.
"""

from django.conf import settings
from rest_framework import serializers

from dynamics.halo import APOLUNE_OFFSET
from dynamics.systems import EARTH_MOON_MU, EARTH_MU, EARTH_RADIUS
from .models import StudyRun

SYSTEM_PARAMETERS = {
    'cr3bp': {'mu': EARTH_MOON_MU},
    'aerocapture': {
        'mu_body': EARTH_MU,
        'body_radius': EARTH_RADIUS,
        'rho_E': 5.0e-7,
        'h_E': 100.0,
        'H': 7.2,
        'beta': 500.0,
    },
}

REFERENCE_PARAMETERS = {
    'halo': {
        'period': 3.136654204,
        'jacobi_constant': 3.0612627924,
        'family': 'southern',
        'apolune_offset': APOLUNE_OFFSET,
        'seed_amplitude': 0.02,
    },
    'aerocapture': {
        'v_inf': 2.5,
        'efpa': -4.85,
        't_pre': 208.0,
    },
}

REFERENCE_SYSTEM = {'halo': 'cr3bp', 'aerocapture': 'aerocapture'}
STATE_DIM = {'cr3bp': 6, 'aerocapture': 4}

BELIEF_PARAMETERS = {
    'directional_inflation': {
        'mean_deviation': [0.0, 1e-4, 0.0, 0.0, 1e-4, 0.0],
        'base_variance': 1e-6,
        'direction_variance': 1e-5,
    },
    'radial_transverse': {
        'sigmas': [15.0, 400.0, 0.015, 0.3],
    },
    'explicit': {
        'mean': None,
        'covariance': None,
    },
}

METHOD_CHOICES = ['mc', 'lincov', 'ut', 'cut4', 'pce', 'gmm']
PROPAGATION_CHOICES = ['direct', 'full', 'directional']

METHOD_NAMES = {
    'mc': 'MC',
    'lincov': 'LinCov',
    'ut': 'UT',
    'cut4': 'CUT4',
    'pce': 'PCE',
    'gmm': 'GMM',
}
PROPAGATION_PREFIXES = {'direct': '', 'full': 'DA+', 'directional': 'DDA+'}


def method_label(method: str, propagation: str) -> str:
    """Display label, e.g. ``UT``, ``DA+UT``, ``DDA+MC``."""
    return f"{PROPAGATION_PREFIXES[propagation]}{METHOD_NAMES[method]}"


class StrictSerializer(serializers.Serializer):
    """
    Serializer that rejects undeclared keys.

    ``blocks`` names nested serializers that are filled with their own
    defaults when the key is missing.
    """

    blocks = ()

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
            data = {**{block: {} for block in self.blocks}, **data}
        return super().to_internal_value(data)


class KindParameterSerializer(StrictSerializer):
    """
    Block whose allowed parameters depend on ``kind``; missing parameters
    take the per-kind defaults of ``parameters``.
    """

    parameters = {}

    def validate(self, attrs):
        kind = attrs['kind']
        allowed = self.parameters[kind]
        foreign = sorted(set(attrs) - {'kind'} - set(allowed))
        if foreign:
            raise serializers.ValidationError({key: [f"Not a parameter of kind '{kind}'."] for key in foreign})
        resolved = {'kind': kind}
        for name, default in allowed.items():
            value = attrs.get(name, default)
            if value is None:
                raise serializers.ValidationError({name: [f"Required for kind '{kind}'."]})
            resolved[name] = value
        return resolved


class SystemSerializer(KindParameterSerializer):
    parameters = SYSTEM_PARAMETERS

    kind = serializers.ChoiceField(choices=list(SYSTEM_PARAMETERS))
    mu = serializers.FloatField(required=False, min_value=0.0, max_value=0.5)
    mu_body = serializers.FloatField(required=False, min_value=0.0)
    body_radius = serializers.FloatField(required=False, min_value=0.0)
    rho_E = serializers.FloatField(required=False, min_value=0.0)
    h_E = serializers.FloatField(required=False, min_value=0.0)
    H = serializers.FloatField(required=False, min_value=0.0)
    beta = serializers.FloatField(required=False, min_value=0.0)


class ReferenceSerializer(KindParameterSerializer):
    parameters = REFERENCE_PARAMETERS

    kind = serializers.ChoiceField(choices=list(REFERENCE_PARAMETERS))
    period = serializers.FloatField(required=False, min_value=0.0)
    jacobi_constant = serializers.FloatField(required=False)
    family = serializers.ChoiceField(choices=['southern', 'northern'], required=False)
    apolune_offset = serializers.FloatField(required=False)
    seed_amplitude = serializers.FloatField(required=False, min_value=0.0)
    v_inf = serializers.FloatField(required=False)
    efpa = serializers.FloatField(required=False)
    t_pre = serializers.FloatField(required=False, min_value=0.0)


class BeliefSerializer(KindParameterSerializer):
    parameters = BELIEF_PARAMETERS

    kind = serializers.ChoiceField(choices=list(BELIEF_PARAMETERS))
    mean_deviation = serializers.ListField(child=serializers.FloatField(), required=False, min_length=1)
    base_variance = serializers.FloatField(required=False, min_value=0.0)
    direction_variance = serializers.FloatField(required=False, min_value=0.0)
    sigmas = serializers.ListField(child=serializers.FloatField(min_value=0.0), required=False,
                                   min_length=4, max_length=4)
    mean = serializers.ListField(child=serializers.FloatField(), required=False, min_length=1)
    covariance = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()),
                                       required=False, min_length=1)


class IntegratorSerializer(StrictSerializer):
    rtol = serializers.FloatField(min_value=0.0, default=lambda: settings.UQFLOW['SCALAR_RTOL'])
    atol = serializers.FloatField(min_value=0.0, default=lambda: settings.UQFLOW['SCALAR_ATOL'])
    method = serializers.ChoiceField(choices=['DOP853', 'RK45', 'RK4'],
                                     default=lambda: settings.UQFLOW['SCALAR_METHOD'])
    poly_step = serializers.FloatField(min_value=0.0, allow_null=True, default=None)
    poly_steps_per_unit = serializers.FloatField(min_value=0.0, allow_null=True, default=None)


class MapsSerializer(StrictSerializer):
    order = serializers.IntegerField(min_value=1, max_value=10, default=3)


class MethodSerializer(StrictSerializer):
    method = serializers.ChoiceField(choices=METHOD_CHOICES)
    propagation = serializers.ChoiceField(choices=PROPAGATION_CHOICES, default='direct')


class McSerializer(StrictSerializer):
    samples = serializers.IntegerField(min_value=2, default=lambda: settings.UQFLOW['MC_SAMPLES'])


class UtSerializer(StrictSerializer):
    lambda_param = serializers.FloatField(allow_null=True, default=None)


class PceSerializer(StrictSerializer):
    degree = serializers.IntegerField(min_value=1, max_value=10, default=3)
    oversample = serializers.FloatField(min_value=1.0, default=2.0)
    moment_order = serializers.ChoiceField(choices=[2, 3, 4], default=2)


class GmmSerializer(StrictSerializer):
    depth = serializers.IntegerField(min_value=0, max_value=10, default=4)
    delta = serializers.FloatField(default=0.5)
    component_method = serializers.ChoiceField(choices=['ut', 'lincov'], default='ut')


class ContourSerializer(StrictSerializer):
    indices = serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=2, max_length=2,
                                    default=lambda: [0, 1])
    k = serializers.FloatField(min_value=0.0, default=3.0)
    points = serializers.IntegerField(min_value=3, default=lambda: settings.UQFLOW['CONTOUR_POINTS'])


class OutputSerializer(StrictSerializer):
    directory = serializers.CharField(default=lambda: settings.UQFLOW['OUTPUT_DIR'])
    format = serializers.ChoiceField(choices=['csv', 'text'], default='csv')


class ScenarioSerializer(StrictSerializer):
    """
    A complete study scenario (see docs/SCENARIOS.md).
    """

    blocks = ('integrator', 'maps', 'mc', 'ut', 'pce', 'gmm', 'output')

    name = serializers.CharField(max_length=200)
    seed = serializers.IntegerField(min_value=0, default=lambda: settings.UQFLOW['DEFAULT_SEED'])
    system = SystemSerializer()
    reference = ReferenceSerializer()
    horizon = serializers.FloatField(min_value=0.0)
    belief = BeliefSerializer()
    integrator = IntegratorSerializer()
    maps = MapsSerializer()
    methods = MethodSerializer(many=True, allow_empty=True)
    reference_method = serializers.CharField(allow_null=True, default=None)
    mc = McSerializer()
    ut = UtSerializer()
    pce = PceSerializer()
    gmm = GmmSerializer()
    contour = ContourSerializer(allow_null=True, default=None)
    batch_size = serializers.IntegerField(min_value=1, default=lambda: settings.UQFLOW['BATCH_SIZE'])
    threads = serializers.IntegerField(min_value=1, default=lambda: settings.UQFLOW['THREADS'])
    output = OutputSerializer()

    def validate_horizon(self, value):
        if value <= 0.0:
            raise serializers.ValidationError("Horizon must be positive.")
        return value

    def validate(self, attrs):
        system_kind = attrs['system']['kind']
        reference_kind = attrs['reference']['kind']
        if REFERENCE_SYSTEM[reference_kind] != system_kind:
            raise serializers.ValidationError(
                {'reference': [f"Reference '{reference_kind}' does not apply to a {system_kind} system."]}
            )
        dim = STATE_DIM[system_kind]
        belief = attrs['belief']
        if belief['kind'] == 'directional_inflation':
            if system_kind != 'cr3bp' or len(belief['mean_deviation']) != dim:
                raise serializers.ValidationError(
                    {'belief': [f"Directional inflation needs a cr3bp system and {dim} mean components."]}
                )
        elif belief['kind'] == 'radial_transverse':
            if system_kind != 'aerocapture':
                raise serializers.ValidationError({'belief': ["Radial/transverse sigmas need an aerocapture system."]})
        else:
            covariance = belief['covariance']
            if len(belief['mean']) != dim or len(covariance) != dim or any(len(row) != dim for row in covariance):
                raise serializers.ValidationError({'belief': [f"Explicit mean and covariance must have dimension {dim}."]})

        delta = attrs['gmm']['delta']
        if not 0.0 < delta < 1.0:
            raise serializers.ValidationError({'gmm': {'delta': ["Split parameter must lie in (0, 1)."]}})

        labels = [method_label(m['method'], m['propagation']) for m in attrs['methods']]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise serializers.ValidationError({'methods': [f"Duplicate methods: {', '.join(duplicates)}."]})
        reference_method = attrs.get('reference_method')
        if reference_method is not None and reference_method not in labels:
            raise serializers.ValidationError(
                {'reference_method': [f"'{reference_method}' is not one of the configured methods."]}
            )
        contour = attrs.get('contour')
        if contour is not None:
            i, j = contour['indices']
            if i == j or max(i, j) >= dim:
                raise serializers.ValidationError({'contour': {'indices': [f"Need two distinct indices below {dim}."]}})
        return attrs


class StudyRunSerializer(serializers.ModelSerializer):
    """
    Serializer for stored study runs.
    """
    owner = serializers.StringRelatedField()

    class Meta:
        model = StudyRun
        fields = [
            'id', 'owner', 'name', 'system_kind', 'status', 'scenario', 'report',
            'error_message', 'error_stage', 'created_at', 'completed_at',
        ]
        read_only_fields = fields


class StudyRunListSerializer(serializers.ModelSerializer):
    """
    Compact serializer for run listings.
    """

    class Meta:
        model = StudyRun
        fields = ['id', 'name', 'system_kind', 'status', 'created_at', 'completed_at']
        read_only_fields = fields


class StudyRequestSerializer(StrictSerializer):
    """
    Body of ``POST /api/v1/studies/``: a scenario plus optional overrides.
    """
    scenario = serializers.JSONField()
    seed = serializers.IntegerField(min_value=0, required=False)
    samples = serializers.IntegerField(min_value=2, required=False)


class ProjectedMomentsSerializer(StrictSerializer):
    m_uuu = serializers.FloatField()
    m_uuv = serializers.FloatField()
    m_uuuu = serializers.FloatField()


class EnsembleSerializer(StrictSerializer):
    weights = serializers.ListField(child=serializers.FloatField(), min_length=1)
    states = serializers.ListField(child=serializers.ListField(child=serializers.FloatField(), min_length=2,
                                                               max_length=2), min_length=1)

    def validate(self, attrs):
        if len(attrs['weights']) != len(attrs['states']):
            raise serializers.ValidationError("Weights and states differ in length.")
        return attrs


class ContourRequestSerializer(StrictSerializer):
    """
    Body of ``POST /api/v1/contours/``.

    A banana needs either projected moments or a slice ensemble to project.
    """
    mean = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)
    covariance = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
        min_length=2, max_length=2,
    )
    kind = serializers.ChoiceField(choices=['ellipse', 'banana'], default='ellipse')
    k = serializers.FloatField(min_value=0.0, default=3.0)
    points = serializers.IntegerField(min_value=3, max_value=100000,
                                      default=lambda: settings.UQFLOW['CONTOUR_POINTS'])
    moments = ProjectedMomentsSerializer(required=False)
    ensemble = EnsembleSerializer(required=False)
    samples = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
        required=False,
    )

    def validate(self, attrs):
        if attrs['kind'] == 'banana' and 'moments' not in attrs and 'ensemble' not in attrs:
            raise serializers.ValidationError("A banana contour needs 'moments' or 'ensemble'.")
        return attrs
