import math

from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from .conf import get_setting
from .exceptions import InputError
from .models import default_tolerances


class MeasureField(serializers.FloatField):
    """
    A non-negative, finite input or output quantity
    """
    default_error_messages = {
        'invalid': 'missing or non-numeric value',
        'non_finite': 'non-finite value',
        'negative': 'negative value',
    }

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not math.isfinite(value):
            self.fail('non_finite')
        if value < 0:
            self.fail('negative')
        return value


class SignificantFloatField(serializers.FloatField):
    """
    Renders floats with at most SIGNIFICANT_DIGITS significant digits, using
    the shortest representation that round-trips
    """

    def to_representation(self, value):
        digits = get_setting('SIGNIFICANT_DIGITS')
        return float(f"{float(value):.{digits}g}") + 0.0


# ============================================================================
# INPUT VALIDATION
# ============================================================================

class DmuRecordSerializer(serializers.Serializer):
    """
    Validates one CSV data row split into id, inputs and outputs
    """
    id = serializers.CharField(error_messages={'blank': 'empty DMU id'})
    inputs = serializers.ListField(child=MeasureField(), allow_empty=False)
    outputs = serializers.ListField(child=MeasureField(), allow_empty=False)

    def first_error(self):
        """Return (message, header offset) of the first failing cell; offset is None for the id."""
        errors = self.errors
        if 'id' in errors:
            return str(errors['id'][0]), None
        m = len(self.initial_data['inputs'])
        for name, base in (('inputs', 1), ('outputs', 1 + m)):
            detail = errors.get(name)
            if detail is None:
                continue
            if isinstance(detail, dict):
                index = min(detail)
                return str(detail[index][0]), base + index
            return str(detail[0]), base
        return "invalid row", None


class TolerancesSerializer(serializers.Serializer):
    """
    Tolerances of a run. Omitted fields keep their defaults.
    """
    feasibility_eps = serializers.FloatField(required=False)
    support_eps = serializers.FloatField(required=False)
    efficiency_eps = serializers.FloatField(required=False)
    objective_eps = serializers.FloatField(required=False)

    def validate(self, data):
        for name, value in data.items():
            if not 0 < value < 1:
                raise serializers.ValidationError({name: f"{name} must be > 0 and < 1"})
        return data

    def create(self, validated_data):
        return default_tolerances(**validated_data)


class BenchOptionsSerializer(serializers.Serializer):
    """
    Options of the MILP versus relaxed-LP benchmark
    """
    n = serializers.IntegerField(min_value=1, error_messages={'min_value': 'n must be ≥ 1'})
    m = serializers.IntegerField(min_value=1, error_messages={'min_value': 'm must be ≥ 1'})
    s = serializers.IntegerField(min_value=1, error_messages={'min_value': 's must be ≥ 1'})
    reps = serializers.IntegerField(min_value=1, error_messages={'min_value': 'reps must be ≥ 1'})
    seed = serializers.IntegerField(
        min_value=0, max_value=2 ** 64 - 1,
        error_messages={'min_value': 'seed must be an unsigned 64-bit integer',
                        'max_value': 'seed must be an unsigned 64-bit integer'},
    )


def validated(serializer):
    """Run ``serializer`` and turn DRF validation errors into an InputError."""
    if not serializer.is_valid():
        messages = []
        for field_name, details in serializer.errors.items():
            if isinstance(details, dict):
                details = [item for values in details.values() for item in values]
            messages.extend(str(detail) for detail in details)
        raise InputError("; ".join(messages))
    return serializer.validated_data


# ============================================================================
# REPORTS
# ============================================================================

class TolerancesReportSerializer(serializers.Serializer):
    feasibility_eps = SignificantFloatField()
    support_eps = SignificantFloatField()
    efficiency_eps = SignificantFloatField()
    objective_eps = SignificantFloatField()


class ProjectionSerializer(serializers.Serializer):
    inputs = serializers.ListField(child=SignificantFloatField())
    outputs = serializers.ListField(child=SignificantFloatField())


class UnitReportSerializer(serializers.Serializer):
    """
    Evaluation record of one DMU: score, maximal element and reference set
    """
    dmu = serializers.CharField()
    rho = SignificantFloatField()
    method = serializers.CharField()
    lambda_max = serializers.DictField(child=SignificantFloatField())
    grs = serializers.ListField(child=serializers.CharField())
    projection = ProjectionSerializer()
    timings_ms = serializers.DictField(child=SignificantFloatField())
    tolerances = TolerancesReportSerializer()


class VerifyReportSerializer(serializers.Serializer):
    """
    Cross-model verification record of one DMU
    """
    dmu = serializers.CharField()
    efficient_count = serializers.IntegerField()
    objectives = serializers.DictField(child=SignificantFloatField())
    supports = serializers.DictField(child=serializers.ListField(child=serializers.CharField()))
    checks = serializers.DictField(child=serializers.BooleanField())
    max_residual = SignificantFloatField()
    passed = serializers.BooleanField()
    tolerances = TolerancesReportSerializer()


class BenchRowSerializer(serializers.Serializer):
    """
    One benchmark replication: timings of both programs over every DMU
    """
    rep = serializers.IntegerField()
    seed = serializers.IntegerField()
    n = serializers.IntegerField()
    m = serializers.IntegerField()
    s = serializers.IntegerField()
    efficient = serializers.IntegerField()
    milp_total_ms = SignificantFloatField()
    relaxed_total_ms = SignificantFloatField()
    milp_median_ms = SignificantFloatField()
    relaxed_median_ms = SignificantFloatField()
    agreement = serializers.BooleanField()


def render_json(data):
    """Render report data as indented UTF-8 JSON with a trailing newline."""
    return JSONRenderer().render(data, renderer_context={'indent': 2}) + b'\n'
