import math

from rest_framework import serializers

from .bench import SCHEMA_VERSION
from .models import SolveLog, SolveRun
from .solvers import Method


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class FiniteFloatField(serializers.FloatField):
    """Float output with inf/nan mapped to null (strict JSON)."""

    def to_representation(self, value):
        return _finite(super().to_representation(value))


class BoxField(serializers.Field):
    def to_representation(self, box):
        return [[_finite(c.lo), _finite(c.hi)] for c in box]


class SolverConfigSerializer(serializers.Serializer):
    method = serializers.CharField(source='method.value')
    epsilon = serializers.FloatField()
    m = serializers.IntegerField(allow_null=True)
    n_it = serializers.IntegerField(allow_null=True)
    max_boxes = serializers.IntegerField()
    seed = serializers.IntegerField()
    tolerance = serializers.FloatField()
    setting = serializers.CharField(source='setting_label')


class RunReportSerializer(serializers.Serializer):
    """
    Nested JSON form of a RunReport.

    Retained boxes are only emitted when the context sets ``include_boxes``.
    """
    method = serializers.CharField(source='method.value')
    model = serializers.CharField()
    n = serializers.IntegerField()
    config = SolverConfigSerializer()
    N_proc = serializers.IntegerField()
    N_keep = serializers.IntegerField()
    avg_iter = FiniteFloatField()
    budget_exceeded = serializers.BooleanField()
    peak_worklist = serializers.IntegerField()
    peak_retained = serializers.IntegerField()
    counters = serializers.SerializerMethodField()
    wall_time_s = FiniteFloatField()
    boxes = serializers.ListField(child=BoxField(), source='retained')

    def get_counters(self, report):
        return report.counters.as_dict()

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if not self.context.get('include_boxes'):
            data.pop('boxes')
        return data


class RunDocumentSerializer(RunReportSerializer):
    """A single run as a standalone, schema-versioned document."""
    schema_version = serializers.SerializerMethodField()

    def get_schema_version(self, report):
        return SCHEMA_VERSION


class PublishedCountsSerializer(serializers.Serializer):
    N_proc = serializers.IntegerField()
    N_keep = serializers.IntegerField()
    avg_iter = serializers.FloatField(allow_null=True)
    time_s = serializers.FloatField(allow_null=True)


class CellResultSerializer(serializers.Serializer):
    suite = serializers.CharField(source='cell.suite')
    cell = serializers.CharField(source='cell.label')
    method = serializers.CharField(source='cell.method.value')
    model = serializers.CharField(source='cell.model')
    n = serializers.IntegerField(source='cell.n')
    setting = serializers.CharField(source='cell.setting_label')
    status = serializers.CharField()
    error = serializers.CharField(allow_null=True)
    predicted_ops = FiniteFloatField(allow_null=True)
    measured_over_predicted = FiniteFloatField(allow_null=True)
    N_proc_over_published = FiniteFloatField(allow_null=True)
    N_keep_over_published = FiniteFloatField(allow_null=True)
    avg_iter_over_published = FiniteFloatField(allow_null=True)
    published = PublishedCountsSerializer(source='cell.published', allow_null=True)
    report = RunReportSerializer(allow_null=True)


class SuiteResultSerializer(serializers.Serializer):
    schema_version = serializers.SerializerMethodField()
    suite = serializers.CharField(source='suite.name')
    description = serializers.CharField(source='suite.description')
    repetitions = serializers.IntegerField(source='suite.repetitions')
    budget_exceeded = serializers.BooleanField()
    failed = serializers.BooleanField()
    results = CellResultSerializer(many=True)

    def get_schema_version(self, suite_result):
        return SCHEMA_VERSION


class BenchJobSerializer(serializers.Serializer):
    """
    Validates a bench cell popped from the Redis queue
    """
    run_id = serializers.UUIDField()
    suite = serializers.CharField(max_length=50)
    label = serializers.CharField(max_length=100)
    model = serializers.CharField(max_length=100)
    n = serializers.IntegerField(min_value=1)
    method = serializers.ChoiceField(choices=[m.value for m in Method])
    domain = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2,
                                   allow_null=True, required=False, default=None)
    epsilon = serializers.FloatField(min_value=0.0)
    m = serializers.IntegerField(min_value=1, allow_null=True, required=False, default=None)
    n_it = serializers.IntegerField(min_value=1, allow_null=True, required=False, default=None)
    max_boxes = serializers.IntegerField(min_value=1, allow_null=True, required=False, default=None)
    seed = serializers.IntegerField(required=False, default=0)

    def validate_epsilon(self, value):
        if value <= 0.0:
            raise serializers.ValidationError('epsilon must be positive')
        return value


class SolveLogSerializer(serializers.ModelSerializer):
    class Meta:
        model = SolveLog
        fields = ['id', 'level', 'message', 'timestamp']


class SolveRunSerializer(serializers.ModelSerializer):
    logs = SolveLogSerializer(many=True, read_only=True)

    class Meta:
        model = SolveRun
        fields = [
            'id',
            'source',
            'suite',
            'cell',
            'model_name',
            'n',
            'method',
            'config',
            'status',
            'N_proc',
            'N_keep',
            'avg_iter',
            'counters',
            'peak_worklist',
            'peak_retained',
            'wall_time_s',
            'error_message',
            'created_at',
            'started_at',
            'completed_at',
            'updated_at',
            'logs',
        ]
        read_only_fields = ['id', 'created_at', 'updated_at']
