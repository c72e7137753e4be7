from rest_framework import serializers

from .models import RunRecord

# CSV column order; frozen so old result files stay comparable
CSV_FIELDS = [
    'scenario', 'codec', 'ell', 'd_target', 'd_achieved_mean', 'd_achieved_std', 'rate_mean', 'rate_std',
    'memory_symbols', 'memory_bytes', 'encode_wall_time', 'decode_wall_time', 'seeds', 'excess_fraction',
]
TIMING_FIELDS = ('encode_wall_time', 'decode_wall_time')


class RunRecordSerializer(serializers.ModelSerializer):

    class Meta:
        model = RunRecord
        fields = CSV_FIELDS


class RunRecordListSerializer(serializers.ModelSerializer):
    created = serializers.DateTimeField(format="%Y-%m-%d %H:%M:%S", read_only=True)
    memory_mb = serializers.FloatField(read_only=True)

    class Meta:
        model = RunRecord
        fields = ['id'] + CSV_FIELDS + ['memory_mb', 'created']
