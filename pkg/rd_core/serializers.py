from rest_framework import serializers

# builtin names only, file paths stay a command-line feature
BUILTIN_SOURCE = r'^(bern:[0-9.eE+-]+|uniform:[0-9]+)$'
BUILTIN_DIST = r'^hamming$'


class RdPointSerializer(serializers.Serializer):
    distortion = serializers.FloatField()
    rate = serializers.FloatField()
    slope = serializers.FloatField()
    q_star = serializers.ListField(child=serializers.FloatField())


class RdQuerySerializer(serializers.Serializer):
    # query string for the read-only endpoints
    source = serializers.RegexField(BUILTIN_SOURCE, default='bern:0.4',
                                    error_messages={'invalid': "source must be bern:p or uniform:k"})
    dist = serializers.RegexField(BUILTIN_DIST, default='hamming',
                                  error_messages={'invalid': "dist must be hamming"})
    D = serializers.FloatField(required=False)
    points = serializers.IntegerField(default=50, min_value=1, max_value=1000)
