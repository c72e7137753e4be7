import logging

from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from .models import RunRecord, CODEC_CHOICES
from .serializers import RunRecordListSerializer

logger = logging.getLogger(__name__)


@api_view(['GET'])
def get_runs_list(request, **kwargs):
    """
    API endpoint that returns the saved benchmark runs, optionally for one codec and/or one
    scenario (?scenario=table1).
    """
    runs = RunRecord.objects.all()

    if 'codec' in kwargs:
        codec = kwargs['codec'].lower()
        if codec not in dict(CODEC_CHOICES):
            return Response({'error': f"unknown codec '{codec}'"}, status=status.HTTP_404_NOT_FOUND)
        runs = runs.filter(codec=codec)

    scenario = request.query_params.get('scenario')
    if scenario:
        runs = runs.filter(scenario=scenario)

    serializer = RunRecordListSerializer(runs, many=True)
    return Response(serializer.data)
