import logging

from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from .exceptions import WorkbenchError
from .serializers import RdPointSerializer, RdQuerySerializer
from .specs import load_source, load_distortion
from .utils import rate_distortion, rd_curve, d_max

logger = logging.getLogger(__name__)


def _resolve(request):
    query = RdQuerySerializer(data=request.query_params)
    query.is_valid(raise_exception=True)
    source = load_source(query.validated_data['source'])
    dist = load_distortion(query.validated_data['dist'], source)
    return query.validated_data, source, dist


@api_view(['GET'])
def get_rd_point(request):
    try:
        data, source, dist = _resolve(request)
        if data.get('D') is None:
            return Response({'error': 'D is required'}, status=status.HTTP_400_BAD_REQUEST)
        point = rate_distortion(source, dist, data['D'])
    except WorkbenchError as e:
        logger.info(f"Rejected rd point query {dict(request.query_params)}: {e}")
        return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)
    return Response(RdPointSerializer(point).data)


@api_view(['GET'])
def get_rd_curve(request):
    try:
        data, source, dist = _resolve(request)
        curve = rd_curve(source, dist, data['points'])
    except WorkbenchError as e:
        logger.info(f"Rejected rd curve query {dict(request.query_params)}: {e}")
        return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)
    return Response({
        'd_max': d_max(source, dist).value,
        'points': RdPointSerializer(curve.points, many=True).data,
    })
