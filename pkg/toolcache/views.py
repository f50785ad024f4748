"""
Представления геофункций: воспроизведение из кеша
"""

from typing import Any

from django.conf import settings
from rest_framework.generics import GenericAPIView
from rest_framework.request import Request
from rest_framework.response import Response
from rest_framework import status

from .calls import make_request
from .exceptions import CacheMissError, InvalidParamsError, ProviderError
from .providers import SyntheticProvider
from .serializers import PARAM_SERIALIZERS
from .service import ToolCache


def shared_cache() -> ToolCache:
    provider = SyntheticProvider() if settings.TOOL_CACHE_LIVE_PROVIDER else None
    return ToolCache(provider=provider)


class ToolReplayView(GenericAPIView):
    """
    Вызов одной геофункции по query-параметрам

    Координаты передаются строкой "широта,долгота"
    """

    function: str = ""

    def get_serializer_class(self):
        return PARAM_SERIALIZERS[self.function]

    def get(self, request: Request, *args: Any, **kwargs: Any) -> Response:
        """
        Возвращает табличный результат функции и нормализованный запрос
        """

        try:
            tool_request = make_request(self.function, request.query_params.dict())
            payload = shared_cache().lookup(tool_request)
        except InvalidParamsError as exc:
            return Response({"detail": exc.errors}, status=status.HTTP_400_BAD_REQUEST)
        except CacheMissError as exc:
            return Response({"detail": str(exc)}, status=status.HTTP_404_NOT_FOUND)
        except ProviderError as exc:
            return Response({"detail": str(exc)}, status=status.HTTP_502_BAD_GATEWAY)
        return Response(
            {"function": self.function, "params": tool_request.params, **payload},
            status=status.HTTP_200_OK,
        )


class TimeQueryView(ToolReplayView):
    function = "time_query"


class DistanceQueryView(ToolReplayView):
    function = "distance_query"


class SurroundingPoisView(ToolReplayView):
    function = "surrounding_pois_query"


class RushHourView(ToolReplayView):
    function = "rush_hour_query"
