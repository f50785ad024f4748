"""
Представления хранилища: каталог подписей и SQL только на чтение
"""

from typing import Any

from rest_framework.generics import GenericAPIView, ListAPIView
from rest_framework.request import Request
from rest_framework.response import Response
from rest_framework import status

from .exceptions import SqlExecutionError
from .models import TableCaption
from .serializers import SqlQuerySerializer, TableCaptionSerializer
from .store import GeoStore


class CaptionListView(ListAPIView):
    """
    Каталог подписей таблиц в порядке (город, семейство)
    """

    serializer_class = TableCaptionSerializer
    queryset = TableCaption.objects.order_by("position")
    pagination_class = None


class SqlQueryView(GenericAPIView):
    """
    Выполнение одного запроса на чтение
    """

    serializer_class = SqlQuerySerializer

    def post(self, request: Request, *args: Any, **kwargs: Any) -> Response:
        """
        Возвращает колонки и строки результата или 400 с сообщением движка
        """

        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        try:
            result = GeoStore().execute_sql(serializer.validated_data["statement"])
        except SqlExecutionError as exc:
            return Response({"detail": exc.report()}, status=status.HTTP_400_BAD_REQUEST)
        return Response(result.to_payload(), status=status.HTTP_200_OK)
