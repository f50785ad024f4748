"""
URL-шаблоны
"""

from django.urls import path
from .views import CaptionListView, SqlQueryView

urlpatterns = [
    path("captions/", CaptionListView.as_view()),
    path("sql/", SqlQueryView.as_view()),
]
