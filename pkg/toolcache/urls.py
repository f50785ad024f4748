"""
URL-шаблоны
"""

from django.urls import path
from .views import DistanceQueryView, RushHourView, SurroundingPoisView, TimeQueryView

urlpatterns = [
    path("time/", TimeQueryView.as_view()),
    path("distance/", DistanceQueryView.as_view()),
    path("surrounding/", SurroundingPoisView.as_view()),
    path("rush-hour/", RushHourView.as_view()),
]
