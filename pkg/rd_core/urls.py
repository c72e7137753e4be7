from django.urls import path
from . import views

urlpatterns = [
    # api paths
    path('point/', views.get_rd_point, name='get_rd_point'),
    path('curve/', views.get_rd_curve, name='get_rd_curve'),
]
