from django.urls import path
from . import views

urlpatterns = [
    path('runs/', views.get_runs_list, name='get_runs_list'),
    path('runs/<str:codec>/', views.get_runs_list, name='get_runs_list'),
]
