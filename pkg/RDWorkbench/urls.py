"""RDWorkbench URL Configuration

The `urlpatterns` list routes URLs to views. For more information please see:
    https://docs.djangoproject.com/en/4.2/topics/http/urls/
"""

from django.contrib import admin
from django.urls import path, include


urlpatterns = [
    path('admin/', admin.site.urls),
    path('rd/', include(("rd_core.urls", "rd_core"), namespace='rd_core')),
    path('bench/', include(("bench.urls", "bench"), namespace='bench')),
]
