from django.contrib import admin
from .models import RunRecord


class RunRecordAdmin(admin.ModelAdmin):
    list_display = ('scenario', 'codec', 'd_target', 'd_achieved_mean', 'rate_mean', 'memory_symbols', 'seeds',
                    'created')
    list_filter = ('scenario', 'codec')


admin.site.register(RunRecord, RunRecordAdmin)
