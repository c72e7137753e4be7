from django.db import models

CODEC_CHOICES = [
    ('gvw', 'GVW'),
    ('llz', 'LLZ'),
    ('hyb', 'HYB'),
]


class RunRecord(models.Model):
    """One benchmark row: a codec at one target distortion, aggregated over seeds."""
    scenario = models.CharField(max_length=64, blank=True)
    codec = models.CharField(max_length=3, choices=CODEC_CHOICES)
    ell = models.IntegerField()
    d_target = models.FloatField()
    d_achieved_mean = models.FloatField()
    d_achieved_std = models.FloatField()  # sample std, 0 for a single seed
    rate_mean = models.FloatField()  # bits/symbol
    rate_std = models.FloatField()
    memory_symbols = models.BigIntegerField()
    memory_bytes = models.BigIntegerField()
    encode_wall_time = models.FloatField()  # seconds, mean per seed
    decode_wall_time = models.FloatField()
    seeds = models.IntegerField()
    excess_fraction = models.FloatField()  # share of seeds with achieved distortion above d_target
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['scenario', 'codec', 'd_target']

    def __str__(self):
        return f"{self.scenario or 'custom'}: {self.codec} at D={self.d_target} ({self.seeds} seeds)"

    @property
    def memory_mb(self):
        return self.memory_bytes / 2 ** 20
