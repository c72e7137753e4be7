# Generated by Django 4.2 on 2024-05-21 10:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scenario', models.CharField(blank=True, max_length=64)),
                ('codec', models.CharField(choices=[('gvw', 'GVW'), ('llz', 'LLZ'), ('hyb', 'HYB')], max_length=3)),
                ('ell', models.IntegerField()),
                ('d_target', models.FloatField()),
                ('d_achieved_mean', models.FloatField()),
                ('d_achieved_std', models.FloatField()),
                ('rate_mean', models.FloatField()),
                ('rate_std', models.FloatField()),
                ('memory_symbols', models.BigIntegerField()),
                ('memory_bytes', models.BigIntegerField()),
                ('encode_wall_time', models.FloatField()),
                ('decode_wall_time', models.FloatField()),
                ('seeds', models.IntegerField()),
                ('excess_fraction', models.FloatField()),
                ('created', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['scenario', 'codec', 'd_target'],
            },
        ),
    ]
