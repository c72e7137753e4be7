import dataclasses
import io
import os
import tempfile

from django.test import SimpleTestCase, TestCase, override_settings, tag
from django.urls import reverse
from rest_framework.test import APIClient

from rd_core.exceptions import InvalidScenario, ParamMismatch, ScenarioError, MemoryCap
from rd_core.models import SourceModel, DistortionSpec
from rd_core.utils import rd_curve
from lossy_codecs.models import GvwParams, HybParams, LlzParams, GVW, HYB, LLZ

from .models import RunRecord
from .scenarios import (ScenarioSpec, EXPLICIT, builtin_scenario, default_seeds, BUILTIN_MEMORY_CAP,
                        PUBLISHED_BAND)
from .serializers import CSV_FIELDS, TIMING_FIELDS
from .utils import (run_scenario, memory_ratio, emit_csv, read_csv, write_csv, emit_plot_data,
                    read_plot_data, llz_rate_trend, match_length_concentration, compare_published)

BERN4 = SourceModel.bernoulli(0.4)
UNIFORM4 = SourceModel.uniform(4)
HAMMING = DistortionSpec.hamming(2)
HAMMING4 = DistortionSpec.hamming(4)


def small_spec(codec=GVW, seeds=(1050, 1051, 1052), targets=(0.2,), **kwargs):
    options = dict(name='small', source=BERN4, dist=HAMMING, codec=codec, targets=targets, n=200, seeds=seeds,
                   mode=EXPLICIT, ell=8 if codec != LLZ else 12, gamma=0.05 if codec != LLZ else 0.03,
                   alpha=0.1 if codec == LLZ else None)
    options.update(kwargs)
    return ScenarioSpec(**options)


def sample_record(**kwargs):
    values = dict(scenario='table1', codec='gvw', ell=33, d_target=0.05, d_achieved_mean=0.0714285714285714,
                  d_achieved_std=0.012345678901234, rate_mean=0.7009523809523809, rate_std=0.0,
                  memory_symbols=218137722, memory_bytes=27267216, encode_wall_time=1.25,
                  decode_wall_time=0.5, seeds=32, excess_fraction=0.96875)
    values.update(kwargs)
    return RunRecord(**values)


def without_timing(records):
    out = io.StringIO()
    write_csv(records, out)
    lines = out.getvalue().splitlines()
    timing = [lines[0].split(',').index(name) for name in TIMING_FIELDS]
    return [[v for i, v in enumerate(line.split(',')) if i not in timing] for line in lines]


class ScenarioSpecTests(SimpleTestCase):

    def test_validation(self):
        with self.assertRaises(InvalidScenario):
            small_spec(targets=())
        with self.assertRaises(InvalidScenario):
            small_spec(targets=(0.2, 0.4))
        with self.assertRaises(InvalidScenario):
            small_spec(seeds=())
        with self.assertRaises(InvalidScenario):
            small_spec(n=0)
        with self.assertRaises(InvalidScenario):
            small_spec(codec='zip')
        with self.assertRaises(InvalidScenario):
            small_spec(ell=None)
        with self.assertRaises(InvalidScenario):
            small_spec(codec=LLZ, alpha=None)
        with self.assertRaises(InvalidScenario):
            small_spec(seeds=(-1,))
        with self.assertRaises(InvalidScenario):
            small_spec(mode='random')

    def test_default_seeds(self):
        self.assertEqual(default_seeds(), tuple(range(1050, 1082)))
        with override_settings(RDC_SEED_BASE=7, RDC_DEFAULT_SEEDS=3):
            self.assertEqual(default_seeds(), (7, 8, 9))

    def test_builtin_grids(self):
        table1 = builtin_scenario('table1')
        self.assertEqual([s.codec for s in table1], [GVW, LLZ])
        self.assertEqual(table1[0].targets, (0.05, 0.08, 0.11, 0.14, 0.17, 0.2, 0.23, 0.26, 0.29))
        self.assertEqual(len(table1[0].seeds), 32)
        self.assertEqual(table1[0].memory_cap, BUILTIN_MEMORY_CAP)

        table3 = builtin_scenario('table3', codecs=(HYB,))
        self.assertEqual([s.codec for s in table3], [HYB])
        self.assertEqual(table3[0].targets[1], 0.055)

        table4 = builtin_scenario('table4', seeds=(1,))
        self.assertEqual(table4[0].source, UNIFORM4)
        self.assertEqual(table4[0].targets[-1], 0.58)
        self.assertEqual(table4[0].dist, HAMMING4)

        with self.assertRaises(InvalidScenario):
            builtin_scenario('table9')
        with self.assertRaises(InvalidScenario):
            builtin_scenario('table2', codecs=(GVW,))

    def test_published_distortions(self):
        gvw, llz = builtin_scenario('table1')
        self.assertEqual(gvw.published[0], 0.07143)
        self.assertEqual(len(gvw.published), len(gvw.targets))
        self.assertIsNone(llz.published)
        (hyb,) = builtin_scenario('table2')
        self.assertEqual(hyb.published[0], 0.06952)
        self.assertEqual(hyb.published[-1], 0.29333)
        self.assertIsNone(builtin_scenario('table3')[0].published)
        with self.assertRaises(InvalidScenario):
            small_spec(targets=(0.1, 0.2), published=(0.12,))


class PublishedComparisonTests(SimpleTestCase):

    def test_band(self):
        spec = small_spec(HYB, targets=(0.05, 0.08), published=(0.06952, 0.11238))
        records = [sample_record(codec=HYB, d_target=0.05, d_achieved_mean=0.0704),
                   sample_record(codec=HYB, d_target=0.08, d_achieved_mean=0.145)]
        first, second = compare_published(spec, records)
        self.assertEqual((first.d_target, first.published), (0.05, 0.06952))
        self.assertAlmostEqual(first.deviation, 0.00088)
        self.assertTrue(first.within_band)
        self.assertEqual(first.band, PUBLISHED_BAND)
        self.assertFalse(second.within_band)
        self.assertTrue(compare_published(spec, records, band=0.05)[1].within_band)

    def test_nothing_to_compare(self):
        self.assertEqual(compare_published(small_spec(), [sample_record()]), [])
        spec = small_spec(HYB, targets=(0.05,), published=(0.06952,))
        # records of another codec are skipped
        self.assertEqual(compare_published(spec, [sample_record(codec=GVW)]), [])


@tag('slow')
class PublishedDistortionTests(SimpleTestCase):
    """Full-size HYB run at the first table2 grid point; a few minutes of search."""

    def test_hyb_mean_distortion_near_reported(self):
        (spec,) = builtin_scenario('table2')
        spec = dataclasses.replace(spec, targets=(0.05,), published=(0.06952,))
        self.assertEqual((spec.n, len(spec.seeds)), (1050, 32))
        (record,) = run_scenario(spec)
        self.assertEqual(record.ell, 33)
        self.assertEqual(record.memory_symbols, 6610234 + 32)
        (check,) = compare_published(spec, [record])
        self.assertTrue(check.within_band, check)
        self.assertAlmostEqual(record.d_achieved_mean, 0.06952, delta=0.03)


class RunScenarioTests(SimpleTestCase):

    def test_fixed_rate_codecs(self):
        for codec in (GVW, HYB):
            with self.subTest(codec=codec):
                (record,) = run_scenario(small_spec(codec))
                self.assertEqual(record.codec, codec)
                self.assertEqual(record.ell, 8)
                # 25 blocks of 3 bits
                self.assertEqual(record.rate_mean, 75 / 200)
                self.assertEqual(record.rate_std, 0.0)
                self.assertEqual(record.seeds, 3)
                self.assertGreaterEqual(record.excess_fraction, 0.0)
                self.assertLessEqual(record.excess_fraction, 1.0)
                self.assertGreater(record.d_achieved_mean, 0.0)
                self.assertLess(record.d_achieved_mean, 0.5)

    def test_memory_matches_allocation(self):
        (gvw,) = run_scenario(small_spec(GVW))
        self.assertEqual((gvw.memory_symbols, gvw.memory_bytes), (40, 5))
        (hyb,) = run_scenario(small_spec(HYB))
        self.assertEqual(hyb.memory_symbols, 12)

    def test_llz_stays_within_working_distortion(self):
        records = run_scenario(small_spec(LLZ, targets=(0.15, 0.2)))
        self.assertEqual([r.d_target for r in records], [0.15, 0.2])
        for record in records:
            p = LlzParams.build(BERN4, HAMMING, n=200, ell=12, gamma=0.03, D=record.d_target, alpha=0.1, seed=1)
            self.assertLessEqual(record.d_achieved_mean, p.d_bar + 1e-12)

    def test_single_seed_single_target(self):
        records = run_scenario(small_spec(HYB, seeds=(4,)))
        self.assertEqual(len(records), 1)
        self.assertEqual(records[0].d_achieved_std, 0.0)

    def test_heuristic_mode(self):
        spec = ScenarioSpec(name='u4', source=UNIFORM4, dist=HAMMING4, codec=HYB, targets=(0.58,), n=50, seeds=(1,))
        (record,) = run_scenario(spec)
        self.assertEqual(record.ell, 218)

    def test_failures_name_the_grid_point(self):
        spec = small_spec(GVW, memory_cap=10)
        with self.assertRaises(ScenarioError) as ctx:
            run_scenario(spec)
        self.assertEqual((ctx.exception.codec, ctx.exception.d_target, ctx.exception.seed), (GVW, 0.2, 1050))
        self.assertIsInstance(ctx.exception.__cause__, MemoryCap)

    def test_deterministic_apart_from_timing(self):
        spec = small_spec(LLZ, targets=(0.1, 0.2))
        self.assertEqual(without_timing(run_scenario(spec)), without_timing(run_scenario(spec)))

    def test_grid_points_in_parallel(self):
        spec = small_spec(HYB, targets=(0.1, 0.15, 0.2, 0.25))
        serial = run_scenario(spec, workers=1)
        parallel = run_scenario(spec, workers=3)
        self.assertEqual([r.d_target for r in parallel], [0.1, 0.15, 0.2, 0.25])
        self.assertEqual(without_timing(parallel), without_timing(serial))

    def test_parallel_failures_name_the_grid_point(self):
        spec = small_spec(GVW, targets=(0.1, 0.2), memory_cap=10)
        with self.assertRaises(ScenarioError) as ctx:
            run_scenario(spec, workers=2)
        self.assertEqual((ctx.exception.codec, ctx.exception.d_target), (GVW, 0.1))


class MemoryRatioTests(SimpleTestCase):

    def test_table_row(self):
        gvw = GvwParams.build(BERN4, HAMMING, n=1050, ell=33, gamma=0.002, D=0.05, seed=0)
        hyb = HybParams.build(BERN4, HAMMING, n=1050, ell=33, gamma=0.002, D=0.05, seed=0)
        ratio = memory_ratio(gvw, hyb)
        self.assertLess(ratio, 33)
        self.assertLess(abs(float(ratio) - 33) / 33, 0.001)
        self.assertEqual(ratio, 33 * gvw.codebook_size / (gvw.codebook_size + 32))

    def test_single_symbol_windows(self):
        gvw = GvwParams.build(UNIFORM4, HAMMING4, n=10, ell=1, gamma=0.002, D=0.1, seed=0)
        hyb = HybParams.build(UNIFORM4, HAMMING4, n=10, ell=1, gamma=0.002, D=0.1, seed=0)
        self.assertEqual(memory_ratio(gvw, hyb), 1)

    def test_memory_columns(self):
        # 26MB and 0.79MB in the published Bern(0.4) tables at D=0.05
        gvw = GvwParams.build(BERN4, HAMMING, n=1050, ell=33, gamma=0.002, D=0.05, seed=0)
        hyb = HybParams.build(BERN4, HAMMING, n=1050, ell=33, gamma=0.002, D=0.05, seed=0)
        self.assertLess(abs(gvw.memory_symbols / 8 / 2 ** 20 - 26) / 26, 0.15)
        self.assertLess(abs(hyb.memory_symbols / 8 / 2 ** 20 - 0.79) / 0.79, 0.15)

    def test_mismatch(self):
        gvw = GvwParams.build(BERN4, HAMMING, n=100, ell=8, gamma=0.05, D=0.2, seed=0)
        with self.assertRaises(ParamMismatch):
            memory_ratio(gvw, HybParams.build(BERN4, HAMMING, n=100, ell=9, gamma=0.05, D=0.2, seed=0))
        with self.assertRaises(ParamMismatch):
            memory_ratio(gvw, HybParams.build(BERN4, HAMMING, n=100, ell=8, gamma=0.05, D=0.2, seed=0, stride=8))


class FileTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_empty_csv_is_header_only(self):
        path = os.path.join(self.tmp.name, 'runs.csv')
        emit_csv([], path)
        with open(path, encoding='utf-8') as f:
            self.assertEqual(f.read(), ','.join(CSV_FIELDS) + '\n')
        self.assertEqual(read_csv(path), [])

    def test_csv_roundtrip(self):
        path = os.path.join(self.tmp.name, 'runs.csv')
        record = sample_record()
        emit_csv([record], path)
        (parsed,) = read_csv(path)
        for name in CSV_FIELDS:
            self.assertEqual(getattr(parsed, name), getattr(record, name), name)

    def test_plot_data(self):
        path = os.path.join(self.tmp.name, 'plot.txt')
        curve = rd_curve(BERN4, HAMMING, points=5)
        records = [sample_record(), sample_record(codec='llz', d_achieved_mean=0.03238, rate_mean=1.00029)]
        emit_plot_data(records, curve, BERN4, HAMMING, path)

        with open(path, encoding='utf-8') as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[:2], ['# curve', 'D,R,timesharing'])
        self.assertEqual(lines[7:9], ['# scatter', 'codec,D_achieved,rate'])

        sections = read_plot_data(path)
        self.assertEqual(len(sections['curve']), 5)
        for (D, rate, chord), point in zip(sections['curve'], curve.points):
            self.assertEqual((D, rate), (point.distortion, point.rate))
            # R(D) is convex, so it never rises above the time-sharing line
            self.assertLessEqual(rate, chord + 1e-12)
        self.assertEqual(sections['scatter'][1], ('llz', 0.03238, 1.00029))


class AsymptoticProxyTests(SimpleTestCase):

    def test_llz_rate_falls_with_block_length(self):
        trend = llz_rate_trend(BERN4, HAMMING, 0.2, seeds=default_seeds(20))
        self.assertEqual([t.ell for t in trend], [8, 12, 16, 20])
        rates = [t.rate_mean for t in trend]
        self.assertEqual(rates, sorted(rates, reverse=True))
        self.assertGreater(trend[-1].rate_mean, trend[-1].working_rate)
        self.assertLess(trend[-1].gap, trend[0].gap)

    def test_match_lengths_near_prediction(self):
        # D=0.05 gives databases of 13.6k (hyb) and 20k (llz) symbols at l=20
        hyb = HybParams.build(BERN4, HAMMING, n=100, ell=20, gamma=0.002, D=0.05, seed=3)
        llz = LlzParams.build(BERN4, HAMMING, n=100, ell=20, gamma=0.03, D=0.05, alpha=0.1, seed=3)
        self.assertEqual((hyb.database_size, llz.database_size), (13616, 20065))
        for params in (hyb, llz):
            with self.subTest(codec=params.codec):
                stats = match_length_concentration(params, BERN4, HAMMING, probes=100)
                self.assertEqual(stats.probes, 100)
                self.assertLess(abs(stats.relative_error), 0.2)
                self.assertLess(stats.mean, stats.predicted)
                self.assertEqual(stats, match_length_concentration(params, BERN4, HAMMING, probes=100))

    def test_small_databases_fall_short_of_prediction(self):
        # with only ~50-70 symbols the typical length is well below log2(m) / R(D_bar)
        llz = LlzParams.build(BERN4, HAMMING, n=100, ell=20, gamma=0.03, D=0.2, alpha=0.1, seed=3)
        stats = match_length_concentration(llz, BERN4, HAMMING, probes=100)
        self.assertLess(stats.relative_error, -0.2)
        self.assertGreater(stats.mean, 0.4 * stats.predicted)


class RunsApiTests(TestCase):

    def setUp(self):
        self.client = APIClient()
        sample_record().save()
        sample_record(codec='hyb', scenario='table2', memory_symbols=6610266, memory_bytes=826284).save()

    def test_list(self):
        response = self.client.get(reverse('bench:get_runs_list'))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(len(response.data), 2)
        self.assertIn('created', response.data[0])

    def test_filter_by_codec_and_scenario(self):
        response = self.client.get(reverse('bench:get_runs_list', kwargs={'codec': 'hyb'}))
        self.assertEqual([r['codec'] for r in response.data], ['hyb'])
        self.assertAlmostEqual(response.data[0]['memory_mb'], 826284 / 2 ** 20)

        response = self.client.get(reverse('bench:get_runs_list'), {'scenario': 'table1'})
        self.assertEqual([r['scenario'] for r in response.data], ['table1'])

    def test_unknown_codec(self):
        response = self.client.get(reverse('bench:get_runs_list', kwargs={'codec': 'zip'}))
        self.assertEqual(response.status_code, 404)
