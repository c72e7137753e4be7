import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase
from django.urls import reverse
from hypothesis import given, settings as hyp_settings, strategies as st
from rest_framework.test import APIClient

from .exceptions import (InvalidPmf, InvalidDistortion, SpecParseError, DistortionOutOfRange, RateOutOfRange,
                         EXIT_VALIDATION, EXIT_RUNTIME)
from .models import SourceModel, DistortionSpec, RdPoint, RdCurve
from .specs import load_source, load_distortion, parse_spec_file, format_pmf, parse_pmf, format_matrix, parse_matrix
from .utils import (rate_distortion, distortion_rate, rd_slope, d_max, rd_curve, binary_entropy, blahut_arimoto,
                    solve_at_distortion, mutual_information, expected_distortion, channel_from_q, closed_form_kind,
                    rate_at_zero, timesharing_rate)

BERN4 = SourceModel.bernoulli(0.4)
BERN2 = SourceModel.bernoulli(0.2)
UNIFORM4 = SourceModel.uniform(4)
HAMMING = DistortionSpec.hamming(2)
HAMMING4 = DistortionSpec.hamming(4)


def padded(k):
    """Hamming plus one reproduction letter that is never worth using; not recognised as Hamming."""
    return DistortionSpec(tuple(tuple([0.0 if x == y else 1.0 for y in range(k)] + [5.0]) for x in range(k)))


ACCEPTANCE_GRIDS = [
    (BERN4, [0.05 + 0.03 * i for i in range(9)]),
    (BERN2, [0.04 + 0.015 * i for i in range(9)]),
    (UNIFORM4, [0.1 + 0.06 * i for i in range(9)]),
]


def closed_form(source, D):
    if source.alphabet_size == 2:
        return binary_entropy(source.pmf[1]) - binary_entropy(D)
    return 2 - binary_entropy(D) - D * math.log2(3)


class ModelTests(SimpleTestCase):

    def test_pmf_validation(self):
        with self.assertRaises(InvalidPmf):
            SourceModel((0.5, 0.6))
        with self.assertRaises(InvalidPmf):
            SourceModel((1.0,))
        with self.assertRaises(InvalidPmf):
            SourceModel((1.5, -0.5))
        with self.assertRaises(InvalidPmf):
            SourceModel.bernoulli(1.2)
        self.assertEqual(SourceModel.bernoulli(0.4).pmf, (0.6, 0.4))
        self.assertTrue(UNIFORM4.is_uniform())

    def test_distortion_validation(self):
        with self.assertRaises(InvalidDistortion):
            DistortionSpec(((0.0, 1.0), (1.0,)))
        with self.assertRaises(InvalidDistortion):
            DistortionSpec(((0.0, -1.0), (1.0, 0.0)))
        with self.assertRaises(InvalidDistortion):
            DistortionSpec(((1.0, 1.0), (1.0, 0.0)))  # letter 0 has no exact reproduction
        with self.assertRaises(InvalidDistortion):
            HAMMING4.check_source(BERN4)

    def test_hamming_detection(self):
        self.assertTrue(HAMMING.is_hamming())
        self.assertFalse(padded(2).is_hamming())
        self.assertEqual(closed_form_kind(BERN4, HAMMING), 'binary')
        self.assertEqual(closed_form_kind(UNIFORM4, HAMMING4), 'uniform')
        self.assertIsNone(closed_form_kind(SourceModel((0.5, 0.25, 0.25)), DistortionSpec.hamming(3)))
        self.assertIsNone(closed_form_kind(BERN4, padded(2)))

    def test_lookup_table(self):
        self.assertEqual(HAMMING.table().dtype, np.int64)
        self.assertEqual(DistortionSpec(((0.0, 0.5), (0.5, 0.0))).table().dtype, np.float64)
        self.assertEqual(padded(2).zero_distortion_map(), (0, 1))

    def test_curve_checks(self):
        a = RdPoint(0.1, 0.5, -3.0, (0.5, 0.5))
        b = RdPoint(0.2, 0.2, -1.5, (0.5, 0.5))
        c = RdPoint(0.3, 0.15, -0.5, (0.5, 0.5))
        with self.assertRaises(ValueError):
            RdCurve((b, a))
        with self.assertRaises(ValueError):
            # the middle point sits above the chord
            RdCurve((a, RdPoint(0.2, 0.4, -1.0, (0.5, 0.5)), c))
        self.assertEqual(len(RdCurve((a, b, c))), 3)
        with self.assertRaises(ValueError):
            RdPoint(0.1, 0.5, 1.0, (0.5, 0.5))


class DmaxTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(d_max(BERN4, HAMMING), (0.4, 0))
        self.assertEqual(d_max(BERN2, HAMMING).value, 0.2)
        self.assertAlmostEqual(d_max(UNIFORM4, HAMMING4).value, 0.75)
        self.assertEqual(d_max(BERN4, padded(2)).value, 0.4)

    def test_degenerate(self):
        free = DistortionSpec(((0.0, 1.0), (0.0, 1.0)))
        self.assertTrue(d_max(BERN4, free).degenerate)
        with self.assertRaises(DistortionOutOfRange):
            rate_distortion(BERN4, free, 0.1)
        with self.assertRaises(InvalidDistortion):
            rd_curve(BERN4, free)


class RateDistortionTests(SimpleTestCase):

    def test_known_values(self):
        self.assertAlmostEqual(rate_distortion(BERN4, HAMMING, 0.05).rate, 0.684553637, places=8)
        self.assertAlmostEqual(rate_distortion(BERN4, HAMMING, 0.1).rate, 0.501955001, places=8)
        self.assertAlmostEqual(rate_distortion(BERN4, HAMMING, 0.2).rate, 0.2490225, places=7)
        point = rate_distortion(BERN4, HAMMING, 0.1)
        self.assertAlmostEqual(point.q_star[1], 0.3 / 0.8)

    def test_blahut_arimoto_matches_closed_forms(self):
        for source, targets in ACCEPTANCE_GRIDS:
            dist = padded(source.alphabet_size)
            for D in targets:
                with self.subTest(source=str(source), D=D):
                    point = rate_distortion(source, dist, D)
                    self.assertAlmostEqual(point.rate, closed_form(source, D), delta=1e-6)
                    # the unused letter gets (almost) no mass
                    self.assertLess(point.q_star[-1], 1e-6)

    def test_blahut_arimoto_channel(self):
        solution = solve_at_distortion(BERN4, padded(2), 0.2)
        self.assertLess(abs(solution.distortion - 0.2), 1e-7)
        self.assertAlmostEqual(mutual_information(BERN4.pmf, solution.channel), solution.rate, places=12)
        self.assertLess(solution.gap, 1e-7)
        again = blahut_arimoto(BERN4, padded(2), solution.s)
        self.assertTrue(np.array_equal(again.q, solution.q))

    def test_channel_from_q_reproduces_solution(self):
        for source, dist, D in ((BERN4, padded(2), 0.2), (UNIFORM4, padded(4), 0.3)):
            with self.subTest(source=str(source), D=D):
                solution = solve_at_distortion(source, dist, D)
                channel = channel_from_q(solution.q, solution.slope, dist)
                self.assertTrue(np.allclose(channel.sum(axis=1), 1.0))
                self.assertAlmostEqual(mutual_information(source.pmf, channel), solution.rate, delta=1e-6)
                self.assertAlmostEqual(expected_distortion(source.pmf, channel, dist), solution.distortion,
                                       delta=1e-6)

    def test_channel_from_q_closed_forms(self):
        for source, dist, D in ((BERN4, HAMMING, 0.1), (BERN2, HAMMING, 0.1), (UNIFORM4, HAMMING4, 0.4)):
            with self.subTest(source=str(source), D=D):
                point = rate_distortion(source, dist, D)
                channel = channel_from_q(point.q_star, point.slope, dist)
                self.assertAlmostEqual(mutual_information(source.pmf, channel), point.rate, delta=1e-6)
                self.assertAlmostEqual(expected_distortion(source.pmf, channel, dist), D, delta=1e-6)

    def test_inversion_roundtrip(self):
        for source, targets in ACCEPTANCE_GRIDS:
            dist = DistortionSpec.hamming(source.alphabet_size)
            for D in targets:
                with self.subTest(source=str(source), D=D):
                    rate = rate_distortion(source, dist, D).rate
                    self.assertAlmostEqual(distortion_rate(source, dist, rate), D, delta=2e-9)

    def test_slope_against_finite_differences(self):
        h = 1e-5
        for source, dist, D in ((BERN4, HAMMING, 0.1), (BERN4, HAMMING, 0.3), (UNIFORM4, HAMMING4, 0.4),
                                (BERN4, padded(2), 0.15), (UNIFORM4, padded(4), 0.3)):
            with self.subTest(source=str(source), D=D):
                numeric = (closed_form(source, D + h) - closed_form(source, D - h)) / (2 * h)
                self.assertAlmostEqual(rd_slope(source, dist, D), numeric, delta=1e-3)

    def test_ranges(self):
        with self.assertRaises(DistortionOutOfRange):
            rate_distortion(BERN4, HAMMING, 0.0)
        with self.assertRaises(DistortionOutOfRange):
            rate_distortion(BERN4, HAMMING, 0.4)
        with self.assertRaises(RateOutOfRange):
            distortion_rate(BERN4, HAMMING, 0.0)
        with self.assertRaises(RateOutOfRange):
            distortion_rate(BERN4, HAMMING, 1.0)

    @hyp_settings(max_examples=40, deadline=None)
    @given(p=st.floats(0.05, 0.5), fraction=st.floats(0.05, 0.95))
    def test_bernoulli_properties(self, p, fraction):
        source = SourceModel.bernoulli(p)
        D = fraction * min(p, 1 - p)
        point = rate_distortion(source, HAMMING, D)
        self.assertGreaterEqual(point.rate, 0.0)
        self.assertLessEqual(point.rate, binary_entropy(p))
        self.assertLess(point.slope, 0.0)
        self.assertAlmostEqual(sum(point.q_star), 1.0)


class CurveTests(SimpleTestCase):

    def test_grid(self):
        curve = rd_curve(BERN4, HAMMING, points=9)
        self.assertEqual(len(curve), 9)
        self.assertAlmostEqual(curve.distortions[0], 0.04)
        self.assertEqual(curve.rates, sorted(curve.rates, reverse=True))
        with self.assertRaises(ValueError):
            rd_curve(BERN4, HAMMING, points=0)

    def test_timesharing_line(self):
        self.assertAlmostEqual(rate_at_zero(BERN4, HAMMING), binary_entropy(0.4))
        self.assertAlmostEqual(timesharing_rate(BERN4, HAMMING, 0.2), binary_entropy(0.4) / 2)
        self.assertEqual(timesharing_rate(BERN4, HAMMING, 0.4), 0.0)
        self.assertAlmostEqual(rate_at_zero(UNIFORM4, padded(4)), 2.0, delta=1e-3)
        for point in rd_curve(UNIFORM4, HAMMING4, points=12).points:
            self.assertLessEqual(point.rate, timesharing_rate(UNIFORM4, HAMMING4, point.distortion))


class SpecLoadingTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text):
        path = os.path.join(self.tmp.name, 'spec.txt')
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def test_builtins(self):
        self.assertEqual(load_source('bern:0.4'), BERN4)
        self.assertEqual(load_source('uniform:4'), UNIFORM4)
        self.assertEqual(load_distortion('hamming', UNIFORM4), HAMMING4)
        for bad in ('bern:x', 'gauss:1', 'bern:'):
            with self.subTest(bad=bad):
                with self.assertRaises(SpecParseError):
                    load_source(bad)

    def test_config_file(self):
        path = self.write("# Bern(0.4) under Hamming distortion\n"
                          "source_alphabet_size 2\nrepro_alphabet_size 3\n"
                          "pmf 0.6 0.4\nrow 0 1 5  # third letter is expensive\nrow 1 0 5\n")
        source, dist = parse_spec_file(path)
        self.assertEqual(source, BERN4)
        self.assertEqual(dist, padded(2))
        self.assertEqual(load_source(path), BERN4)
        self.assertEqual(load_distortion(path, BERN4), padded(2))

    def test_config_errors(self):
        cases = [
            "pmf 0.6 0.4\npmf 0.5 0.5\n",
            "pmf 0.6 x\n",
            "volume 11\n",
            "source_alphabet_size 3\npmf 0.6 0.4\n",
            "repro_alphabet_size 3\nrow 0 1\nrow 1 0\n",
        ]
        for text in cases:
            with self.subTest(text=text):
                with self.assertRaises(SpecParseError):
                    parse_spec_file(self.write(text))
        with self.assertRaises(InvalidPmf):
            load_source(self.write("row 0 1\nrow 1 0\n"))
        with self.assertRaises(InvalidDistortion):
            load_distortion(self.write("pmf 0.6 0.4\n"), BERN4)

    def test_unreadable_config(self):
        binary = os.path.join(self.tmp.name, 'spec.bin')
        with open(binary, 'wb') as f:
            f.write(b'\xff\xfe\x00pmf\x80\x81')
        for path in (self.tmp.name, binary):
            with self.subTest(path=path):
                with self.assertRaises(SpecParseError) as ctx:
                    load_source(path)
                self.assertEqual(ctx.exception.exit_code, EXIT_VALIDATION)
                with self.assertRaises(SpecParseError):
                    load_distortion(path, BERN4)

    def test_header_strings(self):
        source = SourceModel((0.1, 0.2, 0.7))
        self.assertEqual(parse_pmf(format_pmf(source)), source)
        self.assertEqual(parse_matrix(format_matrix(padded(3))), padded(3))
        with self.assertRaises(SpecParseError):
            parse_pmf("0.5,half")

    def test_exit_codes(self):
        self.assertEqual(SpecParseError.exit_code, EXIT_VALIDATION)
        self.assertEqual(DistortionOutOfRange(0.5, 0.4).exit_code, EXIT_VALIDATION)
        from .exceptions import SeedMismatch, NoConvergence
        self.assertEqual(SeedMismatch.exit_code, EXIT_RUNTIME)
        self.assertEqual(NoConvergence.exit_code, EXIT_RUNTIME)


class RdApiTests(SimpleTestCase):

    def setUp(self):
        self.client = APIClient()

    def test_point(self):
        response = self.client.get(reverse('rd_core:get_rd_point'), {'source': 'bern:0.4', 'D': '0.1'})
        self.assertEqual(response.status_code, 200)
        self.assertAlmostEqual(response.data['rate'], 0.501955001, places=8)
        self.assertEqual(len(response.data['q_star']), 2)

    def test_point_errors(self):
        url = reverse('rd_core:get_rd_point')
        self.assertEqual(self.client.get(url, {'source': 'bern:0.4'}).status_code, 400)
        self.assertEqual(self.client.get(url, {'source': 'bern:0.4', 'D': '0.5'}).status_code, 400)
        self.assertEqual(self.client.get(url, {'source': '/etc/passwd', 'D': '0.1'}).status_code, 400)
        self.assertEqual(self.client.get(url, {'source': 'bern:0.4', 'D': 'much'}).status_code, 400)

    def test_files_are_not_read(self):
        # relative names resolve against the working directory, where manage.py and .env live
        for query in ({'source': '.env'}, {'source': 'manage.py'}, {'source': 'RDWorkbench'},
                      {'source': 'bern:0.4/../manage.py'}, {'dist': 'manage.py'}, {'dist': '.env'}):
            for name in ('rd_core:get_rd_point', 'rd_core:get_rd_curve'):
                with self.subTest(query=query, view=name):
                    response = self.client.get(reverse(name), {**query, 'D': '0.1'})
                    self.assertEqual(response.status_code, 400)
                    body = response.content.decode()
                    self.assertNotIn('unknown key', body)
                    self.assertNotIn('SECRET_KEY', body)
                    self.assertNotIn('import', body)
                    self.assertIn('source' if 'source' in query else 'dist', response.data)

    def test_curve(self):
        response = self.client.get(reverse('rd_core:get_rd_curve'), {'source': 'uniform:4', 'points': 5})
        self.assertEqual(response.status_code, 200)
        self.assertAlmostEqual(response.data['d_max'], 0.75)
        self.assertEqual(len(response.data['points']), 5)
        self.assertEqual(self.client.get(reverse('rd_core:get_rd_curve'), {'points': 0}).status_code, 400)
