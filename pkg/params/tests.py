import math

from django.test import SimpleTestCase

from rd_core.exceptions import (DistortionOutOfRange, GammaOutOfRange, EpsilonOutOfRange,
                                InvalidScheduleArgument, DegenerateConstants)
from rd_core.models import SourceModel, DistortionSpec
from rd_core.utils import rate_distortion
from lossy_codecs.models import GVW, HYB, LLZ, GvwParams, HybParams, LlzParams

from .models import Theorem2Constants
from .utils import (heuristic_ell, heuristic_params, theorem2_constants, theorem2_block_length,
                    block_length_value, block_excess_bound, theorem3_schedule, llz_gamma_for_slack,
                    predicted_match_length, memory_estimate, working_rate)

BERN4 = SourceModel.bernoulli(0.4)
BERN2 = SourceModel.bernoulli(0.2)
UNIFORM4 = SourceModel.uniform(4)
HAMMING = DistortionSpec.hamming(2)
HAMMING4 = DistortionSpec.hamming(4)

# same as binary Hamming, with a third reproduction nobody should use; forces Blahut-Arimoto
PADDED = DistortionSpec(((0.0, 1.0, 5.0), (1.0, 0.0, 5.0)))

# (source, distortion, grid, ell for GVW/HYB, rate in bits/symbol at n = 1050)
TABLE_ROWS = [
    (BERN4, HAMMING, [0.05 + 0.03 * i for i in range(9)],
     [33, 39, 47, 57, 70, 88, 113, 151, 212],
     [0.70095, 0.59143, 0.50381, 0.41619, 0.32857, 0.26286, 0.21905, 0.15333, 0.10952]),
    (BERN2, HAMMING, [0.04 + 0.015 * i for i in range(9)],
     [46, 53, 62, 73, 87, 106, 133, 174, 246],
     [0.50381, 0.43810, 0.37238, 0.32857, 0.28476, 0.21905, 0.17524, 0.15333, 0.10952]),
    (UNIFORM4, HAMMING4, [0.1 + 0.06 * i for i in range(9)],
     [17, 20, 25, 32, 41, 56, 80, 123, 218],
     [1.41714, 1.16095, 0.92000, 0.72286, 0.56952, 0.41619, 0.30667, 0.19714, 0.10952]),
]


class HeuristicTests(SimpleTestCase):

    def test_gvw_at_low_distortion(self):
        p = heuristic_params(BERN4, HAMMING, 0.05, GVW)
        self.assertIsInstance(p, GvwParams)
        self.assertEqual(p.ell, 33)
        self.assertAlmostEqual(p.gamma, 0.002)
        self.assertEqual(p.codebook_size, 6610234)

    def test_hyb_at_high_distortion(self):
        p = heuristic_params(BERN4, HAMMING, 0.29, HYB)
        self.assertIsInstance(p, HybParams)
        self.assertEqual(p.ell, 212)

    def test_llz_defaults(self):
        p = heuristic_params(BERN4, HAMMING, 0.05, LLZ)
        self.assertIsInstance(p, LlzParams)
        self.assertEqual(p.ell, 33)
        self.assertAlmostEqual(p.gamma, 0.03)
        self.assertAlmostEqual(p.alpha, 0.1)

    def test_llz_block_lengths_over_the_bernoulli_grid(self):
        ells = [heuristic_ell(BERN4, HAMMING, 0.05 + 0.03 * i, LLZ) for i in range(9)]
        self.assertEqual(ells, [33, 39, 47, 57, 71, 89, 115, 153, 216])

    def test_table_rates_reproduced(self):
        for source, dist, grid, ells, rates in TABLE_ROWS:
            for D, ell, rate in zip(grid, ells, rates):
                with self.subTest(source=str(source), D=D):
                    p = heuristic_params(source, dist, D, HYB)
                    self.assertEqual(p.ell, ell)
                    self.assertEqual(round(p.total_bits / 1050, 5), rate)

    def test_distortion_outside_range(self):
        with self.assertRaises(DistortionOutOfRange):
            heuristic_params(BERN4, HAMMING, 0.4, GVW)
        with self.assertRaises(DistortionOutOfRange):
            heuristic_params(BERN4, HAMMING, 0.0, LLZ)


class ConstantsTests(SimpleTestCase):

    def test_bernoulli_values(self):
        c = theorem2_constants(BERN4, HAMMING, 0.2)
        self.assertEqual(c.d1, 0.1)
        self.assertAlmostEqual(c.d_max, 0.4)
        self.assertAlmostEqual(c.k_const, 0.395362397030, places=10)
        self.assertAlmostEqual(c.c_const, 0.019437126657, places=10)
        self.assertAlmostEqual(c.eps_hat, 0.220727664703, places=10)
        self.assertAlmostEqual(c.gamma_hat, 0.505865002596, places=10)

    def test_closed_form_and_blahut_arimoto_agree(self):
        exact = theorem2_constants(BERN4, HAMMING, 0.2)
        iterated = theorem2_constants(BERN4, PADDED, 0.2)
        for name in ('d_max', 'k_const', 'c_const', 'gamma_hat', 'eps_hat'):
            with self.subTest(name=name):
                self.assertAlmostEqual(getattr(exact, name), getattr(iterated, name), delta=1e-5)

    def test_bounded_over_the_grid(self):
        for D in (0.01, 0.05, 0.15, 0.3, 0.39):
            with self.subTest(D=D):
                c = theorem2_constants(BERN4, HAMMING, D)
                self.assertLessEqual(c.c_const, 0.25)
                self.assertLessEqual(c.gamma_hat, 1.0)
                self.assertGreater(c.eps_hat, 0)

    def test_out_of_range(self):
        with self.assertRaises(DistortionOutOfRange):
            theorem2_constants(BERN4, HAMMING, 0.45)

    def test_constants_validate_themselves(self):
        with self.assertRaises(DegenerateConstants):
            Theorem2Constants(d=0.2, d_max=0.4, d1=0.1, k_const=0.4, c_const=0.3, gamma_hat=0.5, eps_hat=0.2)
        with self.assertRaises(DegenerateConstants):
            Theorem2Constants(d=0.2, d_max=0.4, d1=0.1, k_const=math.nan, c_const=0.1, gamma_hat=0.5,
                              eps_hat=0.2)


class BlockLengthTests(SimpleTestCase):

    def setUp(self):
        self.c = theorem2_constants(BERN4, HAMMING, 0.2)

    def test_halfway_point(self):
        gamma, eps = 0.5 * self.c.gamma_hat, 0.5 * self.c.eps_hat
        self.assertAlmostEqual(block_length_value(self.c, gamma, eps), 1964.390876, places=5)
        with self.assertLogs('params.utils', level='WARNING') as logs:
            ell = theorem2_block_length(BERN4, HAMMING, 0.2, gamma, eps, constants=self.c)
        self.assertEqual(ell, 1965)
        self.assertIn('memory guard', logs.output[0])
        self.assertAlmostEqual(block_excess_bound(self.c, ell, gamma), 0.3676863493, delta=1e-8)

    def test_command_line_example(self):
        with self.assertLogs('params.utils', level='WARNING'):
            self.assertEqual(theorem2_block_length(BERN4, HAMMING, 0.2, 0.01, 0.001), 4748037)

    def test_halving_gamma_quadruples(self):
        eps = 0.05
        for gamma in (0.4, 0.1, 0.013):
            with self.subTest(gamma=gamma):
                ratio = block_length_value(self.c, gamma / 2, eps) / block_length_value(self.c, gamma, eps)
                self.assertAlmostEqual(ratio, 4.0, places=12)

    def test_decreasing_in_epsilon(self):
        gamma = 0.2
        epsilons = [self.c.eps_hat * f for f in (0.01, 0.1, 0.3, 0.6, 0.9, 0.999)]
        with self.assertLogs('params.utils', level='WARNING'):
            ells = [theorem2_block_length(BERN4, HAMMING, 0.2, gamma, e, constants=self.c) for e in epsilons]
        self.assertEqual(ells, sorted(ells, reverse=True))
        self.assertGreater(ells[0], ells[-1])

    def test_no_warning_within_guard(self):
        # a huge guard keeps quiet
        with self.assertNoLogs('params.utils', level='WARNING'):
            theorem2_block_length(BERN4, HAMMING, 0.2, 0.25, 0.1, constants=self.c, max_ell_rate=1e12)

    def test_argument_ranges(self):
        with self.assertRaises(GammaOutOfRange):
            theorem2_block_length(BERN4, HAMMING, 0.2, 0.0, 0.1, constants=self.c)
        with self.assertRaises(GammaOutOfRange):
            theorem2_block_length(BERN4, HAMMING, 0.2, self.c.gamma_hat, 0.1, constants=self.c)
        with self.assertRaises(EpsilonOutOfRange):
            theorem2_block_length(BERN4, HAMMING, 0.2, 0.1, self.c.eps_hat, constants=self.c)
        with self.assertRaises(EpsilonOutOfRange):
            theorem2_block_length(BERN4, HAMMING, 0.2, 0.1, -0.01, constants=self.c)


class ScheduleTests(SimpleTestCase):

    def test_ten_bit_budget(self):
        r_d = rate_distortion(BERN4, HAMMING, 0.2).rate
        ell, gamma = theorem3_schedule(BERN4, HAMMING, 0.2, n=10000, g_of_n=2 ** 10, c=1.01 - r_d)
        self.assertEqual(ell, 10)
        self.assertAlmostEqual(gamma, 0.576361700227, places=10)

    def test_monotone_in_budget(self):
        schedule = [theorem3_schedule(BERN4, HAMMING, 0.2, n=2 ** k, g_of_n=float(k) ** 3, c=0.1)
                    for k in range(2, 60, 3)]
        ells = [ell for ell, _ in schedule]
        self.assertEqual(ells, sorted(ells))
        # gamma shrinks once ell is past the peak of log(ell)/ell
        tail = [gamma for ell, gamma in schedule if ell >= 3]
        self.assertEqual(tail, sorted(tail, reverse=True))

    def test_bad_arguments(self):
        with self.assertRaises(InvalidScheduleArgument):
            theorem3_schedule(BERN4, HAMMING, 0.2, n=100, g_of_n=1.0, c=0.1)
        with self.assertRaises(InvalidScheduleArgument):
            theorem3_schedule(BERN4, HAMMING, 0.2, n=100, g_of_n=64, c=0.0)
        with self.assertRaises(InvalidScheduleArgument):
            theorem3_schedule(BERN4, HAMMING, 0.2, n=0, g_of_n=64, c=0.1)


class LlzHelperTests(SimpleTestCase):

    def test_gamma_for_slack(self):
        gamma = llz_gamma_for_slack(BERN4, HAMMING, 0.2, 0.01)
        self.assertAlmostEqual(gamma, 0.039109290088, places=9)
        p = LlzParams.build(BERN4, HAMMING, n=100, ell=20, gamma=gamma, D=0.2, alpha=0.1, seed=1)
        self.assertAlmostEqual(p.d_bar, 0.21, delta=1e-5)

    def test_gamma_for_slack_range(self):
        with self.assertRaises(DistortionOutOfRange):
            llz_gamma_for_slack(BERN4, HAMMING, 0.35, 0.1)
        with self.assertRaises(DistortionOutOfRange):
            llz_gamma_for_slack(BERN4, HAMMING, 0.2, 0.0)

    def test_predicted_match_length(self):
        hyb = HybParams.build(BERN4, HAMMING, n=100, ell=20, gamma=0.05, D=0.2, seed=1)
        self.assertAlmostEqual(working_rate(hyb), hyb.rate - 0.025)
        expected = math.log2(hyb.database_size) / (hyb.rate - 0.025)
        self.assertAlmostEqual(predicted_match_length(hyb), expected)
        # log2 m sits just above ell * R, so the prediction is a little past ell
        self.assertGreater(predicted_match_length(hyb), 20)

        llz = LlzParams.build(BERN4, HAMMING, n=100, ell=20, gamma=0.03, D=0.2, alpha=0.1, seed=1)
        self.assertAlmostEqual(working_rate(llz), rate_distortion(BERN4, HAMMING, 0.2).rate - 0.015)
        self.assertGreater(predicted_match_length(llz), predicted_match_length(hyb))

    def test_memory_estimate(self):
        gvw = GvwParams.build(BERN4, HAMMING, n=100, ell=8, gamma=0.05, D=0.2, seed=1)
        self.assertEqual(memory_estimate(gvw), {'memory_symbols': 40, 'memory_bytes': 5})
        hyb = HybParams.build(UNIFORM4, HAMMING4, n=100, ell=6, gamma=0.05, D=0.3, seed=1)
        self.assertEqual(memory_estimate(hyb), {'memory_symbols': 22, 'memory_bytes': 6})
