import math

import numpy as np
from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings as hyp_settings, strategies as st

from rd_core.exceptions import InvalidPmf, MemoryCap
from .models import SymbolBlock, check_seed
from .utils import (sample_block, generate_database, splitmix64, uniforms, derive_seed,
                    cumulative_thresholds, inverse_cdf)

# first 64 symbols for seed 2009 at Bern(0.4) and seed 42 at uniform-4, computed with a
# standalone C implementation of the same generator
GOLDEN_BERN_2009 = [
    0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0,
    0, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0,
]
GOLDEN_UNIFORM4_42 = [
    2, 0, 1, 1, 0, 3, 0, 3, 1, 2, 0, 1, 2, 2, 2, 0, 0, 1, 0, 2, 3, 0, 2, 2, 0, 1, 2, 3, 3, 2, 3, 3,
    2, 3, 2, 1, 0, 1, 3, 0, 2, 0, 1, 3, 2, 1, 0, 0, 2, 3, 1, 0, 0, 1, 0, 3, 2, 2, 3, 0, 1, 3, 2, 0,
]


class GeneratorTests(SimpleTestCase):

    def test_reference_output(self):
        # published SplitMix64 reference: first output for seed 0
        self.assertEqual(int(splitmix64(0, 0, 1)[0]), 0xE220A8397B1DCDAF)

    def test_raw_draws(self):
        self.assertEqual([int(v) for v in splitmix64(2009, 0, 4)],
                         [1398128628555808600, 11866301596584540802,
                          3586226593598957013, 8361478784770157062])

    def test_offsets_are_consistent(self):
        whole = splitmix64(7, 0, 100)
        np.testing.assert_array_equal(whole[40:60], splitmix64(7, 40, 20))

    def test_uniform_range(self):
        u = uniforms(123, 0, 10000)
        self.assertTrue((u >= 0).all() and (u < 1).all())

    def test_max_seed_wraps(self):
        draws = splitmix64(2 ** 64 - 1, 0, 3)
        self.assertEqual(draws.dtype, np.uint64)

    def test_seed_range(self):
        with self.assertRaises(ValueError):
            check_seed(-1)
        with self.assertRaises(ValueError):
            check_seed(2 ** 64)

    def test_derive_seed_separates_streams(self):
        self.assertNotEqual(derive_seed(5, 1), derive_seed(5, 2))
        self.assertNotEqual(derive_seed(5, 1), 5)
        self.assertEqual(derive_seed(5, 1), derive_seed(5, 1))


class SampleBlockTests(SimpleTestCase):

    def test_golden_bernoulli(self):
        block = sample_block((0.6, 0.4), 64, 2009)
        self.assertEqual(block.tolist(), GOLDEN_BERN_2009)
        self.assertEqual(block.alphabet_size, 2)

    def test_golden_uniform(self):
        self.assertEqual(sample_block((0.25,) * 4, 64, 42).tolist(), GOLDEN_UNIFORM4_42)

    def test_prefix_stability_across_chunks(self):
        # the first symbols do not depend on how long the block is
        short = sample_block((0.6, 0.4), 64, 2009)
        long = sample_block((0.6, 0.4), 5000, 2009)
        self.assertEqual(long.tolist()[:64], short.tolist())

    def test_degenerate_source(self):
        self.assertEqual(sample_block((1.0,), 5, 99).tolist(), [0, 0, 0, 0, 0])

    def test_zero_probability_letter_never_drawn(self):
        block = sample_block((0.0, 0.5, 0.5, 0.0), 20000, 3)
        self.assertNotIn(0, block.tolist())
        self.assertNotIn(3, block.tolist())

    def test_deterministic(self):
        self.assertEqual(sample_block((0.3, 0.7), 1000, 17), sample_block((0.3, 0.7), 1000, 17))

    def test_law_of_large_numbers(self):
        for seed in (1, 2, 3):
            ones = int(sample_block((0.6, 0.4), 10 ** 5, seed).symbols.sum())
            self.assertAlmostEqual(ones / 10 ** 5, 0.4, delta=0.01)

    def test_invalid_pmf(self):
        with self.assertRaises(InvalidPmf):
            sample_block((0.5, 0.6), 10, 1)
        with self.assertRaises(InvalidPmf):
            sample_block((1.5, -0.5), 10, 1)

    def test_invalid_length(self):
        with self.assertRaises(ValueError):
            sample_block((0.5, 0.5), 0, 1)

    def test_block_is_read_only(self):
        block = sample_block((0.5, 0.5), 10, 1)
        with self.assertRaises(ValueError):
            block.symbols[0] = 1

    @hyp_settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=6))
    def test_inverse_cdf_monotone(self, draws):
        thresholds = cumulative_thresholds((0.1, 0.2, 0.3, 0.4))
        u = np.sort(np.asarray(draws) * (1 - 2 ** -53))
        symbols = inverse_cdf(u, thresholds)
        self.assertTrue((np.diff(symbols) >= 0).all())

    def test_thresholds_end_at_one(self):
        cum = cumulative_thresholds((0.1,) * 10)
        self.assertEqual(cum[-1], 1.0)
        self.assertTrue((np.diff(cum) >= 0).all())


class GenerateDatabaseTests(SimpleTestCase):

    def test_single_symbol(self):
        block = generate_database((0.6, 0.4), 1, 2009)
        self.assertEqual(block.tolist(), [0])

    def test_uniform_frequencies(self):
        block = generate_database((0.25,) * 4, 10 ** 6, 8)
        counts = np.bincount(block.symbols, minlength=4) / 10 ** 6
        for c in counts:
            self.assertAlmostEqual(c, 0.25, delta=0.005)

    def test_same_stream_as_sample_block(self):
        self.assertEqual(generate_database((0.6, 0.4), 300, 11), sample_block((0.6, 0.4), 300, 11))

    def test_database_size_formula(self):
        ell, rate = 33, 0.686554
        m = math.floor(2 ** (ell * rate)) + ell - 1
        self.assertEqual(m, 6610321)

    def test_memory_cap(self):
        with self.assertRaises(MemoryCap):
            generate_database((0.5, 0.5), 1001, 1, memory_cap=1000)

    @override_settings(RDC_MEMORY_CAP_SYMBOLS=100)
    def test_memory_cap_from_settings(self):
        with self.assertRaises(MemoryCap):
            generate_database((0.5, 0.5), 101, 1)
        self.assertEqual(len(generate_database((0.5, 0.5), 100, 1)), 100)


class SymbolBlockTests(SimpleTestCase):

    def test_range_checked(self):
        with self.assertRaises(ValueError):
            SymbolBlock.of([0, 2], 2)

    def test_slicing_keeps_alphabet(self):
        block = SymbolBlock.of([0, 1, 2, 3], 4)
        self.assertEqual(block[1:3], SymbolBlock.of([1, 2], 4))
        self.assertEqual(block[3], 3)
        self.assertEqual(len(block), 4)
