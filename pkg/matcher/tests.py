from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, override_settings

from rd_core.exceptions import EmptyCandidates
from rd_core.models import DistortionSpec
from source_sim.models import SymbolBlock

from .models import CandidateSet
from .utils import nearest_window, longest_match, admissible_limits, _partitions


def oracle_nearest(block, database, matrix, count, stride):
    best = None
    for j in range(count):
        start = j * stride
        total = 0
        for t, a in enumerate(block):
            total += matrix[a][database[start + t]]
        if best is None or total < best[0]:
            best = (total, j + 1)
    return best


def oracle_longest(suffix, database, matrix, budget, cap, integer_sums):
    best_len, best_pos = 0, 0
    K = min(cap, len(suffix))
    for i in range(len(database)):
        total = 0
        for k in range(1, K + 1):
            if i + k > len(database):
                break
            total += matrix[suffix[k - 1]][database[i + k - 1]]
            if integer_sums:
                admissible = Fraction(total) <= Fraction(budget) * k
            else:
                admissible = total <= k * budget + 1e-12
            if admissible and k > best_len:
                best_len, best_pos = k, i + 1
    return best_len, best_pos


def random_matrix(rng, k, integer):
    if integer:
        matrix = rng.integers(0, 4, size=(k, k)).astype(float)
    else:
        matrix = np.round(rng.random((k, k)) * 3, 3)
    for x in range(k):
        matrix[x, rng.integers(0, k)] = 0.0
    return DistortionSpec(tuple(tuple(row) for row in matrix))


class WorkedExampleTests(SimpleTestCase):
    database = SymbolBlock.of((0, 1, 1, 0, 1, 0), 2)
    target = SymbolBlock.of((1, 1, 1, 1), 2)
    hamming = DistortionSpec.hamming(2)

    def test_nearest_sliding(self):
        result = nearest_window(self.target, self.database, self.hamming, CandidateSet.sliding(3))
        self.assertEqual(result.position, 2)
        self.assertEqual(result.distortion, 0.25)

    def test_longest_cap_four(self):
        # (1,1,0,1) at position 2 has sum 1 <= 4 * 0.25
        result = longest_match(self.target, self.database, self.hamming, 0.25, 4)
        self.assertEqual((result.length, result.position), (4, 2))
        self.assertEqual(result.distortion, 0.25)

    def test_longest_cap_three(self):
        # no length-3 window has sum <= 0.75
        result = longest_match(self.target, self.database, self.hamming, 0.25, 3)
        self.assertEqual((result.length, result.position), (2, 2))
        self.assertEqual(result.distortion, 0.0)

    def test_exact_window(self):
        database = SymbolBlock.of((3, 1, 0, 2, 2, 1, 0, 3, 3, 0), 4)
        block = database[2:6]
        result = nearest_window(block, database, DistortionSpec.hamming(4), CandidateSet.sliding(7))
        self.assertEqual((result.position, result.distortion), (3, 0.0))

    def test_tie_goes_to_smallest_position(self):
        database = SymbolBlock.of((0, 0, 1, 1, 0, 0), 2)
        block = SymbolBlock.of((0, 1), 2)
        result = nearest_window(block, database, DistortionSpec.hamming(2), CandidateSet.strided(2, 3))
        # strided windows (0,0) (1,1) (0,0) all cost 1
        self.assertEqual(result.position, 1)

    def test_everything_matches(self):
        database = SymbolBlock.of((0, 1, 0, 1, 1), 2)
        suffix = SymbolBlock.of((1, 0, 0, 0, 1, 1, 0), 2)
        result = longest_match(suffix, database, DistortionSpec.hamming(2), 1.0, 5)
        self.assertEqual((result.length, result.position), (5, 1))
        result = longest_match(suffix[:3], database, DistortionSpec.hamming(2), 1.0, 5)
        self.assertEqual((result.length, result.position), (3, 1))

    def test_absent_symbol_at_zero_budget(self):
        database = SymbolBlock.of((0, 0, 0, 0), 2)
        result = longest_match(SymbolBlock.of((1, 0), 2), database, DistortionSpec.hamming(2), 0.0, 2)
        self.assertEqual(result.length, 0)
        self.assertFalse(result.found)

    def test_empty_candidates(self):
        with self.assertRaises(EmptyCandidates):
            CandidateSet.sliding(0)

    def test_database_too_short(self):
        with self.assertRaises(ValueError):
            nearest_window(self.target, self.database, self.hamming, CandidateSet.sliding(4))

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            longest_match(self.target, self.database, self.hamming, 0.25, 0)
        with self.assertRaises(ValueError):
            longest_match(self.target, self.database, self.hamming, -0.1, 2)


class OracleEquivalenceTests(SimpleTestCase):
    """1000 random small instances against exhaustive double loops."""

    def test_random_instances(self):
        rng = np.random.default_rng(20240521)
        for case in range(1000):
            k = 2 if case % 2 else 4
            kind = case % 3
            if kind == 0:
                dist = DistortionSpec.hamming(k)
            else:
                dist = random_matrix(rng, k, integer=(kind == 1))
            matrix = dist.matrix
            m = int(rng.integers(1, 201))
            cap = int(rng.integers(1, 17))
            # low-entropy databases make ties common
            database = SymbolBlock(rng.integers(0, k, size=m) * (rng.random(m) < 0.7), k)
            suffix = SymbolBlock(rng.integers(0, k, size=int(rng.integers(1, 20))), k)
            budget = float(rng.choice([0.0, 0.1, 0.25, 0.3, 0.5, 1.0, float(rng.random())]))

            expected = oracle_longest(suffix.tolist(), database.tolist(), matrix, budget, cap,
                                      dist.is_integer_valued)
            result = longest_match(suffix, database, dist, budget, cap)
            self.assertEqual((result.length, result.position), expected, f"case {case}")
            if result.length:
                self.assertLessEqual(result.distortion, budget + 1e-12)
                self.assertLessEqual(result.length, cap)

            b = int(rng.integers(1, min(m, 16) + 1))
            stride = 1 if case % 4 < 2 else b
            count = (m - b) // stride + 1
            block = SymbolBlock(rng.integers(0, k, size=b), k)
            candidates = CandidateSet(count, stride)
            total, position = oracle_nearest(block.tolist(), database.tolist(), matrix, count, stride)
            result = nearest_window(block, database, dist, candidates)
            self.assertEqual(result.position, position, f"case {case}")
            self.assertEqual(result.total, float(total))


class ParallelismTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(7)
        self.database = SymbolBlock(rng.integers(0, 2, size=300000), 2)
        self.block = SymbolBlock(rng.integers(0, 2, size=24), 2)
        self.dist = DistortionSpec.hamming(2)

    def test_nearest_worker_invariance(self):
        candidates = CandidateSet.sliding(len(self.database) - 23)
        results = {nearest_window(self.block, self.database, self.dist, candidates, workers=w)
                   for w in (1, 2, 8)}
        self.assertEqual(len(results), 1)

    def test_longest_worker_invariance(self):
        results = {longest_match(self.block, self.database, self.dist, 0.1, 24, workers=w)
                   for w in (1, 2, 8)}
        self.assertEqual(len(results), 1)
        self.assertGreater(results.pop().length, 0)

    def test_early_abandon_toggle(self):
        candidates = CandidateSet.sliding(len(self.database) - 23)
        self.assertEqual(
            nearest_window(self.block, self.database, self.dist, candidates, early_abandon=True),
            nearest_window(self.block, self.database, self.dist, candidates, early_abandon=False))
        self.assertEqual(
            longest_match(self.block, self.database, self.dist, 0.15, 24, early_abandon=True),
            longest_match(self.block, self.database, self.dist, 0.15, 24, early_abandon=False))

    @override_settings(RDC_WORKERS=4)
    def test_workers_from_settings(self):
        candidates = CandidateSet.sliding(1000)
        self.assertEqual(nearest_window(self.block, self.database, self.dist, candidates),
                         nearest_window(self.block, self.database, self.dist, candidates, workers=1))

    def test_nearest_is_no_worse_than_any_candidate(self):
        database = self.database[:2000]
        candidates = CandidateSet.sliding(len(database) - 23)
        result = nearest_window(self.block, database, self.dist, candidates)
        windows = np.lib.stride_tricks.sliding_window_view(database.symbols, 24)
        totals = (windows != self.block.symbols).sum(axis=1)
        self.assertEqual(result.total, totals.min())
        self.assertEqual(result.position, int(np.argmin(totals)) + 1)


class HelperTests(SimpleTestCase):

    def test_partitions_cover(self):
        for total, workers in ((10, 3), (2, 8), (1, 1), (100, 7)):
            parts = _partitions(total, workers)
            self.assertEqual(parts[0][0], 0)
            self.assertEqual(parts[-1][1], total)
            for (a, b), (c, d) in zip(parts, parts[1:]):
                self.assertEqual(b, c)

    def test_integer_limits_are_exact(self):
        # 0.3 as a double is slightly below 3/10, so three mismatches never fit into ten symbols
        limits = admissible_limits(0.3, 10, integer_sums=True)
        self.assertEqual(limits[10], 2)
        self.assertEqual(list(admissible_limits(0.25, 4, integer_sums=True)), [0, 0, 0, 0, 1])
