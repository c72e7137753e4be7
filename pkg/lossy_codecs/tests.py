import dataclasses

import numpy as np
from bitarray import bitarray
from django.test import SimpleTestCase
from hypothesis import given, settings as hyp_settings, strategies as st

from rd_core.exceptions import (ParamInvariantViolation, DistortionOutOfRange, IndexOutOfRange,
                                StreamLengthMismatch, StreamExhausted, PointerOutOfRange,
                                SeedMismatch, ContainerFormatError, ParamMismatch)
from rd_core.models import SourceModel, DistortionSpec
from source_sim.models import SymbolBlock
from source_sim.utils import sample_block

from .bitstream import Bitstream
from .container import Container, pack_container, unpack_container
from .gvw import gvw_encode, gvw_decode, build_codebook
from .hyb import hyb_encode, hyb_decode, build_database as hyb_database
from .llz import llz_encode, llz_decode, description_length, build_database as llz_database, LITERAL, POINTER
from .models import GvwParams, HybParams, LlzParams, literal_bits, ceil_log2
from .pipeline import build_params, encode, decode, verify_roundtrip, params_from_container
from .utils import pack_literal, unpack_literal, average_distortion

BERN = SourceModel.bernoulli(0.4)
HAMMING = DistortionSpec.hamming(2)
UNIFORM4 = SourceModel.uniform(4)
HAMMING4 = DistortionSpec.hamming(4)


def message(n, seed=1, source=BERN):
    return sample_block(source.pmf, n, seed)


def small_gvw(n, seed=5, **kwargs):
    return GvwParams.build(BERN, HAMMING, n=n, ell=8, gamma=0.05, D=0.2, seed=seed, **kwargs)


def small_hyb(n, seed=5, **kwargs):
    return HybParams.build(BERN, HAMMING, n=n, ell=8, gamma=0.05, D=0.2, seed=seed, **kwargs)


def small_llz(n, seed=5):
    return LlzParams.build(BERN, HAMMING, n=n, ell=12, gamma=0.03, D=0.2, alpha=0.1, seed=seed)


class BitstreamTests(SimpleTestCase):

    def test_fields_msb_first(self):
        stream = Bitstream()
        stream.write(5, 3)
        stream.write(1, 2)
        stream.write(0, 0)
        self.assertEqual(stream.bits, bitarray('10101'))
        self.assertEqual(stream.to_bytes(), b'\xa8')
        reader = stream.reader()
        self.assertEqual((reader.read(3), reader.read(2), reader.read(0)), (5, 1, 0))
        self.assertEqual(reader.remaining, 0)

    def test_value_must_fit(self):
        with self.assertRaises(ValueError):
            Bitstream().write(8, 3)

    def test_exhausted(self):
        stream = Bitstream()
        stream.write(3, 2)
        with self.assertRaises(StreamExhausted):
            stream.reader().read(3)

    def test_from_bytes(self):
        self.assertEqual(Bitstream.from_bytes(b'\xa8', 5).bits, bitarray('10101'))
        self.assertEqual(Bitstream.from_bytes(b'', 0).bit_length, 0)
        with self.assertRaises(ContainerFormatError):
            Bitstream.from_bytes(b'\xa9', 5)  # nonzero padding
        with self.assertRaises(ContainerFormatError):
            Bitstream.from_bytes(b'\xa8\x00', 5)


class ParamTests(SimpleTestCase):

    def test_gvw_first_table_row(self):
        p = GvwParams.build(BERN, HAMMING, n=1050, ell=33, gamma=0.002, D=0.05, seed=1)
        self.assertEqual(p.codebook_size, 6610234)
        self.assertEqual((p.index_bits, p.blocks, p.total_bits), (23, 32, 736))
        self.assertEqual(round(p.total_bits / p.n, 5), 0.70095)
        self.assertEqual(p.memory_symbols, 33 * 6610234)
        self.assertLessEqual(p.d_bar, 0.05)

    def test_gvw_last_table_row(self):
        p = GvwParams.build(BERN, HAMMING, n=1050, ell=212, gamma=0.002, D=0.29, seed=1)
        self.assertEqual((p.index_bits, p.blocks), (23, 5))
        self.assertEqual(round(p.total_bits / p.n, 5), 0.10952)

    def test_hyb_first_table_row(self):
        p = HybParams.build(BERN, HAMMING, n=1050, ell=33, gamma=0.002, D=0.05, seed=1)
        self.assertEqual(p.database_size, 6610234 + 32)
        self.assertEqual(round(p.total_bits / p.n, 5), 0.70095)
        # 1 bit per symbol, MB = 2**20 bytes
        self.assertAlmostEqual(p.memory_symbols / 8 / 2 ** 20, 0.788, places=3)

    def test_llz_field_sizes(self):
        p = LlzParams.build(BERN, HAMMING, n=1050, ell=33, gamma=0.01, D=0.05, alpha=0.1, seed=1)
        self.assertEqual((p.cap, p.length_bits, p.pointer_bits), (36, 6, 23))
        self.assertEqual(p.phrase_bits(10), 16)
        self.assertEqual(p.phrase_bits(30), 29)
        self.assertTrue(p.uses_literal(22))
        self.assertFalse(p.uses_literal(23))  # tie goes to the pointer
        self.assertGreaterEqual(p.d_bar, 0.05)

    def test_llz_heuristic_parameters_need_24_pointer_bits(self):
        p = LlzParams.build(BERN, HAMMING, n=1050, ell=33, gamma=0.03, D=0.05, alpha=0.1, seed=1)
        self.assertEqual(p.pointer_bits, 24)

    def test_literal_bits(self):
        self.assertEqual(literal_bits(10, 2), 10)
        self.assertEqual(literal_bits(3, 4), 6)
        self.assertEqual(literal_bits(5, 3), 8)  # ceil(5 log2 3) = ceil(7.92)
        self.assertEqual(literal_bits(4, 1), 0)
        self.assertEqual(ceil_log2(1), 0)
        self.assertEqual(ceil_log2(8), 3)
        self.assertEqual(ceil_log2(9), 4)

    def test_memory_guard(self):
        with self.assertRaises(ParamInvariantViolation):
            GvwParams.build(BERN, HAMMING, n=100, ell=60, gamma=0.002, D=0.05, seed=1)
        p = GvwParams.build(BERN, HAMMING, n=100, ell=60, gamma=0.002, D=0.05, seed=1, max_ell_rate=50)
        self.assertGreater(p.index_bits, 28)

    def test_invalid_values(self):
        with self.assertRaises(ParamInvariantViolation):
            GvwParams.build(BERN, HAMMING, 100, 8, 0.0, 0.2, 1)
        with self.assertRaises(DistortionOutOfRange):
            GvwParams.build(BERN, HAMMING, 100, 8, 0.05, 0.4, 1)
        with self.assertRaises(ParamInvariantViolation):
            GvwParams.build(BERN, HAMMING, 0, 8, 0.05, 0.2, 1)
        with self.assertRaises(ParamInvariantViolation):
            HybParams.build(BERN, HAMMING, 100, 8, 0.05, 0.2, 1, stride=3)

    def test_too_few_codewords(self):
        with self.assertRaises(ParamInvariantViolation):
            GvwParams.build(UNIFORM4, HAMMING4, n=10, ell=3, gamma=0.05, D=0.5, seed=1)

    def test_literal_must_beat_pointer(self):
        # m = 4 gives 2-bit pointers, no shorter than a 2-bit single-letter literal
        with self.assertRaises(ParamInvariantViolation):
            LlzParams.build(UNIFORM4, HAMMING4, n=10, ell=3, gamma=0.15, D=0.5, alpha=0.1, seed=1)

    def test_build_params_dispatch(self):
        self.assertIsInstance(build_params('hyb', BERN, HAMMING, 50, 8, 0.05, 0.2, 3), HybParams)
        with self.assertRaises(ParamMismatch):
            build_params('llz', BERN, HAMMING, 50, 12, 0.03, 0.2, 3)
        with self.assertRaises(ParamMismatch):
            build_params('lz77', BERN, HAMMING, 50, 12, 0.03, 0.2, 3)


class LiteralPackingTests(SimpleTestCase):

    def test_first_symbol_most_significant(self):
        self.assertEqual(pack_literal([1, 0, 2], 3), 11)
        self.assertEqual(unpack_literal(11, 3, 3), [1, 0, 2])

    def test_overflow(self):
        with self.assertRaises(IndexOutOfRange):
            unpack_literal(27, 3, 3)


class GvwTests(SimpleTestCase):

    def test_small_params(self):
        p = small_gvw(100)
        self.assertEqual((p.codebook_size, p.index_bits, p.blocks), (5, 3, 13))

    @hyp_settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 1), min_size=1, max_size=120), st.integers(0, 2 ** 64 - 1))
    def test_roundtrip(self, symbols, seed):
        x = SymbolBlock.of(symbols, 2)
        p = small_gvw(len(x), seed=seed)
        stream, report = gvw_encode(x, p, BERN, HAMMING)
        self.assertEqual(stream.bit_length, p.blocks * p.index_bits)
        self.assertEqual(report.rate, stream.bit_length / len(x))
        self.assertEqual(len(report.reconstruction), len(x))
        self.assertEqual(gvw_decode(stream, p, HAMMING, checksum=report.database_checksum),
                         report.reconstruction)
        self.assertAlmostEqual(report.achieved_distortion,
                               average_distortion(x, report.reconstruction, HAMMING))

    def test_codeword_message_has_zero_distortion(self):
        p = small_gvw(24)
        codebook = build_codebook(p)
        word = codebook.symbols[3 * 8:4 * 8]
        x = SymbolBlock(np.concatenate([word, word, word]), 2)
        _, report = gvw_encode(x, p, BERN, HAMMING)
        self.assertEqual(report.achieved_distortion, 0.0)

    def test_zero_indices(self):
        p = small_gvw(20)
        codebook = build_codebook(p)
        stream = Bitstream()
        for _ in range(p.blocks):
            stream.write(0, p.index_bits)
        decoded = gvw_decode(stream, p, HAMMING)
        expected = np.concatenate([codebook.symbols[:8]] * 3)[:20]
        np.testing.assert_array_equal(decoded.symbols, expected)

    def test_index_out_of_range(self):
        p = small_gvw(16)
        stream = Bitstream()
        stream.write(0, 3)
        stream.write(7, 3)  # W = 5
        with self.assertRaises(IndexOutOfRange):
            gvw_decode(stream, p, HAMMING)

    def test_stream_length(self):
        p = small_gvw(16)
        stream = Bitstream()
        stream.write(0, 7)
        with self.assertRaises(StreamLengthMismatch):
            gvw_decode(stream, p, HAMMING)

    def test_wrong_seed(self):
        x = message(64)
        stream, report = gvw_encode(x, small_gvw(64, seed=5), BERN, HAMMING)
        with self.assertRaises(SeedMismatch):
            gvw_decode(stream, small_gvw(64, seed=6), HAMMING, checksum=report.database_checksum)

    def test_message_length_checked(self):
        with self.assertRaises(ParamMismatch):
            gvw_encode(message(10), small_gvw(11), BERN, HAMMING)


class HybTests(SimpleTestCase):

    @hyp_settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=1, max_size=90), st.integers(0, 2 ** 32))
    def test_roundtrip_quaternary(self, symbols, seed):
        x = SymbolBlock.of(symbols, 4)
        p = HybParams.build(UNIFORM4, HAMMING4, n=len(x), ell=4, gamma=0.05, D=0.3, seed=seed)
        stream, report = hyb_encode(x, p, UNIFORM4, HAMMING4)
        self.assertEqual(stream.bit_length, p.total_bits)
        self.assertEqual(hyb_decode(stream, p, HAMMING4), report.reconstruction)

    def test_database_size(self):
        p = small_hyb(50)
        self.assertEqual(p.database_size, p.codebook_size + 7)
        self.assertEqual(len(hyb_database(p)), p.database_size)

    def test_windows_give_zero_distortion(self):
        p = small_hyb(16)
        database = hyb_database(p)
        x = SymbolBlock(np.concatenate([database.symbols[2:10], database.symbols[4:12]]), 2)
        _, report = hyb_encode(x, p, BERN, HAMMING)
        self.assertEqual(report.achieved_distortion, 0.0)
        for index, start in zip(report.indices, (2, 4)):
            np.testing.assert_array_equal(database.symbols[index:index + 8], database.symbols[start:start + 8])

    def test_zero_indices(self):
        p = small_hyb(20)
        database = hyb_database(p)
        stream = Bitstream()
        for _ in range(p.blocks):
            stream.write(0, p.index_bits)
        expected = np.concatenate([database.symbols[:8]] * 3)[:20]
        np.testing.assert_array_equal(hyb_decode(stream, p, HAMMING).symbols, expected)

    def test_index_out_of_range(self):
        p = small_hyb(8)
        stream = Bitstream()
        stream.write(6, 3)
        with self.assertRaises(IndexOutOfRange):
            hyb_decode(stream, p, HAMMING)

    def test_strided_hyb_is_gvw(self):
        for ell, gamma, D in ((8, 0.05, 0.2), (16, 0.05, 0.1)):
            for seed in (1, 2, 3):
                x = message(200, seed=100 + seed)
                g = GvwParams.build(BERN, HAMMING, 200, ell, gamma, D, seed)
                h = HybParams.build(BERN, HAMMING, 200, ell, gamma, D, seed, stride=ell)
                self.assertLessEqual(g.codebook_size, 2 ** 12)
                self.assertEqual(h.memory_symbols, g.memory_symbols)
                g_stream, g_report = gvw_encode(x, g, BERN, HAMMING)
                h_stream, h_report = hyb_encode(x, h, BERN, HAMMING)
                self.assertEqual(g_stream, h_stream)
                self.assertEqual(g_report.reconstruction, h_report.reconstruction)


class LlzTests(SimpleTestCase):

    def test_small_params(self):
        p = small_llz(100)
        self.assertEqual((p.database_size, p.cap, p.length_bits, p.pointer_bits), (21, 13, 4, 5))

    @hyp_settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 1), min_size=1, max_size=150), st.integers(0, 2 ** 64 - 1))
    def test_roundtrip_and_accounting(self, symbols, seed):
        x = SymbolBlock.of(symbols, 2)
        p = small_llz(len(x), seed=seed)
        stream, report = llz_encode(x, p, BERN, HAMMING)
        self.assertEqual(sum(r.length for r in report.phrase_log), len(x))
        self.assertEqual(description_length(p, report.phrase_log), stream.bit_length)
        self.assertLessEqual(report.achieved_distortion, p.d_bar + 1e-12)
        self.assertTrue(all(1 <= r.length <= p.cap for r in report.phrase_log))
        self.assertEqual(llz_decode(stream, p, HAMMING, len(x)), report.reconstruction)

    def test_literal_phrases_are_exact(self):
        x = message(300, seed=9)
        p = small_llz(300)
        _, report = llz_encode(x, p, BERN, HAMMING)
        pos = 0
        for record in report.phrase_log:
            if record.mode == LITERAL:
                self.assertEqual(report.reconstruction[pos:pos + record.length], x[pos:pos + record.length])
            else:
                self.assertLessEqual(record.distortion, p.d_bar + 1e-12)
            pos += record.length

    def test_saturated_matcher(self):
        p = dataclasses.replace(small_llz(104), d_bar=1.0)
        database = llz_database(p)
        stream, report = llz_encode(message(104), p, BERN, HAMMING)
        self.assertEqual(report.phrase_count, 8)
        self.assertTrue(all(r.mode == POINTER and r.position == 1 for r in report.phrase_log))
        np.testing.assert_array_equal(report.reconstruction.symbols,
                                      np.tile(database.symbols[:13], 8))
        self.assertEqual(stream.bit_length, 8 * (4 + 5))

    def test_quaternary_roundtrip(self):
        x = message(400, seed=4, source=UNIFORM4)
        p = LlzParams.build(UNIFORM4, HAMMING4, n=400, ell=6, gamma=0.05, D=0.3, alpha=0.1, seed=8)
        stream, report = llz_encode(x, p, UNIFORM4, HAMMING4)
        self.assertEqual(llz_decode(stream, p, HAMMING4), report.reconstruction)
        self.assertEqual(description_length(p, report.phrase_log), stream.bit_length)

    def test_pointer_out_of_range(self):
        p = small_llz(100)
        stream = Bitstream()
        stream.write(9, p.length_bits)  # L = 10, a pointer phrase
        stream.write(20, p.pointer_bits)  # 20 + 10 > m = 21
        with self.assertRaises(PointerOutOfRange):
            llz_decode(stream, p, HAMMING)

    def test_exhausted(self):
        with self.assertRaises(StreamExhausted):
            llz_decode(Bitstream(), small_llz(10), HAMMING)

    def test_trailing_bits(self):
        x = message(30)
        p = small_llz(30)
        stream, _ = llz_encode(x, p, BERN, HAMMING)
        stream.write(1, 1)
        with self.assertRaises(StreamLengthMismatch):
            llz_decode(stream, p, HAMMING)


class ContainerTests(SimpleTestCase):

    def test_header_roundtrip(self):
        for codec in ('gvw', 'hyb', 'llz'):
            x = message(90, seed=2)
            ell = 12 if codec == 'llz' else 8
            gamma = 0.03 if codec == 'llz' else 0.05
            p = build_params(codec, BERN, HAMMING, 90, ell, gamma, 0.2, 77, alpha=0.1)
            stream, report = encode(p, x, BERN, HAMMING)
            data = pack_container(Container.wrap(p, BERN, HAMMING, stream, report.database_checksum))
            self.assertEqual(data[:4], b'RDC1')
            self.assertEqual(data[4], p.codec_id)

            c = unpack_container(data)
            self.assertEqual((c.codec, c.n, c.ell, c.seed), (codec, 90, ell, 77))
            self.assertEqual(c.source, BERN)
            self.assertEqual(c.dist, HAMMING)
            rebuilt = params_from_container(c)
            self.assertEqual(rebuilt, p)
            self.assertEqual(decode(rebuilt, c.stream, c.dist, checksum=c.checksum), report.reconstruction)
            verify_roundtrip(p, stream, report, HAMMING)

    def test_alpha_only_for_llz(self):
        p = small_gvw(40)
        stream, report = gvw_encode(message(40), p, BERN, HAMMING)
        c = unpack_container(pack_container(Container.wrap(p, BERN, HAMMING, stream, 0)))
        self.assertEqual(c.alpha_micro, 0)

    def test_wrong_seed_is_reported(self):
        p = small_hyb(40)
        stream, report = hyb_encode(message(40), p, BERN, HAMMING)
        c = unpack_container(pack_container(Container.wrap(p, BERN, HAMMING, stream, report.database_checksum)))
        with self.assertRaises(SeedMismatch):
            decode(params_from_container(c, seed=12345), c.stream, c.dist, checksum=c.checksum)

    def test_malformed(self):
        p = small_gvw(40)
        stream, report = gvw_encode(message(40), p, BERN, HAMMING)
        data = pack_container(Container.wrap(p, BERN, HAMMING, stream, report.database_checksum))
        with self.assertRaises(ContainerFormatError):
            unpack_container(b'RDC2' + data[4:])
        with self.assertRaises(ContainerFormatError):
            unpack_container(data[:20])
        with self.assertRaises(ContainerFormatError):
            unpack_container(data[:-1])
        with self.assertRaises(ContainerFormatError):
            unpack_container(data[:4] + bytes([9]) + data[5:])
