import csv
import io
import os
import tempfile

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from bench.models import RunRecord
from lossy_codecs.models import GvwParams
from lossy_codecs.utils import average_distortion
from rd_core.models import SourceModel, DistortionSpec
from source_sim.models import SymbolBlock
from source_sim.utils import sample_block

from .utils import read_symbols, write_symbols

BERN4 = SourceModel.bernoulli(0.4)
HAMMING = DistortionSpec.hamming(2)

CODEC_FLAGS = {
    'gvw': ['--ell', '8', '--gamma', '0.05'],
    'hyb': ['--ell', '8', '--gamma', '0.05'],
    'llz': ['--ell', '12', '--gamma', '0.03', '--alpha', '0.1'],
}


def run(*args):
    out, err = io.StringIO(), io.StringIO()
    call_command(*args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


def pairs(text):
    return dict(line.split('=', 1) for line in text.splitlines() if '=' in line)


class WorkspaceMixin:

    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class SymbolFileTests(WorkspaceMixin, SimpleTestCase):

    def test_plain_and_packed(self):
        block = sample_block(BERN4.pmf, 1001, 9)
        for packed in (False, True):
            with self.subTest(packed=packed):
                path = self.path(f'x{packed}')
                write_symbols(path, block, packed)
                self.assertEqual(read_symbols(path, 2, packed), block)

    def test_packed_layout(self):
        path = self.path('packed')
        write_symbols(path, SymbolBlock.of([1, 0, 1, 1, 0, 0, 0, 0, 1], 2), packed=True)
        with open(path, 'rb') as f:
            self.assertEqual(f.read(), b'\x09' + b'\x00' * 7 + b'\xb0\x80')

    def test_bad_files(self):
        from rd_core.exceptions import SpecParseError, ParamMismatch
        path = self.path('bad')
        with open(path, 'w') as f:
            f.write("0\n1\nx\n")
        with self.assertRaises(SpecParseError):
            read_symbols(path, 2)
        with open(path, 'w') as f:
            f.write("0\n4\n")
        with self.assertRaises(SpecParseError):
            read_symbols(path, 4)
        with self.assertRaises(ParamMismatch):
            read_symbols(path, 4, packed=True)


class RdCurveCommandTests(WorkspaceMixin, SimpleTestCase):

    def rows(self, *args):
        out, _ = run('rd_curve', *args)
        return list(csv.DictReader(io.StringIO(out)))

    def test_bernoulli_curve(self):
        rows = self.rows('--source', 'bern:0.4', '--dist', 'hamming', '--points', '50')
        self.assertEqual(len(rows), 50)
        rates = [float(r['R']) for r in rows]
        self.assertTrue(all(b < a for a, b in zip(rates, rates[1:])))

    def test_uniform_endpoints(self):
        rows = self.rows('--source', 'uniform:4')
        self.assertGreater(float(rows[0]['R']), 1.8)
        self.assertLess(float(rows[-1]['R']), 0.01)
        self.assertLess(float(rows[-1]['D']), 0.75)

    def test_closed_form_value(self):
        rows = self.rows('--source', 'bern:0.4', '--points', '3')
        self.assertEqual(float(rows[0]['D']), 0.1)
        self.assertAlmostEqual(float(rows[0]['R']), 0.501955001, delta=1e-6)

    def test_file_output(self):
        out, err = run('rd_curve', '--points', '7', '--output', self.path('curve.csv'))
        self.assertEqual(pairs(out)['points'], '7')
        self.assertEqual(pairs(out)['d_max'], '0.400000')
        self.assertIn('Wrote 7', err)

    def test_bad_source(self):
        with self.assertRaises(CommandError) as ctx:
            run('rd_curve', '--source', 'bern:1.5')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_source_not_a_config_file(self):
        with open(self.path('noise.bin'), 'wb') as f:
            f.write(b'\xff\xfe\x00\x80')
        for source in (self.tmp.name, self.path('noise.bin')):
            with self.subTest(source=source):
                with self.assertRaises(CommandError) as ctx:
                    run('rd_curve', '--source', source)
                self.assertEqual(ctx.exception.returncode, 2)


class EncodeDecodeCommandTests(WorkspaceMixin, SimpleTestCase):

    def setUp(self):
        super().setUp()
        self.x = sample_block(BERN4.pmf, 300, 77)
        write_symbols(self.path('x.txt'), self.x)

    def encode(self, codec, *extra):
        out, _ = run('encode', '--codec', codec, '--D', '0.2', '--seed', '5', '--input', self.path('x.txt'),
                     '--output', self.path(f'{codec}.rdc'), *CODEC_FLAGS[codec], *extra)
        return pairs(out)

    def test_roundtrip_every_codec(self):
        for codec in ('gvw', 'llz', 'hyb'):
            with self.subTest(codec=codec):
                report = self.encode(codec)
                self.assertEqual(report['n'], '300')
                out, _ = run('decode', '--input', self.path(f'{codec}.rdc'), '--output', self.path(f'{codec}.y'),
                             '--reference', self.path('x.txt'))
                decoded = pairs(out)
                self.assertEqual(decoded['total_bits'], report['total_bits'])

                y = read_symbols(self.path(f'{codec}.y'), 2)
                measured = average_distortion(self.x, y, HAMMING)
                self.assertAlmostEqual(float(report['distortion']), measured, places=6)
                self.assertAlmostEqual(float(decoded['distortion']), measured, places=6)

    def test_block_rate(self):
        report = self.encode('gvw')
        # 38 blocks of 3 bits
        self.assertEqual(report['total_bits'], '114')
        self.assertEqual(report['rate'], f"{114 / 300:.6f}")
        self.assertEqual(report['memory_symbols'], '40')

    def test_packed_files(self):
        write_symbols(self.path('x.bin'), self.x, packed=True)
        run('encode', '--codec', 'hyb', '--D', '0.2', '--input', self.path('x.bin'), '--packed',
            '--output', self.path('p.rdc'), '--reconstruction', self.path('r.bin'), *CODEC_FLAGS['hyb'])
        run('decode', '--input', self.path('p.rdc'), '--output', self.path('y.bin'), '--packed')
        self.assertEqual(read_symbols(self.path('y.bin'), 2, packed=True),
                         read_symbols(self.path('r.bin'), 2, packed=True))

    def test_sampled_message(self):
        out, _ = run('encode', '--codec', 'gvw', '--D', '0.2', '--n', '64', *CODEC_FLAGS['gvw'])
        self.assertEqual(pairs(out)['total_bits'], str(8 * 3))

    def test_wrong_seed(self):
        self.encode('llz')
        with self.assertRaises(CommandError) as ctx:
            run('decode', '--input', self.path('llz.rdc'), '--output', self.path('y'), '--seed', '6')
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('SeedMismatch', str(ctx.exception))

    def test_flags_checked_first(self):
        with self.assertRaises(CommandError) as ctx:
            run('encode', '--codec', 'llz', '--D', '0.2', '--n', '10', '--ell', '12', '--gamma', '0.03')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('--alpha', str(ctx.exception))

        with self.assertRaises(CommandError) as ctx:
            run('encode', '--codec', 'gvw', '--D', '0.2', '--input', self.path('x.txt'), '--n', '10',
                *CODEC_FLAGS['gvw'])
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            run('decode', '--input', self.path('nothing.rdc'), '--output', self.path('y'))
        self.assertEqual(ctx.exception.returncode, 4)

    def test_corrupt_container(self):
        with open(self.path('junk.rdc'), 'wb') as f:
            f.write(b'RDC2' + b'\x00' * 60)
        with self.assertRaises(CommandError) as ctx:
            run('decode', '--input', self.path('junk.rdc'), '--output', self.path('y'))
        self.assertEqual(ctx.exception.returncode, 3)


class ParamsCommandTests(SimpleTestCase):

    def test_heuristic_gvw(self):
        out, _ = run('params', '--codec', 'gvw', '--source', 'bern:0.4', '--D', '0.05')
        report = pairs(out)
        self.assertEqual((report['ell'], report['B'], report['W']), ('33', '23', '6610234'))
        self.assertEqual(report['memory_symbols'], str(33 * 6610234))
        self.assertEqual(report['bits_per_symbol'], '0.700952')

    def test_explicit_llz(self):
        out, _ = run('params', '--codec', 'llz', '--D', '0.2', '--ell', '12', '--gamma', '0.03', '--alpha', '0.1')
        report = pairs(out)
        self.assertEqual((report['m'], report['cap'], report['F'], report['Pbits']), ('21', '13', '4', '5'))
        self.assertIn('predicted_match_length', report)

    def test_theorem2(self):
        with self.assertLogs('params.utils', level='WARNING'):
            out, _ = run('params', '--theorem2', '--D', '0.2', '--gamma', '0.01', '--eps', '0.001')
        report = pairs(out)
        self.assertEqual(report['ell'], '4748037')
        self.assertEqual(report['C'], '0.019437')
        self.assertEqual(report['gamma_hat'], '0.505865')

    def test_theorem3(self):
        out, _ = run('params', '--theorem3', '--D', '0.2', '--g-of-n', '1048576', '--c', '0.75', '--n', '5000')
        report = pairs(out)
        # 20 / (0.249 + 0.75) rounds up to 21
        self.assertEqual(report['ell'], '21')

    def test_distortion_beyond_dmax(self):
        with self.assertRaises(CommandError) as ctx:
            run('params', '--D', '0.4')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('Dmax=0.4', str(ctx.exception))

    def test_theorem2_needs_eps(self):
        with self.assertRaises(CommandError) as ctx:
            run('params', '--theorem2', '--D', '0.2', '--gamma', '0.01')
        self.assertEqual(ctx.exception.returncode, 2)


class BenchCommandTests(WorkspaceMixin, TestCase):

    def custom(self, *extra):
        return run('bench', '--codec', 'gvw', '--targets', '0.15,0.2', '--ell', '8', '--gamma', '0.05',
                   '--n', '200', '--seeds', '2', *extra)

    def test_custom_grid_csv(self):
        out, _ = self.custom()
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual([r['d_target'] for r in rows], ['0.15', '0.2'])
        self.assertEqual(rows[1]['rate_mean'], repr(75 / 200))
        self.assertEqual(rows[0]['seeds'], '2')

    def test_save_and_plot(self):
        self.custom('--save', '--csv', self.path('runs.csv'), '--plot', self.path('plot.txt'), '--curve-points', '10')
        self.assertEqual(RunRecord.objects.filter(codec='gvw').count(), 2)
        self.assertTrue(os.path.exists(self.path('runs.csv')))
        with open(self.path('plot.txt'), encoding='utf-8') as f:
            self.assertEqual(f.read().count('\ngvw,'), 2)

    def test_usage_errors(self):
        for args in (['--codec', 'gvw', '--targets', ''],
                     ['--codec', 'gvw'],
                     ['--targets', '0.2'],
                     ['--scenario', 'table2', '--codec', 'gvw'],
                     ['--codec', 'gvw', '--targets', '0.2', '--seeds', '0']):
            with self.subTest(args=args):
                with self.assertRaises(CommandError) as ctx:
                    run('bench', *args)
                self.assertEqual(ctx.exception.returncode, 2)

    def test_check_published(self):
        _, err = self.custom('--published', '0.15,0.2', '--band', '0.5', '--check-published')
        self.assertEqual(err.count('within_band=True'), 2)
        self.assertIn('All 2 grid points', err)

        with self.assertRaises(CommandError) as ctx:
            self.custom('--published', '0.45,0.45', '--check-published')
        self.assertEqual(ctx.exception.returncode, 3)

    def test_check_published_usage(self):
        for args in (['--codec', 'gvw', '--targets', '0.2', '--check-published'],
                     ['--scenario', 'table1', '--codec', 'llz', '--check-published'],
                     ['--codec', 'gvw', '--targets', '0.15,0.2', '--published', '0.1']):
            with self.subTest(args=args):
                with self.assertRaises(CommandError) as ctx:
                    run('bench', *args)
                self.assertEqual(ctx.exception.returncode, 2)

    def test_match_proxy(self):
        out, _ = run('bench', '--proxy', 'matches', '--codec', 'llz', '--targets', '0.2', '--ell', '12',
                     '--gamma', '0.03', '--alpha', '0.1', '--probes', '20', '--seeds', '1')
        report = pairs(out)
        self.assertEqual(report['probes'], '20')
        self.assertGreater(float(report['mean']), 0)
