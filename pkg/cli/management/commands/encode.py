import logging

from lossy_codecs.container import Container, write_container
from lossy_codecs.models import GVW, LLZ, HYB
from lossy_codecs.pipeline import build_params, encode
from params.utils import heuristic_params, memory_estimate
from rd_core.exceptions import ParamMismatch
from bench.utils import message_for

from cli.utils import (WorkbenchCommand, add_source_arguments, add_limit_arguments, resolve_source,
                       read_symbols, write_symbols)

logger = logging.getLogger(__name__)


class Command(WorkbenchCommand):
    help = "Encode a symbol file (or a fresh source sample) with GVW, LLZ or HYB into an RDC1 container."

    def add_arguments(self, parser):
        parser.add_argument('--codec', required=True, choices=[GVW, LLZ, HYB])
        add_source_arguments(parser)

        group = parser.add_argument_group('Parameters')
        group.add_argument('--D', type=float, required=True, help="target distortion")
        group.add_argument('--heuristic', action='store_true',
                           help="derive ell, gamma and alpha from the experimental defaults")
        group.add_argument('--ell', type=int)
        group.add_argument('--gamma', type=float)
        group.add_argument('--alpha', type=float, help="LLZ only")
        group.add_argument('--n', type=int, help="message length, taken from --input when given")
        group.add_argument('--seed', type=int, default=0, help="database seed (and message seed without --input)")

        group = parser.add_argument_group('Files')
        group.add_argument('--input', help="symbol file to encode; without it a message is sampled")
        group.add_argument('--packed', action='store_true', help="binary symbol files as packed bits")
        group.add_argument('--output', help="container path")
        group.add_argument('--reconstruction', help="also write the encoder's reconstruction here")
        add_limit_arguments(parser)

    def check_flags(self, options):
        if options['heuristic']:
            return
        missing = [f"--{name}" for name in ('ell', 'gamma') if options[name] is None]
        if options['codec'] == LLZ and options['alpha'] is None:
            missing.append('--alpha')
        if missing:
            raise self.usage_error(f"without --heuristic, {', '.join(missing)} must be given")

    def run(self, *args, **options):
        self.check_flags(options)
        if options['input'] is None and options['n'] is None:
            raise self.usage_error("either --input or --n must be given")
        source, dist = resolve_source(options)
        codec = options['codec']

        if options['input']:
            x = read_symbols(options['input'], source.alphabet_size, options['packed'])
            if options['n'] is not None and options['n'] != len(x):
                raise ParamMismatch(f"--n {options['n']} but {options['input']} holds {len(x)} symbols")
        else:
            x = message_for(source, options['n'], options['seed'])
        n = len(x)

        if options['heuristic']:
            p = heuristic_params(source, dist, options['D'], codec, n=n, seed=options['seed'],
                                 max_ell_rate=options['max_ell_rate'])
        else:
            p = build_params(codec, source, dist, n, options['ell'], options['gamma'], options['D'],
                             options['seed'], alpha=options['alpha'], max_ell_rate=options['max_ell_rate'])

        stream, report = encode(p, x, source, dist, workers=options['workers'], memory_cap=options['memory_cap'])

        if options['output']:
            write_container(options['output'], Container.wrap(p, source, dist, stream, report.database_checksum))
        if options['reconstruction']:
            write_symbols(options['reconstruction'], report.reconstruction, options['packed'])

        memory = memory_estimate(p)
        self.emit(codec=codec, n=n, ell=p.ell, rate=report.rate, total_bits=report.total_bits,
                  distortion=report.achieved_distortion, d_bar=p.d_bar, **memory)
        if codec == LLZ:
            self.emit(phrases=report.phrase_count)
        self.say(f"{codec.upper()} encoded {n} symbols in {report.total_bits} bits"
                 + (f" into {options['output']}" if options['output'] else ""))
