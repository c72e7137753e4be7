from lossy_codecs.container import read_container
from lossy_codecs.pipeline import decode, params_from_container
from lossy_codecs.utils import average_distortion
from rd_core.exceptions import ParamMismatch

from cli.utils import WorkbenchCommand, add_limit_arguments, read_symbols, write_symbols


class Command(WorkbenchCommand):
    help = "Decode an RDC1 container back into a symbol file."

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help="container path")
        parser.add_argument('--output', required=True, help="symbol file to write")
        parser.add_argument('--packed', action='store_true', help="write binary symbols as packed bits")
        parser.add_argument('--seed', type=int, help="override the database seed stored in the container")
        parser.add_argument('--reference', help="symbol file to measure the distortion against")
        add_limit_arguments(parser)

    def run(self, *args, **options):
        container = read_container(options['input'])
        p = params_from_container(container, seed=options['seed'], max_ell_rate=options['max_ell_rate'])
        y = decode(p, container.stream, container.dist, checksum=container.checksum,
                   memory_cap=options['memory_cap'])
        write_symbols(options['output'], y, options['packed'])

        self.emit(codec=p.codec, n=len(y), ell=p.ell, total_bits=container.stream.bit_length,
                  rate=container.stream.bit_length / len(y))
        if options['reference']:
            x = read_symbols(options['reference'], container.source.alphabet_size, options['packed'])
            if len(x) != len(y):
                raise ParamMismatch(f"{options['reference']} holds {len(x)} symbols, the container {len(y)}")
            self.emit(distortion=average_distortion(x, y, container.dist))
        self.say(f"Decoded {len(y)} symbols into {options['output']}")
